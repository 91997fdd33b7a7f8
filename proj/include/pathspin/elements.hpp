// elements.hpp
// Interferometer hardware as operators: the 50:50 first beam splitter, spin
// flipper, the second beam splitter's output channels and path observable,
// the spin observable and Stern-Gerlach projectors. Mirrors add no relative
// phase and are therefore not modeled.

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "pathspin/qcore.hpp"

namespace pathspin {

enum class PathChannel { psi1 = 0, psi2 = 1 };

/// Amplitudes (gamma, delta) of the second beam splitter, gamma^2 + delta^2 = 1.
/// Different values select different path observables (measurement contexts).
class BeamSplitterParams {
 public:
  BeamSplitterParams(double gamma, double delta) : gamma_(gamma), delta_(delta) {
    if (!std::isfinite(gamma) || !std::isfinite(delta)) throw std::invalid_argument("beam splitter params must be finite");
    if (std::abs(gamma) > 1.0 || std::abs(delta) > 1.0)
      throw std::invalid_argument("beam splitter amplitudes must lie in [-1, 1]");
    if (std::abs(gamma * gamma + delta * delta - 1.0) > kExactTol)
      throw std::invalid_argument("beam splitter params violate gamma^2 + delta^2 = 1");
  }

  // Sweep convention: gamma in [0, 1], delta = +sqrt(1 - gamma^2).
  static BeamSplitterParams from_gamma(double gamma) {
    if (!std::isfinite(gamma) || gamma < 0.0 || gamma > 1.0)
      throw std::invalid_argument("gamma must lie in [0, 1]");
    return {gamma, std::sqrt(std::max(0.0, 1.0 - gamma * gamma))};
  }

  // gamma = cos(alpha), delta = sin(alpha).
  static BeamSplitterParams from_angle(double alpha) { return {std::cos(alpha), std::sin(alpha)}; }

  double gamma() const { return gamma_; }
  double delta() const { return delta_; }

 private:
  double gamma_;
  double delta_;
};

/// Spin analyzer angle theta. sigma_theta has period pi, so theta is stored
/// canonicalized to [0, pi).
class SpinSetting {
 public:
  explicit SpinSetting(double theta) {
    if (!std::isfinite(theta)) throw std::invalid_argument("theta must be finite");
    theta_ = std::fmod(theta, std::numbers::pi);
    if (theta_ < 0.0) theta_ += std::numbers::pi;
    if (theta_ >= std::numbers::pi) theta_ = 0.0;
  }
  double theta() const { return theta_; }

 private:
  double theta_;
};

/// Polarization angle of the input spin |up>_vt = sin(vt)|up>_z + cos(vt)|down>_z.
class ThetaPolarization {
 public:
  explicit ThetaPolarization(double vartheta) : vartheta_(vartheta) {
    if (!std::isfinite(vartheta)) throw std::invalid_argument("vartheta must be finite");
  }
  double vartheta() const { return vartheta_; }

 private:
  double vartheta_;
};

/// Orthonormal (up, down) pair defining which spin states a flipper exchanges.
struct SpinBasis {
  Ket<2> up;
  Ket<2> down;

  static SpinBasis z() { return {Ket<2>{1.0, 0.0}, Ket<2>{0.0, 1.0}}; }

  // |down>_vt = -cos(vt)|up>_z + sin(vt)|down>_z, so vt = pi/2 is the z basis.
  static SpinBasis polarized(const ThetaPolarization& p) {
    const double s = std::sin(p.vartheta());
    const double c = std::cos(p.vartheta());
    return {Ket<2>{s, c}, Ket<2>{-c, s}};
  }
};

inline SpinState polarized_up(const ThetaPolarization& p) { return SpinState(SpinBasis::polarized(p).up); }
inline SpinState polarized_down(const ThetaPolarization& p) { return SpinState(SpinBasis::polarized(p).down); }

/// 50:50 first beam splitter: transmitted -> psi1 (1/sqrt2), reflected -> psi2 (i/sqrt2).
inline PathSpinState bs1_transform(const SpinState& input_spin) {
  const double h = std::numbers::sqrt2 / 2.0;
  return PathSpinState(tensor(Ket<2>{h, Complex{0.0, h}}, input_spin.amplitudes()));
}

/// Exchange |up>_b <-> |down>_b on one path channel, identity on the other.
inline QubitOperator flip_operator(const SpinBasis& basis) {
  return QubitOperator::outer(basis.down, basis.up) + QubitOperator::outer(basis.up, basis.down);
}

inline PathSpinState spin_flipper(const PathSpinState& state, PathChannel channel, const SpinBasis& flip_basis) {
  const QubitOperator on = flip_operator(flip_basis);
  const QubitOperator off = QubitOperator::identity();
  const bool first = channel == PathChannel::psi1;
  const QubitOperator p1 = QubitOperator::diagonal({1.0, 0.0});
  const QubitOperator p2 = QubitOperator::diagonal({0.0, 1.0});
  const FourDimOperator u = tensor(p1, first ? on : off) + tensor(p2, first ? off : on);
  return PathSpinState(u * state.amplitudes());
}

inline PathSpinState spin_flipper(const PathSpinState& state, PathChannel channel, const ThetaPolarization& p) {
  return spin_flipper(state, channel, SpinBasis::polarized(p));
}

struct Bs2Kets {
  Ket<2> psi3;  // +1 eigenvector of the path observable
  Ket<2> psi4;  // -1 eigenvector
};

/// psi3 = -i gamma psi1 + delta psi2,  psi4 = delta psi1 - i gamma psi2.
inline Bs2Kets bs2_output_kets(const BeamSplitterParams& p) {
  const double g = p.gamma();
  const double d = p.delta();
  return {Ket<2>{Complex{0.0, -g}, d}, Ket<2>{d, Complex{0.0, -g}}};
}

/// A_gamma = [[g^2 - d^2, -2i g d], [2i g d, d^2 - g^2]] in the (psi1, psi2) basis.
inline QubitOperator path_observable(const BeamSplitterParams& p) {
  const double g = p.gamma();
  const double d = p.delta();
  QubitOperator a;
  a(0, 0) = g * g - d * d;
  a(0, 1) = Complex{0.0, -2.0 * g * d};
  a(1, 0) = Complex{0.0, 2.0 * g * d};
  a(1, 1) = d * d - g * g;
  return a;
}

/// sigma_theta = [[cos 2t, sin 2t], [sin 2t, -cos 2t]] in the (up_z, down_z) basis.
inline QubitOperator spin_observable(const SpinSetting& s) {
  const double c = std::cos(2.0 * s.theta());
  const double sn = std::sin(2.0 * s.theta());
  QubitOperator m;
  m(0, 0) = c;
  m(0, 1) = sn;
  m(1, 0) = sn;
  m(1, 1) = -c;
  return m;
}

struct SgProjectors {
  QubitOperator plus;
  QubitOperator minus;
};

inline SgProjectors sg_projectors(const SpinSetting& s) {
  const QubitOperator id = QubitOperator::identity();
  const QubitOperator sigma = spin_observable(s);
  return {0.5 * (id + sigma), 0.5 * (id - sigma)};
}

}  // namespace pathspin
