// qcore.hpp
// Fixed-size dense complex linear algebra for the path (2), spin (2) and
// path x spin (4) Hilbert spaces.
//
// Basis order of the 4-dim space is path major, spin minor:
//   index = 2 * path + spin,  path 0 = psi1, 1 = psi2,  spin 0 = up_z, 1 = down_z.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "pathspin/errors.hpp"

namespace pathspin {

using Complex = std::complex<double>;

inline constexpr double kExactTol = 1e-12;
inline constexpr double kDegenerateProbability = 1e-14;

template <std::size_t N>
using Ket = std::array<Complex, N>;

inline bool is_finite(const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

template <std::size_t N>
bool all_finite(const Ket<N>& v) {
  for (const auto& z : v)
    if (!is_finite(z)) return false;
  return true;
}

template <std::size_t N>
double norm_squared(const Ket<N>& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return s;
}

// <a|b>, conjugate-linear in the first argument.
template <std::size_t N>
Complex inner(const Ket<N>& a, const Ket<N>& b) {
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < N; ++i) s += std::conj(a[i]) * b[i];
  return s;
}

template <std::size_t N>
Ket<N> scaled(const Ket<N>& v, Complex c) {
  Ket<N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = c * v[i];
  return out;
}

/// Dense N x N complex matrix, row major.
template <std::size_t N>
class Matrix {
 public:
  constexpr Matrix() : m_{} {}

  static Matrix identity() {
    Matrix out;
    for (std::size_t i = 0; i < N; ++i) out(i, i) = 1.0;
    return out;
  }

  static Matrix diagonal(const std::array<double, N>& d) {
    Matrix out;
    for (std::size_t i = 0; i < N; ++i) out(i, i) = d[i];
    return out;
  }

  // |a><b|
  static Matrix outer(const Ket<N>& a, const Ket<N>& b) {
    Matrix out;
    for (std::size_t r = 0; r < N; ++r)
      for (std::size_t c = 0; c < N; ++c) out(r, c) = a[r] * std::conj(b[c]);
    return out;
  }

  Complex& operator()(std::size_t r, std::size_t c) { return m_[r * N + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return m_[r * N + c]; }

  static constexpr std::size_t dim() { return N; }

  Matrix adjoint() const {
    Matrix out;
    for (std::size_t r = 0; r < N; ++r)
      for (std::size_t c = 0; c < N; ++c) out(r, c) = std::conj((*this)(c, r));
    return out;
  }

  Complex trace() const {
    Complex s{0.0, 0.0};
    for (std::size_t i = 0; i < N; ++i) s += (*this)(i, i);
    return s;
  }

  bool finite() const {
    for (const auto& z : m_)
      if (!is_finite(z)) return false;
    return true;
  }

  friend Matrix operator+(const Matrix& a, const Matrix& b) {
    Matrix out;
    for (std::size_t i = 0; i < N * N; ++i) out.m_[i] = a.m_[i] + b.m_[i];
    return out;
  }

  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    Matrix out;
    for (std::size_t i = 0; i < N * N; ++i) out.m_[i] = a.m_[i] - b.m_[i];
    return out;
  }

  friend Matrix operator*(Complex s, const Matrix& a) {
    Matrix out;
    for (std::size_t i = 0; i < N * N; ++i) out.m_[i] = s * a.m_[i];
    return out;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix out;
    for (std::size_t r = 0; r < N; ++r)
      for (std::size_t k = 0; k < N; ++k) {
        const Complex ark = a(r, k);
        for (std::size_t c = 0; c < N; ++c) out(r, c) += ark * b(k, c);
      }
    return out;
  }

  friend Ket<N> operator*(const Matrix& a, const Ket<N>& v) {
    Ket<N> out{};
    for (std::size_t r = 0; r < N; ++r)
      for (std::size_t c = 0; c < N; ++c) out[r] += a(r, c) * v[c];
    return out;
  }

 private:
  std::array<Complex, N * N> m_;
};

using QubitOperator = Matrix<2>;
using FourDimOperator = Matrix<4>;

template <std::size_t N>
double max_abs_diff(const Matrix<N>& a, const Matrix<N>& b) {
  double worst = 0.0;
  for (std::size_t r = 0; r < N; ++r)
    for (std::size_t c = 0; c < N; ++c) worst = std::max(worst, std::abs(a(r, c) - b(r, c)));
  return worst;
}

template <std::size_t N>
double max_abs_diff(const Ket<N>& a, const Ket<N>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < N; ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

template <std::size_t N>
bool is_hermitian(const Matrix<N>& m, double tol = kExactTol) {
  return max_abs_diff(m, m.adjoint()) < tol;
}

template <std::size_t N>
bool is_unitary(const Matrix<N>& m, double tol = kExactTol) {
  return max_abs_diff(m.adjoint() * m, Matrix<N>::identity()) < tol;
}

// Observables built in this library have eigenvalues +-1.
template <std::size_t N>
bool is_pm1_observable(const Matrix<N>& m, double tol = kExactTol) {
  return is_hermitian(m, tol) && max_abs_diff(m * m, Matrix<N>::identity()) < tol;
}

/// Normalized pure state of dimension N. Construction checks finiteness and
/// unit norm (within kExactTol) and never renormalizes; use normalize() for that.
template <std::size_t N>
class State {
 public:
  explicit State(const Ket<N>& amplitudes) : amps_(amplitudes) {
    if (!all_finite(amps_)) throw std::invalid_argument("state amplitudes must be finite");
    const double n2 = norm_squared(amps_);
    if (std::abs(n2 - 1.0) > kExactTol)
      throw std::invalid_argument("state is not normalized (norm^2 = " + std::to_string(n2) + ")");
  }

  static State basis(std::size_t index) {
    if (index >= N) throw std::out_of_range("basis index out of range");
    Ket<N> k{};
    k[index] = 1.0;
    return State(k);
  }

  const Ket<N>& amplitudes() const { return amps_; }
  const Complex& operator[](std::size_t i) const { return amps_[i]; }
  static constexpr std::size_t dim() { return N; }

 private:
  Ket<N> amps_;
};

using SpinState = State<2>;
using PathSpinState = State<4>;

template <std::size_t N>
State<N> normalize(const Ket<N>& v) {
  if (!all_finite(v)) throw std::invalid_argument("cannot normalize a non-finite vector");
  const double n = std::sqrt(norm_squared(v));
  if (n < 1e-300) throw std::invalid_argument("cannot normalize the zero vector");
  return State<N>(scaled(v, 1.0 / n));
}

/// Kronecker product in path-major order: (A (x) B)(|p>|s>) = A|p> (x) B|s>.
inline FourDimOperator tensor(const QubitOperator& path_op, const QubitOperator& spin_op) {
  FourDimOperator out;
  for (std::size_t pr = 0; pr < 2; ++pr)
    for (std::size_t sr = 0; sr < 2; ++sr)
      for (std::size_t pc = 0; pc < 2; ++pc)
        for (std::size_t sc = 0; sc < 2; ++sc) out(2 * pr + sr, 2 * pc + sc) = path_op(pr, pc) * spin_op(sr, sc);
  return out;
}

inline Ket<4> tensor(const Ket<2>& path, const Ket<2>& spin) {
  return {path[0] * spin[0], path[0] * spin[1], path[1] * spin[0], path[1] * spin[1]};
}

inline PathSpinState product_state(const State<2>& path, const SpinState& spin) {
  return PathSpinState(tensor(path.amplitudes(), spin.amplitudes()));
}

/// <state|obs|state>. The imaginary part of the sesquilinear form must be below
/// kExactTol; otherwise the observable is rejected.
template <std::size_t N>
double expectation(const State<N>& state, const Matrix<N>& obs) {
  if (!is_hermitian(obs)) throw NonHermitianObservable("observable is not Hermitian within 1e-12");
  const Complex value = inner(state.amplitudes(), obs * state.amplitudes());
  if (std::abs(value.imag()) >= kExactTol)
    throw NonHermitianObservable("expectation has imaginary residue " + std::to_string(value.imag()));
  return value.real();
}

struct PathBranch {
  double probability;
  PathSpinState conditional;
};

/// Unnormalized (|k><k| (x) I)|state>.
inline Ket<4> project_path_unnormalized(const PathSpinState& state, const Ket<2>& path_ket) {
  const auto& a = state.amplitudes();
  // <k| (x) I applied to the state gives the spin part of this branch.
  const Complex up = std::conj(path_ket[0]) * a[0] + std::conj(path_ket[1]) * a[2];
  const Complex down = std::conj(path_ket[0]) * a[1] + std::conj(path_ket[1]) * a[3];
  return tensor(path_ket, Ket<2>{up, down});
}

inline PathBranch project_path(const PathSpinState& state, const Ket<2>& path_ket) {
  if (!all_finite(path_ket) || std::abs(norm_squared(path_ket) - 1.0) > kExactTol)
    throw std::invalid_argument("path ket must be finite and normalized");
  const Ket<4> projected = project_path_unnormalized(state, path_ket);
  const double p = norm_squared(projected);
  if (p < kDegenerateProbability)
    throw DegenerateBranch("path branch probability " + std::to_string(p) + " is below 1e-14");
  return {std::min(p, 1.0), normalize(projected)};
}

/// Spin factor (<k| (x) I)|state>, renormalized. Defined whenever the branch
/// is non-degenerate.
inline SpinState spin_part(const PathSpinState& state, const Ket<2>& path_ket) {
  const auto& a = state.amplitudes();
  const Ket<2> spin{std::conj(path_ket[0]) * a[0] + std::conj(path_ket[1]) * a[2],
                    std::conj(path_ket[0]) * a[1] + std::conj(path_ket[1]) * a[3]};
  if (norm_squared(spin) < kDegenerateProbability) throw DegenerateBranch("spin part of an empty path branch");
  return normalize(spin);
}

}  // namespace pathspin
