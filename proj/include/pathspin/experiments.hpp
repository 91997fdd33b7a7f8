// experiments.hpp
// End-to-end pipelines for the three-stage interferometer (preparation, path
// measurement at BS2, spin measurement at SG1/SG2) and for the two-stage
// variant whose polarized input replaces the path measurement.

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pathspin/elements.hpp"
#include "pathspin/qcore.hpp"

namespace pathspin {

/// Channel statistics of one (state, path basis, spin setting) evaluation.
/// Channel 1 is SG1 (psi3, or psi1 in the two-stage setup), channel 2 is SG2.
/// Weighted means are probability weighted, so their sum is the whole-ensemble
/// expectation. A channel with probability below 1e-14 has no conditional mean
/// and contributes a weighted mean of 0.
struct SubensembleReport {
  double p3 = 0.0;
  double p4 = 0.0;
  std::optional<double> cond_mean3;
  std::optional<double> cond_mean4;
  double weighted_mean3 = 0.0;
  double weighted_mean4 = 0.0;
  double total_expectation = 0.0;

  // Empty string when every invariant holds, otherwise the first violation.
  std::string violated_invariant(double tol = kExactTol) const {
    if (!(p3 >= -tol && p3 <= 1.0 + tol && p4 >= -tol && p4 <= 1.0 + tol)) return "channel probability outside [0,1]";
    if (std::abs(p3 + p4 - 1.0) > tol) return "p3 + p4 = 1";
    if (std::abs(weighted_mean3 + weighted_mean4 - total_expectation) > tol)
      return "total_expectation = weighted_mean_sg1 + weighted_mean_sg2";
    for (const auto& c : {cond_mean3, cond_mean4})
      if (c && std::abs(*c) > 1.0 + tol) return "|conditional mean| <= 1";
    if (cond_mean3 && std::abs(p3 * *cond_mean3 - weighted_mean3) > tol) return "weighted_mean_sg1 = p3 * cond_mean_sg1";
    if (cond_mean4 && std::abs(p4 * *cond_mean4 - weighted_mean4) > tol) return "weighted_mean_sg2 = p4 * cond_mean_sg2";
    return {};
  }
};

/// (1/sqrt2)(|psi1>|down>_z + i|psi2>|up>_z), built as BS1 followed by a
/// z-basis flipper on psi1.
inline PathSpinState prepare_pan_home() {
  const PathSpinState split = bs1_transform(SpinState::basis(0));
  return spin_flipper(split, PathChannel::psi1, SpinBasis::z());
}

/// (1/sqrt2)(|psi1>|down>_vt + i|psi2>|up>_vt): BS1 on the polarized input,
/// then a flipper in the same polarization basis on psi1.
inline PathSpinState prepare_de_zela(const ThetaPolarization& vartheta) {
  const PathSpinState split = bs1_transform(polarized_up(vartheta));
  return spin_flipper(split, PathChannel::psi1, vartheta);
}

/// Re-expresses the state with path coordinates (psi3, psi4) instead of
/// (psi1, psi2). The result's path index 0 is the psi3 coefficient.
inline PathSpinState post_bs2_state(const PathSpinState& state, const BeamSplitterParams& params) {
  const auto [psi3, psi4] = bs2_output_kets(params);
  const auto& a = state.amplitudes();
  auto coeff = [&](const Ket<2>& k, std::size_t spin) {
    return std::conj(k[0]) * a[spin] + std::conj(k[1]) * a[2 + spin];
  };
  return PathSpinState(Ket<4>{coeff(psi3, 0), coeff(psi3, 1), coeff(psi4, 0), coeff(psi4, 1)});
}

namespace detail {

inline void fill_channel(const PathSpinState& state, const Ket<2>& ket, const FourDimOperator& spin_obs, double& p,
                         std::optional<double>& cond, double& weighted) {
  p = norm_squared(project_path_unnormalized(state, ket));
  if (p < kDegenerateProbability) {
    cond.reset();
    weighted = 0.0;
    return;
  }
  const PathBranch branch = project_path(state, ket);
  cond = expectation(branch.conditional, spin_obs);
  weighted = p * *cond;
}

inline SubensembleReport channel_report(const PathSpinState& state, const Ket<2>& ch1, const Ket<2>& ch2,
                                        const SpinSetting& setting) {
  const FourDimOperator spin_obs = tensor(QubitOperator::identity(), spin_observable(setting));
  SubensembleReport r;
  fill_channel(state, ch1, spin_obs, r.p3, r.cond_mean3, r.weighted_mean3);
  fill_channel(state, ch2, spin_obs, r.p4, r.cond_mean4, r.weighted_mean4);
  r.total_expectation = expectation(state, spin_obs);
  return r;
}

}  // namespace detail

/// Path measurement in the (psi3, psi4) basis chosen by params, followed by
/// sigma_theta in each output channel.
inline SubensembleReport run_path_spin(const PathSpinState& state, const BeamSplitterParams& params,
                                       const SpinSetting& setting) {
  const auto [psi3, psi4] = bs2_output_kets(params);
  return detail::channel_report(state, psi3, psi4, setting);
}

/// Two-stage readout: sigma_theta in the channels psi1 and psi2 directly.
/// There is no path observable and hence no context parameter.
inline SubensembleReport run_de_zela_channels(const ThetaPolarization& vartheta, const SpinSetting& setting) {
  return detail::channel_report(prepare_de_zela(vartheta), Ket<2>{1.0, 0.0}, Ket<2>{0.0, 1.0}, setting);
}

/// Closed-form probability-weighted subensemble means:
///   sg1 = (d^2 - g^2)/2 cos 2t + g d sin 2t,   sg2 = -sg1.
inline std::pair<double, double> closed_form_subensembles(const BeamSplitterParams& params,
                                                          const SpinSetting& setting) {
  const double g = params.gamma();
  const double d = params.delta();
  const double t2 = 2.0 * setting.theta();
  const double sg1 = 0.5 * (d * d - g * g) * std::cos(t2) + g * d * std::sin(t2);
  const double sg2 = 0.5 * (g * g - d * d) * std::cos(t2) - g * d * std::sin(t2);
  return {sg1, sg2};
}

/// <A_gamma (x) sigma_theta>, the joint statistic of the commuting pair.
inline double correlator(const PathSpinState& state, const BeamSplitterParams& params, const SpinSetting& setting) {
  return expectation(state, tensor(path_observable(params), spin_observable(setting)));
}

/// Correlator between "which of psi1/psi2" and sigma_theta.
inline double channel_correlator(const PathSpinState& state, const SpinSetting& setting) {
  return expectation(state, tensor(QubitOperator::diagonal({1.0, -1.0}), spin_observable(setting)));
}

struct DeZelaComparison {
  double vartheta = 0.0;
  double theta = 0.0;
  double dz_ch1 = 0.0;  // weighted sigma_theta mean in psi1
  double dz_ch2 = 0.0;
  double ph_sg1_mapped = 0.0;  // closed form at gamma=sin vt, delta=cos vt, theta -> -theta
  double ph_sg2_mapped = 0.0;
  double ph_sg1_direct = 0.0;  // same closed form without the theta reflection
  double ph_sg2_direct = 0.0;
  double residual_ch1 = 0.0;
  double residual_ch2 = 0.0;
  std::string convention = "gamma=sin(vartheta), delta=cos(vartheta), theta->-theta";
};

/// The two-stage channel means coincide with the three-stage closed forms
/// under gamma = sin vt, delta = cos vt only after reflecting theta.
inline DeZelaComparison compare_de_zela(const ThetaPolarization& vartheta, const SpinSetting& setting) {
  const SubensembleReport dz = run_de_zela_channels(vartheta, setting);
  const BeamSplitterParams params(std::sin(vartheta.vartheta()), std::cos(vartheta.vartheta()));
  const auto [m1, m2] = closed_form_subensembles(params, SpinSetting(-setting.theta()));
  const auto [d1, d2] = closed_form_subensembles(params, setting);
  DeZelaComparison c;
  c.vartheta = vartheta.vartheta();
  c.theta = setting.theta();
  c.dz_ch1 = dz.weighted_mean3;
  c.dz_ch2 = dz.weighted_mean4;
  c.ph_sg1_mapped = m1;
  c.ph_sg2_mapped = m2;
  c.ph_sg1_direct = d1;
  c.ph_sg2_direct = d2;
  c.residual_ch1 = std::abs(c.dz_ch1 - m1);
  c.residual_ch2 = std::abs(c.dz_ch2 - m2);
  return c;
}

/// Parameter grid for sweeps. gamma in [0, 1] with delta = +sqrt(1 - gamma^2).
struct SweepGrid {
  std::vector<double> gamma_values;
  std::vector<double> theta_values;
  std::vector<double> vartheta_values;
};

enum class Pipeline { pan_home, de_zela };

struct SweepRow {
  std::optional<double> vartheta;
  double gamma = 0.0;
  double delta = 0.0;
  double theta = 0.0;
  SubensembleReport report;
  double correlator = 0.0;
};

/// Rows ordered outer-to-inner: gamma (or vartheta for the two-stage
/// pipeline), then theta.
inline std::vector<SweepRow> sweep(const SweepGrid& grid, Pipeline pipeline) {
  std::vector<SweepRow> rows;
  if (grid.theta_values.empty()) throw std::invalid_argument("sweep grid needs at least one theta");
  if (pipeline == Pipeline::pan_home) {
    if (grid.gamma_values.empty()) throw std::invalid_argument("sweep grid needs at least one gamma");
    const PathSpinState state = prepare_pan_home();
    rows.reserve(grid.gamma_values.size() * grid.theta_values.size());
    for (double g : grid.gamma_values) {
      const auto params = BeamSplitterParams::from_gamma(g);
      for (double t : grid.theta_values) {
        const SpinSetting s(t);
        rows.push_back({std::nullopt, params.gamma(), params.delta(), s.theta(), run_path_spin(state, params, s),
                        correlator(state, params, s)});
      }
    }
  } else {
    if (grid.vartheta_values.empty()) throw std::invalid_argument("two-stage sweep needs at least one vartheta");
    rows.reserve(grid.vartheta_values.size() * grid.theta_values.size());
    for (double vt : grid.vartheta_values) {
      const ThetaPolarization pol(vt);
      const PathSpinState state = prepare_de_zela(pol);
      for (double t : grid.theta_values) {
        const SpinSetting s(t);
        rows.push_back({vt, 1.0, 0.0, s.theta(), run_de_zela_channels(pol, s), channel_correlator(state, s)});
      }
    }
  }
  return rows;
}

}  // namespace pathspin
