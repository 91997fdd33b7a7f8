// noncontextual.hpp
// Hidden-variable analyses:
//  * a Bell-type deterministic model for one qubit, sampled by Monte Carlo;
//  * deterministic +-1 value assignments for sets of path and spin settings and
//    an LP deciding whether a mixture of them reproduces the quantum moments;
//  * CHSH witnesses and a search for the maximal violation of a state.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "pathspin/elements.hpp"
#include "pathspin/experiments.hpp"
#include "pathspin/lp.hpp"
#include "pathspin/qcore.hpp"

namespace pathspin {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double length(const Vec3& a) { return std::sqrt(dot(a, a)); }

class UnitVector {
 public:
  explicit UnitVector(const Vec3& v) : v_(v) {
    if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2]) || std::abs(length(v) - 1.0) > kExactTol)
      throw std::invalid_argument("direction must be a finite unit vector");
  }
  const Vec3& vec() const { return v_; }

 private:
  Vec3 v_;
};

class BlochVector {
 public:
  BlochVector(double x, double y, double z) : v_{x, y, z} {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z) || length(v_) > 1.0 + kExactTol)
      throw std::invalid_argument("Bloch vector must be finite with length <= 1");
  }
  const Vec3& vec() const { return v_; }
  bool is_pure() const { return std::abs(length(v_) - 1.0) < kExactTol; }

 private:
  Vec3 v_;
};

class HiddenVariable {
 public:
  explicit HiddenVariable(const Vec3& lambda) : lambda_(lambda) {}
  const Vec3& lambda() const { return lambda_.vec(); }

 private:
  UnitVector lambda_;
};

/// (x, y, z) = (2 Re(a* b), 2 Im(a* b), |a|^2 - |b|^2) for a|up> + b|down>.
inline BlochVector bloch_vector(const SpinState& s) {
  const Complex ab = std::conj(s[0]) * s[1];
  return {2.0 * ab.real(), 2.0 * ab.imag(), std::norm(s[0]) - std::norm(s[1])};
}

/// Measurement axis of sigma_theta = cos 2t Z + sin 2t X.
inline UnitVector spin_axis(const SpinSetting& s) {
  return UnitVector(Vec3{std::sin(2.0 * s.theta()), 0.0, std::cos(2.0 * s.theta())});
}

/// Outcome sign(lambda.n + p.n) with sign(0) = +1.
inline int bell_qubit_outcome(const BlochVector& state, const UnitVector& direction, const HiddenVariable& hv) {
  const double v = dot(hv.lambda(), direction.vec()) + dot(state.vec(), direction.vec());
  return v >= 0.0 ? 1 : -1;
}

// ---------------------------------------------------------------------------
// Seeded streams. One root seed; every (task, chunk) gets its own generator,
// so results do not depend on how chunks are scheduled across threads.

namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t root, std::uint64_t task, std::uint64_t chunk) {
  return splitmix64(splitmix64(splitmix64(root) ^ task) + chunk);
}

inline double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

// z uniform on [-1, 1), azimuth uniform on [0, 2pi): area preserving.
inline Vec3 uniform_sphere(std::mt19937_64& g) {
  const double z = 2.0 * uniform01(g) - 1.0;
  const double phi = 2.0 * std::numbers::pi * uniform01(g);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

}  // namespace rng

inline constexpr std::size_t kMcChunk = 65536;

/// Monte Carlo mean of the Bell model outcome with lambda uniform on the
/// sphere; converges to p.n. Bit-identical for any thread count.
inline double bell_qubit_expectation_mc(const BlochVector& state, const UnitVector& direction, std::size_t samples,
                                        std::uint64_t seed, std::uint64_t task = 0, unsigned threads = 1) {
  if (samples == 0) throw InvalidSampleCount("Monte Carlo needs at least one sample");
  const std::size_t chunks = (samples + kMcChunk - 1) / kMcChunk;
  std::vector<std::int64_t> plus(chunks, 0);
  const double pn = dot(state.vec(), direction.vec());
  const Vec3& n = direction.vec();

  auto run_chunk = [&](std::size_t c) {
    std::mt19937_64 g(rng::stream_seed(seed, task, c));
    const std::size_t begin = c * kMcChunk;
    const std::size_t end = std::min(samples, begin + kMcChunk);
    std::int64_t count = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const Vec3 lambda = rng::uniform_sphere(g);
      if (dot(lambda, n) + pn >= 0.0) ++count;
    }
    plus[c] = count;
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
  if (threads == 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t c = t; c < chunks; c += threads) run_chunk(c);
      });
    for (auto& th : pool) th.join();
  }
  std::int64_t total_plus = 0;
  for (auto p : plus) total_plus += p;
  const auto n_samples = static_cast<std::int64_t>(samples);
  return static_cast<double>(2 * total_plus - n_samples) / static_cast<double>(n_samples);
}

struct HvChannelCheck {
  int channel = 0;  // 1 = psi1, 2 = psi2
  double quantum_mean = 0.0;
  double mc_mean = 0.0;
  double abs_error = 0.0;
  double tolerance = 0.0;  // 4 / sqrt(samples)
  bool pass = false;
};

/// For each channel of the two-stage prepared state, samples the Bell model on
/// the conditional spin state and compares with the quantum conditional mean.
inline std::array<HvChannelCheck, 2> reproduce_de_zela_channels(const ThetaPolarization& vartheta,
                                                                const SpinSetting& setting, std::size_t samples,
                                                                std::uint64_t seed, unsigned threads = 1) {
  if (samples < 10000) throw InvalidSampleCount("channel reproduction needs at least 1e4 samples");
  const PathSpinState state = prepare_de_zela(vartheta);
  const UnitVector axis = spin_axis(setting);
  const FourDimOperator spin_obs = tensor(QubitOperator::identity(), spin_observable(setting));
  const std::array<Ket<2>, 2> kets{Ket<2>{1.0, 0.0}, Ket<2>{0.0, 1.0}};
  const std::uint64_t setting_key = rng::splitmix64(std::bit_cast<std::uint64_t>(vartheta.vartheta())) ^
                                    rng::splitmix64(std::bit_cast<std::uint64_t>(setting.theta()) + 1);
  std::array<HvChannelCheck, 2> out{};
  for (int ch = 0; ch < 2; ++ch) {
    const SpinState spin = spin_part(state, kets[ch]);
    auto& c = out[ch];
    c.channel = ch + 1;
    c.quantum_mean = expectation(project_path(state, kets[ch]).conditional, spin_obs);
    c.mc_mean = bell_qubit_expectation_mc(bloch_vector(spin), axis, samples, seed,
                                          rng::splitmix64(setting_key + static_cast<std::uint64_t>(ch)), threads);
    c.abs_error = std::abs(c.mc_mean - c.quantum_mean);
    c.tolerance = 4.0 / std::sqrt(static_cast<double>(samples));
    c.pass = c.abs_error < c.tolerance;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Deterministic value assignments and the noncontextual LP.

inline constexpr std::size_t kMaxSettings = 20;

struct DeterministicAssignment {
  std::vector<int> path_values;
  std::vector<int> spin_values;

  friend bool operator==(const DeterministicAssignment&, const DeterministicAssignment&) = default;
};

namespace detail {

// Entry t of assignment index k, counting from the most significant of m+n bits:
// -1 for a clear bit, +1 for a set bit. Index order is lexicographic.
inline int assignment_value(std::uint64_t k, std::size_t t, std::size_t total) {
  return (k >> (total - 1 - t)) & 1U ? 1 : -1;
}

inline void check_settings(std::size_t m, std::size_t n) {
  if (m + n > kMaxSettings) throw TooManySettings("at most 20 settings in total (2^20 assignments)");
}

}  // namespace detail

inline std::vector<DeterministicAssignment> enumerate_assignments(std::size_t m_path, std::size_t n_spin) {
  detail::check_settings(m_path, n_spin);
  const std::size_t total = m_path + n_spin;
  const std::uint64_t count = std::uint64_t{1} << total;
  std::vector<DeterministicAssignment> out;
  out.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    DeterministicAssignment a;
    a.path_values.resize(m_path);
    a.spin_values.resize(n_spin);
    for (std::size_t i = 0; i < m_path; ++i) a.path_values[i] = detail::assignment_value(k, i, total);
    for (std::size_t j = 0; j < n_spin; ++j) a.spin_values[j] = detail::assignment_value(k, m_path + j, total);
    out.push_back(std::move(a));
  }
  return out;
}

/// Quantum moments a noncontextual mixture has to reproduce.
struct MomentTable {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<double> correlators;  // row major m x n: <A_i (x) sigma_j>
  std::vector<double> path_marginals;
  std::vector<double> spin_marginals;

  double correlator(std::size_t i, std::size_t j) const { return correlators[i * n + j]; }

  // Row layout of the LP: normalization, correlators, path marginals, spin marginals.
  std::size_t rows() const { return 1 + m * n + m + n; }

  std::vector<double> rhs() const {
    std::vector<double> b;
    b.reserve(rows());
    b.push_back(1.0);
    b.insert(b.end(), correlators.begin(), correlators.end());
    b.insert(b.end(), path_marginals.begin(), path_marginals.end());
    b.insert(b.end(), spin_marginals.begin(), spin_marginals.end());
    return b;
  }
};

inline MomentTable quantum_moments(std::span<const BeamSplitterParams> path_settings,
                                   std::span<const SpinSetting> spin_settings, const PathSpinState& state) {
  MomentTable t;
  t.m = path_settings.size();
  t.n = spin_settings.size();
  const QubitOperator id = QubitOperator::identity();
  for (const auto& p : path_settings)
    for (const auto& s : spin_settings) t.correlators.push_back(correlator(state, p, s));
  for (const auto& p : path_settings) t.path_marginals.push_back(expectation(state, tensor(path_observable(p), id)));
  for (const auto& s : spin_settings) t.spin_marginals.push_back(expectation(state, tensor(id, spin_observable(s))));
  return t;
}

/// Writes the LP column of one assignment (values a_i, b_j) in MomentTable row layout.
inline void assignment_column(std::span<const int> a, std::span<const int> b, std::span<double> out) {
  std::size_t r = 0;
  out[r++] = 1.0;
  for (int ai : a)
    for (int bj : b) out[r++] = static_cast<double>(ai * bj);
  for (int ai : a) out[r++] = ai;
  for (int bj : b) out[r++] = bj;
}

/// max over the CHSH sign family (an odd number of minus signs) of
/// |+-E11 +- E12 +- E21 +- E22|.
inline double chsh_value(double e11, double e12, double e21, double e22) {
  for (double e : {e11, e12, e21, e22})
    if (!std::isfinite(e) || std::abs(e) > 1.0 + 1e-9) throw std::invalid_argument("correlators must lie in [-1, 1]");
  return std::max({std::abs(e11 + e12 + e21 - e22), std::abs(e11 + e12 - e21 + e22), std::abs(e11 - e12 + e21 + e22),
                   std::abs(-e11 + e12 + e21 + e22)});
}

struct ChshWitness {
  std::size_t path1 = 0;
  std::size_t path2 = 0;
  std::size_t spin1 = 0;
  std::size_t spin2 = 0;
  double value = 0.0;
};

/// Largest CHSH value over all 2x2 sub-tables of the correlator table.
inline std::optional<ChshWitness> best_chsh_witness(const MomentTable& t) {
  std::optional<ChshWitness> best;
  for (std::size_t i1 = 0; i1 < t.m; ++i1)
    for (std::size_t i2 = i1 + 1; i2 < t.m; ++i2)
      for (std::size_t j1 = 0; j1 < t.n; ++j1)
        for (std::size_t j2 = j1 + 1; j2 < t.n; ++j2) {
          const double v = chsh_value(t.correlator(i1, j1), t.correlator(i1, j2), t.correlator(i2, j1),
                                      t.correlator(i2, j2));
          if (!best || v > best->value) best = ChshWitness{i1, i2, j1, j2, v};
        }
  return best;
}

enum class Verdict { feasible, infeasible, indeterminate };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::feasible: return "FEASIBLE";
    case Verdict::infeasible: return "INFEASIBLE";
    case Verdict::indeterminate: return "INDETERMINATE";
  }
  return "?";
}

struct FeasibilityResult {
  Verdict verdict = Verdict::indeterminate;
  std::vector<double> weights;  // one per assignment when feasible, sums to 1
  double max_residual = 0.0;
  std::optional<ChshWitness> witness;  // set when infeasible and a CHSH value exceeds 2 + 1e-6
  std::vector<double> farkas;          // phase-1 dual certificate when infeasible
  double phase1_objective = 0.0;
  std::size_t iterations = 0;
  std::string note;

  bool feasible() const { return verdict == Verdict::feasible; }
};

inline constexpr double kMomentTol = 1e-9;
inline constexpr double kWitnessMargin = 1e-6;

/// Recomputes every constrained moment from the weights, independently of the
/// solver, and returns the worst absolute deviation (including the weight sum
/// and any negative weight).
inline double moment_residual(std::span<const DeterministicAssignment> assignments, std::span<const double> weights,
                              const MomentTable& t) {
  double sum = 0.0;
  double worst = 0.0;
  std::vector<double> corr(t.m * t.n, 0.0), pm(t.m, 0.0), sm(t.n, 0.0);
  for (std::size_t k = 0; k < assignments.size(); ++k) {
    const double w = weights[k];
    worst = std::max(worst, -w);
    if (w == 0.0) continue;
    sum += w;
    const auto& a = assignments[k];
    for (std::size_t i = 0; i < t.m; ++i) {
      pm[i] += w * a.path_values[i];
      for (std::size_t j = 0; j < t.n; ++j) corr[i * t.n + j] += w * a.path_values[i] * a.spin_values[j];
    }
    for (std::size_t j = 0; j < t.n; ++j) sm[j] += w * a.spin_values[j];
  }
  worst = std::max(worst, std::abs(sum - 1.0));
  for (std::size_t k = 0; k < corr.size(); ++k) worst = std::max(worst, std::abs(corr[k] - t.correlators[k]));
  for (std::size_t i = 0; i < t.m; ++i) worst = std::max(worst, std::abs(pm[i] - t.path_marginals[i]));
  for (std::size_t j = 0; j < t.n; ++j) worst = std::max(worst, std::abs(sm[j] - t.spin_marginals[j]));
  return worst;
}

namespace detail {

template <class ColumnFn>
FeasibilityResult solve_feasibility(std::size_t columns, const MomentTable& t, ColumnFn&& column,
                                    const lp::Options& opt) {
  FeasibilityResult out;
  const std::vector<double> b = t.rhs();
  lp::Solution sol;
  try {
    sol = lp::solve(t.rows(), columns, b, std::span<const double>{}, column, opt);
  } catch (const SolverStall& e) {
    out.verdict = Verdict::indeterminate;
    out.note = e.what();
    return out;
  }
  out.iterations = sol.iterations;
  out.phase1_objective = sol.phase1_objective;
  if (sol.status == lp::Status::optimal) {
    out.weights.assign(columns, 0.0);
    for (const auto& [j, v] : sol.support) out.weights[j] = v;
    out.verdict = Verdict::feasible;
  } else {
    out.verdict = Verdict::infeasible;
    out.farkas = std::move(sol.farkas);
    auto w = best_chsh_witness(t);
    if (w && w->value > 2.0 + kWitnessMargin) out.witness = w;
  }
  return out;
}

}  // namespace detail

/// Does a probability mixture over the given assignments reproduce all
/// correlators and marginals of the table?
inline FeasibilityResult feasibility_over(std::span<const DeterministicAssignment> assignments, const MomentTable& t,
                                          const lp::Options& opt = {}) {
  for (const auto& a : assignments)
    if (a.path_values.size() != t.m || a.spin_values.size() != t.n)
      throw std::invalid_argument("assignment shape does not match the moment table");
  auto column = [&](std::size_t k, std::span<double> out) {
    assignment_column(assignments[k].path_values, assignments[k].spin_values, out);
  };
  FeasibilityResult r = detail::solve_feasibility(assignments.size(), t, column, opt);
  if (r.feasible()) {
    r.max_residual = moment_residual(assignments, r.weights, t);
    if (r.max_residual >= kMomentTol) {
      r.verdict = Verdict::indeterminate;
      r.note = "weights failed independent moment re-check";
    }
  }
  return r;
}

/// Noncontextual LP for the given settings on a state, over all 2^(m+n)
/// assignments in lexicographic order.
inline FeasibilityResult feasibility_lp(std::span<const BeamSplitterParams> path_settings,
                                        std::span<const SpinSetting> spin_settings, const PathSpinState& state,
                                        const lp::Options& opt = {}) {
  if (path_settings.empty() || spin_settings.empty()) throw std::invalid_argument("settings must be nonempty");
  const std::size_t m = path_settings.size();
  const std::size_t n = spin_settings.size();
  detail::check_settings(m, n);
  const MomentTable t = quantum_moments(path_settings, spin_settings, state);
  const std::size_t total = m + n;
  std::vector<int> a(m), b(n);
  auto column = [&](std::size_t k, std::span<double> out) {
    for (std::size_t i = 0; i < m; ++i) a[i] = detail::assignment_value(k, i, total);
    for (std::size_t j = 0; j < n; ++j) b[j] = detail::assignment_value(k, m + j, total);
    assignment_column(a, b, out);
  };
  FeasibilityResult r = detail::solve_feasibility(std::size_t{1} << total, t, column, opt);
  if (r.feasible()) {
    std::vector<DeterministicAssignment> support;
    std::vector<double> w;
    for (std::size_t k = 0; k < r.weights.size(); ++k) {
      if (r.weights[k] == 0.0) continue;
      DeterministicAssignment d;
      for (std::size_t i = 0; i < m; ++i) d.path_values.push_back(detail::assignment_value(k, i, total));
      for (std::size_t j = 0; j < n; ++j) d.spin_values.push_back(detail::assignment_value(k, m + j, total));
      support.push_back(std::move(d));
      w.push_back(r.weights[k]);
    }
    r.max_residual = moment_residual(support, w, t);
    if (r.max_residual >= kMomentTol) {
      r.verdict = Verdict::indeterminate;
      r.note = "weights failed independent moment re-check";
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// CHSH search over two path and two spin settings.

struct ChshSearchResult {
  std::array<double, 2> alpha{};  // gamma = cos(alpha), delta = sin(alpha), alpha in [0, pi/2]
  std::array<double, 2> theta{};
  double value = 0.0;

  BeamSplitterParams path(std::size_t i) const { return BeamSplitterParams::from_angle(alpha[i]); }
  SpinSetting spin(std::size_t j) const { return SpinSetting(theta[j]); }
};

namespace detail {

inline double chsh_at(const PathSpinState& state, const std::array<double, 4>& x) {
  const auto p1 = BeamSplitterParams::from_angle(x[0]);
  const auto p2 = BeamSplitterParams::from_angle(x[1]);
  const SpinSetting s1(x[2]);
  const SpinSetting s2(x[3]);
  return chsh_value(correlator(state, p1, s1), correlator(state, p1, s2), correlator(state, p2, s1),
                    correlator(state, p2, s2));
}

// Golden-section maximization of f on [lo, hi].
template <class F>
double golden_max(F&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

}  // namespace detail

/// Coarse grid over (alpha1, alpha2, theta1, theta2) followed by cyclic
/// golden-section refinement. For the three-stage prepared state the value
/// converges to 2 sqrt 2.
inline ChshSearchResult chsh_search(const PathSpinState& state, std::size_t grid_density) {
  if (grid_density < 8) throw std::invalid_argument("grid density must be at least 8");
  const std::size_t g = grid_density;
  const double alpha_step = (std::numbers::pi / 2.0) / static_cast<double>(g - 1);
  const double theta_step = std::numbers::pi / static_cast<double>(g);
  std::vector<double> table(g * g);
  for (std::size_t a = 0; a < g; ++a)
    for (std::size_t t = 0; t < g; ++t)
      table[a * g + t] = correlator(state, BeamSplitterParams::from_angle(alpha_step * static_cast<double>(a)),
                                    SpinSetting(theta_step * static_cast<double>(t)));

  // Row and column swaps map the CHSH family onto itself, so ordered pairs suffice.
  std::array<std::size_t, 4> bi{0, 1, 0, 1};
  double best = -1.0;
  for (std::size_t a1 = 0; a1 < g; ++a1)
    for (std::size_t a2 = a1 + 1; a2 < g; ++a2)
      for (std::size_t t1 = 0; t1 < g; ++t1)
        for (std::size_t t2 = t1 + 1; t2 < g; ++t2) {
          const double v = chsh_value(table[a1 * g + t1], table[a1 * g + t2], table[a2 * g + t1], table[a2 * g + t2]);
          if (v > best) {
            best = v;
            bi = {a1, a2, t1, t2};
          }
        }

  std::array<double, 4> x{alpha_step * static_cast<double>(bi[0]), alpha_step * static_cast<double>(bi[1]),
                          theta_step * static_cast<double>(bi[2]), theta_step * static_cast<double>(bi[3])};
  double fx = detail::chsh_at(state, x);
  double h = std::max(alpha_step, theta_step);
  while (h > 1e-10) {
    const double before = fx;
    for (std::size_t k = 0; k < 4; ++k) {
      double lo = x[k] - h, hi = x[k] + h;
      if (k < 2) {
        lo = std::max(lo, 0.0);
        hi = std::min(hi, std::numbers::pi / 2.0);
      }
      auto f = [&](double v) {
        auto y = x;
        y[k] = v;
        return detail::chsh_at(state, y);
      };
      const double cand = detail::golden_max(f, lo, hi, 1e-12);
      const double fc = f(cand);
      if (fc > fx) {
        x[k] = cand;
        fx = fc;
      }
    }
    if (fx - before < 1e-14) h *= 0.5;
  }

  ChshSearchResult r;
  r.alpha = {x[0], x[1]};
  r.theta = {SpinSetting(x[2]).theta(), SpinSetting(x[3]).theta()};
  r.value = fx;
  return r;
}

}  // namespace pathspin
