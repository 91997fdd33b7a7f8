// lp.hpp
// Revised simplex for standard-form linear programs
//
//   minimize c.x  subject to  A x = b,  x >= 0
//
// with a dense explicit basis inverse. Columns of A are produced on demand by a
// caller-supplied generator, so problems with many more columns than rows never
// materialize A. Phase 1 uses one artificial variable per row; entering and
// leaving variables follow Bland's rule, which rules out cycling on the highly
// degenerate feasibility problems this is used for.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "pathspin/errors.hpp"

namespace pathspin::lp {

enum class Status { optimal, infeasible, unbounded };

struct Options {
  std::size_t max_iterations = 200000;
  double pricing_tol = 1e-11;
  double pivot_tol = 1e-11;
  double feasibility_tol = 1e-10;  // phase-1 objective threshold
  std::size_t refactor_every = 50;
};

struct Solution {
  Status status = Status::infeasible;
  // Nonzero structural variables as (column, value), ascending column.
  std::vector<std::pair<std::size_t, double>> support;
  double objective = 0.0;
  double phase1_objective = 0.0;
  // On infeasibility: y with y.A_j <= 0 for every column and y.b > 0.
  std::vector<double> farkas;
  std::size_t iterations = 0;
};

namespace detail {

// In-place Gauss-Jordan inverse with partial pivoting, row-major r x r.
inline bool invert(std::vector<double>& a, std::size_t r) {
  std::vector<double> inv(r * r, 0.0);
  for (std::size_t i = 0; i < r; ++i) inv[i * r + i] = 1.0;
  for (std::size_t col = 0; col < r; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < r; ++i)
      if (std::abs(a[i * r + col]) > std::abs(a[piv * r + col])) piv = i;
    if (std::abs(a[piv * r + col]) < 1e-14) return false;
    if (piv != col)
      for (std::size_t k = 0; k < r; ++k) {
        std::swap(a[piv * r + k], a[col * r + k]);
        std::swap(inv[piv * r + k], inv[col * r + k]);
      }
    const double d = a[col * r + col];
    for (std::size_t k = 0; k < r; ++k) {
      a[col * r + k] /= d;
      inv[col * r + k] /= d;
    }
    for (std::size_t i = 0; i < r; ++i) {
      if (i == col) continue;
      const double f = a[i * r + col];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < r; ++k) {
        a[i * r + k] -= f * a[col * r + k];
        inv[i * r + k] -= f * inv[col * r + k];
      }
    }
  }
  a = std::move(inv);
  return true;
}

template <class ColumnFn>
class RevisedSimplex {
 public:
  RevisedSimplex(std::size_t rows, std::size_t cols, std::span<const double> b, ColumnFn& column, const Options& opt)
      : r_(rows), n_(cols), column_(column), opt_(opt), sign_(rows, 1.0), b_(rows), basis_(rows),
        binv_(rows * rows, 0.0), xb_(rows), scratch_(rows), u_(rows), y_(rows) {
    for (std::size_t i = 0; i < r_; ++i) {
      sign_[i] = b[i] < 0.0 ? -1.0 : 1.0;
      b_[i] = sign_[i] * b[i];
      basis_[i] = n_ + i;
      binv_[i * r_ + i] = 1.0;
      xb_[i] = b_[i];
    }
  }

  Solution run(std::span<const double> cost) {
    Solution sol;
    phase_ = 1;
    iterate(cost, sol);
    double infeas = 0.0;
    for (std::size_t i = 0; i < r_; ++i)
      if (is_artificial(basis_[i])) infeas += xb_[i];
    sol.phase1_objective = infeas;
    if (infeas > opt_.feasibility_tol) {
      sol.status = Status::infeasible;
      compute_duals(cost);
      sol.farkas.resize(r_);
      // Phase-1 duals are a Farkas certificate; undo the row sign flips.
      for (std::size_t i = 0; i < r_; ++i) sol.farkas[i] = y_[i] * sign_[i];
      return sol;
    }
    drive_out_artificials();
    if (!cost.empty()) {
      phase_ = 2;
      if (!iterate(cost, sol)) {
        sol.status = Status::unbounded;
        return sol;
      }
    }
    sol.status = Status::optimal;
    for (std::size_t i = 0; i < r_; ++i)
      if (!is_artificial(basis_[i]) && xb_[i] > 0.0) sol.support.emplace_back(basis_[i], xb_[i]);
    std::sort(sol.support.begin(), sol.support.end());
    if (!cost.empty())
      for (const auto& [j, v] : sol.support) sol.objective += cost[j] * v;
    return sol;
  }

 private:
  bool is_artificial(std::size_t j) const { return j >= n_; }

  double cost_of(std::size_t j, std::span<const double> cost) const {
    if (phase_ == 1) return is_artificial(j) ? 1.0 : 0.0;
    return is_artificial(j) || cost.empty() ? 0.0 : cost[j];
  }

  // Column j of the row-sign-adjusted constraint matrix.
  void load_column(std::size_t j, std::vector<double>& out) {
    if (is_artificial(j)) {
      std::fill(out.begin(), out.end(), 0.0);
      out[j - n_] = 1.0;
      return;
    }
    column_(j, std::span<double>(out));
    for (std::size_t i = 0; i < r_; ++i) out[i] *= sign_[i];
  }

  void compute_duals(std::span<const double> cost) {
    std::fill(y_.begin(), y_.end(), 0.0);
    for (std::size_t i = 0; i < r_; ++i) {
      const double cb = cost_of(basis_[i], cost);
      if (cb == 0.0) continue;
      for (std::size_t k = 0; k < r_; ++k) y_[k] += cb * binv_[i * r_ + k];
    }
  }

  void refactor() {
    std::vector<double> bm(r_ * r_);
    for (std::size_t i = 0; i < r_; ++i) {
      load_column(basis_[i], scratch_);
      for (std::size_t k = 0; k < r_; ++k) bm[k * r_ + i] = scratch_[k];
    }
    if (!invert(bm, r_)) throw SolverStall("basis matrix became singular during refactorization");
    binv_ = std::move(bm);
    for (std::size_t i = 0; i < r_; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < r_; ++k) s += binv_[i * r_ + k] * b_[k];
      xb_[i] = std::abs(s) < 1e-13 ? 0.0 : s;
    }
  }

  void pivot(std::size_t row, std::size_t entering) {
    const double up = u_[row];
    for (std::size_t k = 0; k < r_; ++k) binv_[row * r_ + k] /= up;
    xb_[row] /= up;
    for (std::size_t i = 0; i < r_; ++i) {
      if (i == row || u_[i] == 0.0) continue;
      const double f = u_[i];
      for (std::size_t k = 0; k < r_; ++k) binv_[i * r_ + k] -= f * binv_[row * r_ + k];
      xb_[i] -= f * xb_[row];
    }
    for (auto& x : xb_)
      if (x < 0.0 && x > -1e-12) x = 0.0;
    basis_[row] = entering;
    if (++since_refactor_ >= opt_.refactor_every) {
      refactor();
      since_refactor_ = 0;
    }
  }

  void ftran(std::size_t j) {
    load_column(j, scratch_);
    for (std::size_t i = 0; i < r_; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < r_; ++k) s += binv_[i * r_ + k] * scratch_[k];
      u_[i] = s;
    }
  }

  // Returns false if the phase objective is unbounded below.
  bool iterate(std::span<const double> cost, Solution& sol) {
    std::vector<char> in_basis(n_ + r_, 0);
    for (std::size_t j : basis_) in_basis[j] = 1;
    for (;;) {
      if (sol.iterations >= opt_.max_iterations)
        throw SolverStall("simplex exceeded " + std::to_string(opt_.max_iterations) + " iterations");
      compute_duals(cost);
      // Bland: lowest-index improving column. Artificials never re-enter.
      std::size_t entering = n_ + r_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (in_basis[j]) continue;
        load_column(j, scratch_);
        double d = cost_of(j, cost);
        for (std::size_t k = 0; k < r_; ++k) d -= y_[k] * scratch_[k];
        if (d < -opt_.pricing_tol) {
          entering = j;
          break;
        }
      }
      if (entering == n_ + r_) return true;
      ftran(entering);
      std::size_t leave = r_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < r_; ++i) {
        if (u_[i] <= opt_.pivot_tol) continue;
        const double ratio = xb_[i] / u_[i];
        if (ratio < best - 1e-12 || (ratio <= best + 1e-12 && leave < r_ && basis_[i] < basis_[leave])) {
          best = std::min(best, ratio);
          leave = i;
        }
      }
      if (leave == r_) return false;
      in_basis[basis_[leave]] = 0;
      in_basis[entering] = 1;
      pivot(leave, entering);
      ++sol.iterations;
    }
  }

  // Degenerate pivots replacing zero-level artificials by structural columns.
  // A row where no structural column has a nonzero entry is redundant and its
  // artificial stays basic at zero.
  void drive_out_artificials() {
    for (std::size_t row = 0; row < r_; ++row) {
      if (!is_artificial(basis_[row])) continue;
      std::vector<char> in_basis(n_, 0);
      for (std::size_t j : basis_)
        if (!is_artificial(j)) in_basis[j] = 1;
      for (std::size_t j = 0; j < n_; ++j) {
        if (in_basis[j]) continue;
        ftran(j);
        if (std::abs(u_[row]) > 1e-9) {
          pivot(row, j);
          break;
        }
      }
    }
  }

  std::size_t r_;
  std::size_t n_;
  ColumnFn& column_;
  Options opt_;
  std::vector<double> sign_;
  std::vector<double> b_;
  std::vector<std::size_t> basis_;
  std::vector<double> binv_;
  std::vector<double> xb_;
  std::vector<double> scratch_;
  std::vector<double> u_;
  std::vector<double> y_;
  int phase_ = 1;
  std::size_t since_refactor_ = 0;
};

}  // namespace detail

/// Solves min cost.x s.t. A x = b, x >= 0. column(j, out) writes column j of A
/// (length rows). An empty cost means a pure feasibility problem.
/// Throws SolverStall when the iteration cap is hit.
template <class ColumnFn>
Solution solve(std::size_t rows, std::size_t cols, std::span<const double> b, std::span<const double> cost,
               ColumnFn&& column, const Options& opt = {}) {
  if (b.size() != rows) throw std::invalid_argument("rhs length must equal the number of rows");
  if (!cost.empty() && cost.size() != cols) throw std::invalid_argument("cost length must equal the number of columns");
  detail::RevisedSimplex<std::remove_reference_t<ColumnFn>> simplex(rows, cols, b, column, opt);
  return simplex.run(cost);
}

/// Dense convenience overload; A is row major rows x cols.
inline Solution solve_dense(const std::vector<std::vector<double>>& a, std::span<const double> b,
                            std::span<const double> cost, const Options& opt = {}) {
  const std::size_t rows = a.size();
  const std::size_t cols = rows == 0 ? 0 : a.front().size();
  auto column = [&](std::size_t j, std::span<double> out) {
    for (std::size_t i = 0; i < rows; ++i) out[i] = a[i][j];
  };
  return solve(rows, cols, b, cost, column, opt);
}

}  // namespace pathspin::lp
