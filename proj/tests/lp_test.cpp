#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "pathspin/lp.hpp"

using namespace pathspin;

namespace {

double value_of(const lp::Solution& s, std::size_t col) {
  for (const auto& [j, v] : s.support)
    if (j == col) return v;
  return 0.0;
}

}  // namespace

// max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6).
TEST(Simplex, TextbookOptimum) {
  const std::vector<std::vector<double>> a{{1, 0, 1, 0, 0}, {0, 2, 0, 1, 0}, {3, 2, 0, 0, 1}};
  const std::vector<double> b{4, 12, 18};
  const std::vector<double> c{-3, -5, 0, 0, 0};
  const auto s = lp::solve_dense(a, b, c);
  ASSERT_EQ(s.status, lp::Status::optimal);
  EXPECT_NEAR(s.objective, -36.0, 1e-12);
  EXPECT_NEAR(value_of(s, 0), 2.0, 1e-12);
  EXPECT_NEAR(value_of(s, 1), 6.0, 1e-12);
}

// Beale's example cycles under the textbook largest-coefficient rule.
TEST(Simplex, BealeExampleTerminatesUnderBland) {
  const std::vector<std::vector<double>> a{
      {1, 0, 0, 0.25, -8, -1, 9}, {0, 1, 0, 0.5, -12, -0.5, 3}, {0, 0, 1, 0, 0, 1, 0}};
  const std::vector<double> b{0, 0, 1};
  const std::vector<double> c{0, 0, 0, -0.75, 20, -0.5, 6};
  const auto s = lp::solve_dense(a, b, c);
  ASSERT_EQ(s.status, lp::Status::optimal);
  EXPECT_NEAR(s.objective, -1.25, 1e-12);
}

TEST(Simplex, NegativeRhsRowsAreHandled) {
  // -x - y = -3, x - y = 1  ->  x = 2, y = 1.
  const std::vector<std::vector<double>> a{{-1, -1}, {1, -1}};
  const std::vector<double> b{-3, 1};
  const auto s = lp::solve_dense(a, b, {});
  ASSERT_EQ(s.status, lp::Status::optimal);
  EXPECT_NEAR(value_of(s, 0), 2.0, 1e-12);
  EXPECT_NEAR(value_of(s, 1), 1.0, 1e-12);
}

TEST(Simplex, InfeasibleWithFarkasCertificate) {
  const std::vector<std::vector<double>> a{{1, 1}, {1, 1}};
  const std::vector<double> b{1, 2};
  const auto s = lp::solve_dense(a, b, {});
  ASSERT_EQ(s.status, lp::Status::infeasible);
  EXPECT_GT(s.phase1_objective, 0.5);
  ASSERT_EQ(s.farkas.size(), 2u);
  for (std::size_t j = 0; j < 2; ++j) EXPECT_LE(s.farkas[0] * a[0][j] + s.farkas[1] * a[1][j], 1e-12);
  EXPECT_GT(s.farkas[0] * b[0] + s.farkas[1] * b[1], 0.0);
}

TEST(Simplex, Unbounded) {
  // x - y = 0, minimize -x.
  const std::vector<std::vector<double>> a{{1, -1}};
  const std::vector<double> b{0};
  const std::vector<double> c{-1, 0};
  EXPECT_EQ(lp::solve_dense(a, b, c).status, lp::Status::unbounded);
}

TEST(Simplex, RedundantRowsKeepSolutionValid) {
  const std::vector<std::vector<double>> a{{1, 1, 0}, {2, 2, 0}, {0, 1, 1}};
  const std::vector<double> b{1, 2, 1};
  const auto s = lp::solve_dense(a, b, {});
  ASSERT_EQ(s.status, lp::Status::optimal);
  const double x = value_of(s, 0), y = value_of(s, 1), z = value_of(s, 2);
  EXPECT_NEAR(x + y, 1.0, 1e-12);
  EXPECT_NEAR(y + z, 1.0, 1e-12);
}

TEST(Simplex, IterationCapRaisesStall) {
  const std::vector<std::vector<double>> a{{1, 0, 1, 0, 0}, {0, 2, 0, 1, 0}, {3, 2, 0, 0, 1}};
  const std::vector<double> b{4, 12, 18};
  const std::vector<double> c{-3, -5, 0, 0, 0};
  lp::Options opt;
  opt.max_iterations = 1;
  EXPECT_THROW(lp::solve_dense(a, b, c, opt), SolverStall);
}

TEST(Simplex, RandomFeasibleSystemsAreSolved) {
  // b = A x0 with x0 >= 0 is always feasible; returned x must satisfy A x = b.
  std::mt19937_64 g(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t rows = 3 + trial % 5, cols = rows + 4 + trial % 7;
    std::vector<std::vector<double>> a(rows, std::vector<double>(cols));
    for (auto& r : a)
      for (auto& v : r) v = u(g);
    std::vector<double> x0(cols);
    for (auto& v : x0) v = std::max(0.0, u(g));
    std::vector<double> b(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) b[i] += a[i][j] * x0[j];
    const auto s = lp::solve_dense(a, b, {});
    ASSERT_EQ(s.status, lp::Status::optimal);
    for (std::size_t i = 0; i < rows; ++i) {
      double lhs = 0.0;
      for (const auto& [j, v] : s.support) {
        EXPECT_GE(v, 0.0);
        lhs += a[i][j] * v;
      }
      EXPECT_NEAR(lhs, b[i], 1e-9);
    }
  }
}
