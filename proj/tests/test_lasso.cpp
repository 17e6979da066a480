#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dantzig_kit/lasso.hpp"
#include "oracles.hpp"

using namespace dantzig_kit;

namespace {

DesignData random_design(std::size_t n, std::size_t p, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  DesignData d{standard_normal_matrix(n, p, rng), Vector(n)};
  for (double& v : d.y) v = z(rng);
  return d;
}

double lambda_max(const DesignData& d) {
  return norm_inf(transpose_times(d.x, d.y)) / static_cast<double>(d.n());
}

}  // namespace

TEST(LassoSolve, OrthonormalizedDesignSoftThreshold) {
  const double r2 = std::sqrt(2.0);
  const DesignData d{r2 * Matrix::identity(2), {3.0 * r2, 0.5 * r2}};
  const LassoEstimate e = lasso_solve(d, 1.0, 1000, 1e-12);
  EXPECT_NEAR(e.beta_hat[0], 2.0, 1e-10);
  EXPECT_EQ(e.beta_hat[1], 0.0);
  EXPECT_LE(e.kkt_residual, 1e-6);
  EXPECT_TRUE(lasso_kkt_check(d, 1.0, e.beta_hat, 1e-9).ok);
}

TEST(LassoSolve, LargeLambdaGivesZero) {
  std::mt19937_64 rng(41);
  const DesignData d = random_design(8, 3, rng);
  const LassoEstimate e = lasso_solve(d, lambda_max(d) * 1.001, 1000, 1e-12);
  EXPECT_EQ(norm_inf(e.beta_hat), 0.0);
  EXPECT_TRUE(lasso_kkt_check(d, lambda_max(d), Vector(3, 0.0), 1e-12).ok);
}

TEST(LassoSolve, LambdaZeroIsOls) {
  const DesignData d{Matrix{{2, 1}, {1, 3}}, {1.0, -1.0}};
  const LassoEstimate e = lasso_solve(d, 0.0, 100000, 1e-13);
  EXPECT_LE(max_abs_diff(e.beta_hat, solve_linear(d.x, d.y)), 1e-8);
}

TEST(LassoSolve, LambdaZeroRankDeficientRejected) {
  const DesignData d{Matrix{{1, 1}, {2, 2}, {0, 0}}, {1.0, 2.0, 3.0}};
  EXPECT_THROW(lasso_solve(d, 0.0, 100, 1e-10), std::invalid_argument);
  EXPECT_THROW(lasso_solve(d, -1.0, 100, 1e-10), std::invalid_argument);
}

TEST(LassoKkt, OlsFailsWhenLambdaLarge) {
  const DesignData d{Matrix{{2, 1}, {1, 3}}, {1.0, -1.0}};
  const Vector ols = solve_linear(d.x, d.y);
  const KktCheck k = lasso_kkt_check(d, 5.0, ols, 1e-6);
  EXPECT_FALSE(k.ok);
  EXPECT_NEAR(k.max_violation, 5.0, 1e-9);
}

TEST(LassoSolve, AlwaysPassesKktAndObjectiveDecreases) {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 40; ++t) {
    const std::size_t p = 1 + rng() % 6, n = 2 + rng() % 15;
    DesignData d = random_design(n, p, rng);
    if (t % 5 == 0 && p > 1)  // duplicated column
      for (std::size_t i = 0; i < n; ++i) d.x(i, p - 1) = d.x(i, 0);
    for (double frac : {0.05, 0.3, 0.7}) {
      const double lambda = frac * lambda_max(d);
      LassoOptions opt;
      double last = std::numeric_limits<double>::infinity();
      opt.on_sweep = [&](std::size_t, double obj) {
        EXPECT_LE(obj, last + 1e-12 * std::max(1.0, std::abs(last)));
        last = obj;
      };
      const LassoEstimate e = lasso_solve(d, lambda, opt);
      EXPECT_TRUE(lasso_kkt_check(d, lambda, e.beta_hat, 1e-6).ok);
      EXPECT_NEAR(e.objective, lasso_objective(d, lambda, e.beta_hat), 1e-14);
    }
  }
}

TEST(LassoSolve, OneDimensionalGoldenSection) {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 30; ++t) {
    const DesignData d = random_design(3 + rng() % 10, 1, rng);
    const double lambda = (t % 3) * 0.4 * lambda_max(d);
    const LassoEstimate e = lasso_solve(d, lambda, 1000, 1e-13);
    const double bound = 10.0 * (1.0 + std::abs(e.beta_hat[0]));
    const double ref = oracle::golden_section(
        [&](double b) { return lasso_objective(d, lambda, Vector{b}); }, -bound, bound);
    EXPECT_NEAR(e.beta_hat[0], ref, 1e-6);
  }
}

TEST(LassoSolve, ConvergenceFailureCarriesBestIterate) {
  std::mt19937_64 rng(44);
  DesignData d = random_design(10, 4, rng);
  for (std::size_t i = 0; i < 10; ++i) d.x(i, 1) = d.x(i, 0) + 1e-3 * d.x(i, 1);
  try {
    lasso_solve(d, 0.01 * lambda_max(d), 2, 1e-14);
    FAIL() << "expected ConvergenceFailure";
  } catch (const ConvergenceFailure& e) {
    EXPECT_EQ(e.best_iterate().beta_hat.size(), 4u);
    EXPECT_GT(e.best_iterate().sweeps, 0u);
    EXPECT_GT(e.best_iterate().kkt_residual, 0.0);
  }
}
