#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dantzig_kit/dantzig.hpp"
#include "dantzig_kit/linalg.hpp"

namespace dantzig_kit {

struct LassoEstimate {
  Vector beta_hat;
  double objective = 0.0;
  double kkt_residual = 0.0;  // largest violation of the stationarity conditions
  std::size_t sweeps = 0;
};

class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(const std::string& what, LassoEstimate best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const LassoEstimate& best_iterate() const noexcept { return best_; }

 private:
  LassoEstimate best_;
};

struct LassoOptions {
  std::size_t max_sweeps = 100'000;
  double tol = 1e-10;  // on the largest coordinate change in a sweep
  double kkt_tol = 1e-6;
  std::optional<Vector> warm_start;
  std::function<void(std::size_t sweep, double objective)> on_sweep;
};

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

// (2n)⁻¹||y − Xβ||² + λ||β||₁
inline double lasso_objective(const DesignData& data, double lambda, std::span<const double> beta) {
  const Vector fit = data.x * beta;
  double rss = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) rss += (data.y[i] - fit[i]) * (data.y[i] - fit[i]);
  return rss / (2.0 * static_cast<double>(data.n())) + lambda * norm1(beta);
}

struct KktCheck {
  bool ok = false;
  double max_violation = 0.0;
};

// Lasso stationarity: n⁻¹X_jᵀ(y − Xβ) = λ·sign(β_j) where β_j ≠ 0, and
// |n⁻¹X_jᵀ(y − Xβ)| <= λ where β_j = 0.
inline KktCheck lasso_kkt_check(const DesignData& data, double lambda,
                                std::span<const double> beta, double tol) {
  data.validate();
  if (beta.size() != data.p()) throw std::invalid_argument("lasso_kkt_check: beta size mismatch");
  if (lambda < 0.0) throw std::invalid_argument("lasso_kkt_check: lambda must be >= 0");
  const Vector fit = data.x * beta;
  const Vector resid = subtract(data.y, fit);
  const Vector corr = scaled(transpose_times(data.x, resid), 1.0 / static_cast<double>(data.n()));
  double worst = 0.0;
  for (std::size_t j = 0; j < data.p(); ++j) {
    const double v = beta[j] != 0.0 ? std::abs(corr[j] - std::copysign(lambda, beta[j]))
                                    : std::max(0.0, std::abs(corr[j]) - lambda);
    worst = std::max(worst, v);
  }
  return {worst <= tol, worst};
}

// Cyclic coordinate descent with exact univariate soft-threshold updates.
inline LassoEstimate lasso_solve(const DesignData& data, double lambda, const LassoOptions& opt) {
  data.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("lasso_solve: lambda must be finite and >= 0");
  const std::size_t n = data.n(), p = data.p();
  if (lambda == 0.0 && rank(data.x) < p)
    throw std::invalid_argument(
        "lasso_solve: lambda = 0 with rank-deficient X has no unique solution");

  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<Vector> cols(p);
  Vector sq(p);
  for (std::size_t j = 0; j < p; ++j) {
    cols[j] = data.x.column(j);
    sq[j] = dot(cols[j], cols[j]) * inv_n;
  }

  Vector beta(p, 0.0);
  if (opt.warm_start) {
    if (opt.warm_start->size() != p) throw std::invalid_argument("lasso_solve: warm start size");
    beta = *opt.warm_start;
  }
  Vector resid = subtract(data.y, data.x * beta);

  LassoEstimate best{beta, lasso_objective(data, lambda, beta), 0.0, 0};
  for (std::size_t sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    double max_step = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double old = beta[j];
      double updated = 0.0;
      if (sq[j] > 0.0) {
        const double z = dot(cols[j], resid) * inv_n + sq[j] * old;
        updated = soft_threshold(z, lambda) / sq[j];
      }
      const double delta = updated - old;
      if (delta != 0.0) {
        for (std::size_t i = 0; i < n; ++i) resid[i] -= cols[j][i] * delta;
        beta[j] = updated;
        max_step = std::max(max_step, std::abs(delta));
      }
    }
    const double obj = lasso_objective(data, lambda, beta);
    if (opt.on_sweep) opt.on_sweep(sweep, obj);
    if (obj <= best.objective) {
      best.beta_hat = beta;
      best.objective = obj;
      best.sweeps = sweep;
    }
    if (max_step < opt.tol) {
      const KktCheck k = lasso_kkt_check(data, lambda, beta, opt.kkt_tol);
      if (k.ok) return {beta, obj, k.max_violation, sweep};
    }
  }
  best.kkt_residual = lasso_kkt_check(data, lambda, best.beta_hat, opt.kkt_tol).max_violation;
  throw ConvergenceFailure("lasso_solve: no convergence after " + std::to_string(opt.max_sweeps) +
                               " sweeps",
                           std::move(best));
}

inline LassoEstimate lasso_solve(const DesignData& data, double lambda, std::size_t max_sweeps,
                                 double tol) {
  LassoOptions opt;
  opt.max_sweeps = max_sweeps;
  opt.tol = tol;
  return lasso_solve(data, lambda, opt);
}

}  // namespace dantzig_kit
