#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "dantzig_kit/dantzig.hpp"
#include "dantzig_kit/lp.hpp"

namespace dantzig_kit {

struct CoordinateSlack {
  double beta = 0.0;
  double residual_corr = 0.0;  // n⁻¹X_jᵀ(y − Xβ)
  double dual_corr = 0.0;      // n⁻¹X_jᵀXμ̂
  bool active = false;         // |residual_corr| = lambda within tolerance
};

// Optimality certificate for the Dantzig selector: a dual vector μ̂ with
//   (a) n⁻¹||Xᵀ(y − Xβ)||_∞ <= λ
//   (b) n⁻¹||XᵀXμ̂||_∞ <= 1
//   (c) n⁻¹μ̂ᵀXᵀXβ = ||β||₁
//   (d) n⁻¹μ̂ᵀXᵀ(y − Xβ) = λ||μ̂||₁
struct KktCertificate {
  bool found = false;
  Vector mu_hat;
  IndexSet active_set;
  std::vector<CoordinateSlack> slacks;
  // Set when (a) fails: the coordinate with the largest violation.
  std::optional<std::size_t> primal_violation;
  double primal_residual = 0.0;  // left side of (a)
  double dual_norm = 0.0;        // left side of (b)
  double gap_c = 0.0;            // (c) left minus right
  double gap_d = 0.0;            // (d) left minus right
};

// (c) and (d) are bilinear in (β, μ). Given (a) and (b), Hölder bounds each
// left side by its right side, and equality holds coordinatewise exactly
// when
//   (Cμ)_j = sign(β_j)            for β_j ≠ 0,
//   μ_j = 0                       for inactive j (|r_j| < λ),
//   μ_j · sign(r_j) >= 0          for active j,
// so the search for μ̂ is one LP feasibility problem. Borderline coordinates
// are classed as active, which cannot turn an optimal β into a rejection.
inline KktCertificate dantzig_certificate(const DantzigProblem& prob, std::span<const double> beta,
                                          double tol = 1e-7) {
  prob.validate();
  const std::size_t p = prob.p();
  if (beta.size() != p) throw std::invalid_argument("dantzig_certificate: beta size mismatch");
  const double lambda = prob.lambda;

  KktCertificate cert;
  const Vector cb = prob.c * beta;
  Vector r(p);
  for (std::size_t j = 0; j < p; ++j) r[j] = prob.v[j] - cb[j];
  cert.primal_residual = norm_inf(r);
  cert.slacks.resize(p);

  const double active_band = tol * std::max(1.0, lambda);
  const double beta_zero = 1e-10 * std::max(1.0, norm_inf(beta));
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < p; ++j) {
    cert.slacks[j].beta = beta[j];
    cert.slacks[j].residual_corr = r[j];
    cert.slacks[j].active = std::abs(r[j]) >= lambda - active_band;
    if (cert.slacks[j].active) active.push_back(j);
  }
  cert.active_set = IndexSet(active, p);

  if (cert.primal_residual > lambda + tol) {
    std::size_t worst = 0;
    for (std::size_t j = 1; j < p; ++j)
      if (std::abs(r[j]) > std::abs(r[worst])) worst = j;
    cert.primal_violation = worst;
    return cert;
  }

  LinearProgram lp = LinearProgram::free(Vector(p, 0.0));
  Vector e(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    const auto row = prob.c.row(j);
    if (std::abs(beta[j]) > beta_zero) {
      lp.add_eq(row, beta[j] > 0.0 ? 1.0 : -1.0);
    } else {
      lp.add_le(row, 1.0);
      lp.add_ge(row, -1.0);
    }
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    if (!cert.slacks[j].active) {
      lp.add_eq(e, 0.0);
    } else if (lambda > 0.0) {
      if (r[j] > 0.0)
        lp.add_ge(e, 0.0);
      else
        lp.add_le(e, 0.0);
    }
  }
  const FeasibilityResult f = feasible(lp);
  if (!f.feasible) return cert;

  cert.mu_hat = *f.witness;
  const Vector cmu = prob.c * cert.mu_hat;
  for (std::size_t j = 0; j < p; ++j) cert.slacks[j].dual_corr = cmu[j];
  cert.dual_norm = norm_inf(cmu);
  cert.gap_c = dot(cmu, beta) - norm1(beta);
  cert.gap_d = dot(cert.mu_hat, r) - lambda * norm1(cert.mu_hat);
  cert.found = cert.dual_norm <= 1.0 + tol &&
               std::abs(cert.gap_c) <= tol * std::max(1.0, norm1(beta)) &&
               std::abs(cert.gap_d) <= tol * std::max(1.0, lambda * norm1(cert.mu_hat));
  return cert;
}

inline KktCertificate dantzig_certificate(const DesignData& data, double lambda,
                                          std::span<const double> beta, double tol = 1e-7) {
  return dantzig_certificate(DantzigProblem::from_data(data, lambda), beta, tol);
}

}  // namespace dantzig_kit
