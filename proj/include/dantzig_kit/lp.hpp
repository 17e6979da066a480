#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dantzig_kit/linalg.hpp"

namespace dantzig_kit {

// Raised when the pivot cap is hit. The solver never reports a status it has
// not proven.
class SolverStalled : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LpTolerances {
  double feasibility = 1e-9;      // absolute, after row scaling
  double optimality = 1e-9;       // reduced-cost threshold
  double active_relative = 1e-7;  // active-constraint detection
  double pivot = 1e-9;            // smallest admissible pivot element
  std::size_t max_pivots = 50'000;
  std::size_t bland_after_degenerate = 1'000;
};

// minimize cᵀx  subject to  A_ub x <= b_ub,  A_eq x = b_eq,  x_j >= lower_j.
// A disengaged lower bound marks a free variable.
struct LinearProgram {
  Vector objective;
  Matrix a_ub;
  Vector b_ub;
  Matrix a_eq;
  Vector b_eq;
  std::vector<std::optional<double>> lower;

  LinearProgram() = default;

  // n variables, all bounded below by zero, no constraints.
  static LinearProgram nonnegative(Vector objective) {
    LinearProgram lp;
    lp.lower.assign(objective.size(), 0.0);
    lp.objective = std::move(objective);
    return lp;
  }

  static LinearProgram free(Vector objective) {
    LinearProgram lp;
    lp.lower.assign(objective.size(), std::nullopt);
    lp.objective = std::move(objective);
    return lp;
  }

  std::size_t num_vars() const noexcept { return objective.size(); }

  void add_le(std::span<const double> row, double rhs) {
    a_ub.append_row(row);
    b_ub.push_back(rhs);
  }
  void add_ge(std::span<const double> row, double rhs) {
    Vector neg(row.begin(), row.end());
    for (double& v : neg) v = -v;
    add_le(neg, -rhs);
  }
  void add_eq(std::span<const double> row, double rhs) {
    a_eq.append_row(row);
    b_eq.push_back(rhs);
  }

  void validate() const {
    const std::size_t n = num_vars();
    if (lower.size() != n)
      throw std::invalid_argument("LinearProgram: lower bounds size " +
                                  std::to_string(lower.size()) + " != " + std::to_string(n));
    if (a_ub.rows() != b_ub.size() || (a_ub.rows() > 0 && a_ub.cols() != n))
      throw std::invalid_argument("LinearProgram: inequality system not conformable");
    if (a_eq.rows() != b_eq.size() || (a_eq.rows() > 0 && a_eq.cols() != n))
      throw std::invalid_argument("LinearProgram: equality system not conformable");
    auto finite = [](std::span<const double> v) {
      return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    if (!finite(objective) || !finite(b_ub) || !finite(b_eq) || !a_ub.all_finite() ||
        !a_eq.all_finite())
      throw std::invalid_argument("LinearProgram: non-finite data");
    for (const auto& l : lower)
      if (l && !std::isfinite(*l)) throw std::invalid_argument("LinearProgram: non-finite bound");
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "unknown";
}

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Vector x;                  // when Optimal
  double objective_value = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::size_t> basis;  // standard-form column indices
  // Lagrange multipliers y with c = A_ubᵀy_ub + A_eqᵀy_eq + r, r >= 0 on
  // bounded variables, r = 0 on free ones, y_ub <= 0.
  Vector dual_ub;
  Vector dual_eq;
  std::size_t pivots = 0;

  bool optimal() const noexcept { return status == LpStatus::Optimal; }
};

namespace detail {

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

class Simplex {
 public:
  Simplex(const LinearProgram& lp, const LpTolerances& tol) : lp_(lp), tol_(tol) {
    lp.validate();
    build_standard_form();
  }

  LpSolution run(bool phase_one_only) {
    LpSolution out;
    phase_ = 1;
    set_costs(phase_one_costs());
    if (iterate() == IterResult::Unbounded)
      throw SolverStalled("simplex: phase one reported unbounded (numerical breakdown)");
    double infeas = 0.0;
    for (std::size_t i = 0; i < m_; ++i)
      if (is_artificial(basis_[i])) infeas += std::max(0.0, rhs_[i]);
    if (infeas > tol_.feasibility * std::max(1.0, rhs_scale_)) {
      out.status = LpStatus::Infeasible;
      out.pivots = pivots_;
      return out;
    }
    drive_out_artificials();
    if (!phase_one_only) {
      phase_ = 2;
      set_costs(phase_two_costs());
      if (iterate() == IterResult::Unbounded) {
        out.status = LpStatus::Unbounded;
        out.pivots = pivots_;
        return out;
      }
    }
    extract(out, !phase_one_only);
    return out;
  }

 private:
  enum class IterResult { Optimal, Unbounded };

  struct ColumnMap {
    std::size_t pos = npos;
    std::size_t neg = npos;
    double shift = 0.0;
  };

  bool is_artificial(std::size_t col) const noexcept { return col >= n_real_; }

  void build_standard_form() {
    const std::size_t n = lp_.num_vars();
    const std::size_t m_ub = lp_.a_ub.rows(), m_eq = lp_.a_eq.rows();
    m_ = m_ub + m_eq;

    cols_.resize(n);
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (lp_.lower[j]) {
        cols_[j] = {k++, npos, *lp_.lower[j]};
      } else {
        cols_[j] = {k, k + 1, 0.0};
        k += 2;
      }
    }
    n_struct_ = k;
    n_real_ = n_struct_ + m_ub;

    // Rows of the scaled, sign-normalized system over structural + slack
    // columns. Artificial columns are appended below.
    std::vector<Vector> rows(m_, Vector(n_real_, 0.0));
    rhs0_.assign(m_, 0.0);
    row_sign_.assign(m_, 1.0);
    row_scale_.assign(m_, 1.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const bool ub = i < m_ub;
      const auto src = ub ? lp_.a_ub.row(i) : lp_.a_eq.row(i - m_ub);
      double b = ub ? lp_.b_ub[i] : lp_.b_eq[i - m_ub];
      double amax = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double a = src[j];
        rows[i][cols_[j].pos] = a;
        if (cols_[j].neg != npos) rows[i][cols_[j].neg] = -a;
        b -= a * cols_[j].shift;
        amax = std::max(amax, std::abs(a));
      }
      const double s = amax > 0.0 ? 1.0 / amax : 1.0;
      for (std::size_t j = 0; j < n_struct_; ++j) rows[i][j] *= s;
      b *= s;
      if (ub) rows[i][n_struct_ + i] = 1.0;
      row_scale_[i] = s;
      if (b < 0.0) {
        for (double& v : rows[i]) v = -v;
        b = -b;
        row_sign_[i] = -1.0;
      }
      rhs0_[i] = b;
    }
    rhs_scale_ = rhs0_.empty() ? 0.0 : norm_inf(rhs0_);

    basis_.assign(m_, npos);
    std::size_t n_art = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i < m_ub && row_sign_[i] > 0.0)
        basis_[i] = n_struct_ + i;
      else
        basis_[i] = n_real_ + n_art++;
    }
    n_total_ = n_real_ + n_art;

    std_.assign(m_ * n_total_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      std::copy(rows[i].begin(), rows[i].end(), std_.begin() + i * n_total_);
      if (is_artificial(basis_[i])) std_[i * n_total_ + basis_[i]] = 1.0;
    }
    tab_ = std_;
    rhs_ = rhs0_;
    is_basic_.assign(n_total_, false);
    for (std::size_t b : basis_) is_basic_[b] = true;
  }

  double& t(std::size_t i, std::size_t j) noexcept { return tab_[i * n_total_ + j]; }

  Vector phase_one_costs() const {
    Vector c(n_total_, 0.0);
    for (std::size_t j = n_real_; j < n_total_; ++j) c[j] = 1.0;
    return c;
  }

  Vector phase_two_costs() const {
    Vector c(n_total_, 0.0);
    for (std::size_t j = 0; j < cols_.size(); ++j) {
      c[cols_[j].pos] = lp_.objective[j];
      if (cols_[j].neg != npos) c[cols_[j].neg] = -lp_.objective[j];
    }
    return c;
  }

  void set_costs(Vector c) {
    cost_ = std::move(c);
    reduced_ = cost_;
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost_[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < n_total_; ++j) reduced_[j] -= cb * t(i, j);
    }
    for (std::size_t b : basis_) reduced_[b] = 0.0;
  }

  bool eligible(std::size_t j) const noexcept {
    return !is_basic_[j] && !(phase_ == 2 && is_artificial(j));
  }

  IterResult iterate() {
    bool bland = false;
    std::size_t degenerate = 0;
    for (;;) {
      std::size_t enter = npos;
      double best = -tol_.optimality;
      for (std::size_t j = 0; j < n_total_; ++j) {
        if (!eligible(j)) continue;
        if (reduced_[j] < best) {
          enter = j;
          if (bland) break;
          best = reduced_[j];
        }
      }
      if (enter == npos) return IterResult::Optimal;

      std::size_t leave = npos;
      double theta = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = t(i, enter);
        if (a <= tol_.pivot) continue;
        const double ratio = std::max(rhs_[i], 0.0) / a;
        if (leave == npos || ratio < theta - 1e-12 * (1.0 + theta)) {
          leave = i;
          theta = ratio;
        } else if (ratio <= theta + 1e-12 * (1.0 + theta)) {
          const bool better = bland ? basis_[i] < basis_[leave] : a > t(leave, enter);
          if (better) {
            leave = i;
            theta = std::min(theta, ratio);
          }
        }
      }
      if (leave == npos) return IterResult::Unbounded;

      if (theta <= tol_.feasibility && ++degenerate > tol_.bland_after_degenerate) bland = true;
      pivot(leave, enter);
      if (++pivots_ > tol_.max_pivots)
        throw SolverStalled("simplex: pivot cap of " + std::to_string(tol_.max_pivots) +
                            " reached");
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    const double inv = 1.0 / t(r, c);
    for (std::size_t j = 0; j < n_total_; ++j) t(r, j) *= inv;
    rhs_[r] *= inv;
    t(r, c) = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = t(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n_total_; ++j) t(i, j) -= f * t(r, j);
      t(i, c) = 0.0;
      rhs_[i] -= f * rhs_[r];
    }
    const double f = reduced_[c];
    if (f != 0.0) {
      for (std::size_t j = 0; j < n_total_; ++j) reduced_[j] -= f * t(r, j);
      reduced_[c] = 0.0;
    }
    is_basic_[basis_[r]] = false;
    basis_[r] = c;
    is_basic_[c] = true;
  }

  // Artificials still basic after phase one sit at (numerically) zero. Swap
  // each for any real column with a usable entry in its row; rows with none
  // are redundant and keep their artificial, which then never moves.
  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (!is_artificial(basis_[i])) continue;
      std::size_t best = npos;
      double mag = tol_.pivot;
      for (std::size_t j = 0; j < n_real_; ++j) {
        if (is_basic_[j]) continue;
        if (std::abs(t(i, j)) > mag) {
          mag = std::abs(t(i, j));
          best = j;
        }
      }
      if (best == npos) continue;
      rhs_[i] = 0.0;
      pivot(i, best);
    }
  }

  void extract(LpSolution& out, bool with_duals) {
    Vector z(n_total_, 0.0);
    // Recompute the basic solution from the original scaled system; the
    // tableau values carry accumulated pivot round-off.
    Matrix b(m_, m_);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t k = 0; k < m_; ++k) b(i, k) = std_[i * n_total_ + basis_[k]];
    std::optional<LuFactorization> lu;
    if (m_ > 0) {
      lu.emplace(b);
      if (lu->singular()) lu.reset();
    }
    Vector xb = rhs_;
    if (lu) {
      Vector fresh = lu->solve(rhs0_);
      const double floor = -1e3 * tol_.feasibility * std::max(1.0, rhs_scale_);
      if (std::all_of(fresh.begin(), fresh.end(), [floor](double v) { return v >= floor; }))
        xb = std::move(fresh);
    }
    for (std::size_t i = 0; i < m_; ++i) z[basis_[i]] = std::max(0.0, xb[i]);

    const std::size_t n = lp_.num_vars();
    out.x.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      out.x[j] = cols_[j].shift + z[cols_[j].pos];
      if (cols_[j].neg != npos) out.x[j] -= z[cols_[j].neg];
    }
    out.objective_value = dot(lp_.objective, out.x);
    out.status = LpStatus::Optimal;
    out.basis = basis_;
    out.pivots = pivots_;

    const std::size_t m_ub = lp_.a_ub.rows();
    out.dual_ub.assign(m_ub, 0.0);
    out.dual_eq.assign(m_ - m_ub, 0.0);
    if (with_duals && lu) {
      Vector cb(m_);
      for (std::size_t i = 0; i < m_; ++i) cb[i] = cost_[basis_[i]];
      const Vector y = lu->solve_transposed(cb);
      for (std::size_t i = 0; i < m_; ++i) {
        const double yi = y[i] * row_sign_[i] * row_scale_[i];
        if (i < m_ub)
          out.dual_ub[i] = yi;
        else
          out.dual_eq[i - m_ub] = yi;
      }
    }
  }

  const LinearProgram& lp_;
  LpTolerances tol_;
  std::vector<ColumnMap> cols_;
  std::size_t m_ = 0, n_struct_ = 0, n_real_ = 0, n_total_ = 0;
  std::vector<double> std_, tab_;
  Vector rhs0_, rhs_, row_sign_, row_scale_, cost_, reduced_;
  double rhs_scale_ = 0.0;
  std::vector<std::size_t> basis_;
  std::vector<bool> is_basic_;
  std::size_t pivots_ = 0;
  int phase_ = 1;
};

}  // namespace detail

inline LpSolution solve(const LinearProgram& lp, const LpTolerances& tol = {}) {
  return detail::Simplex(lp, tol).run(false);
}

struct FeasibilityResult {
  bool feasible = false;
  std::optional<Vector> witness;
};

// Phase one only.
inline FeasibilityResult feasible(const LinearProgram& lp, const LpTolerances& tol = {}) {
  LpSolution s = detail::Simplex(lp, tol).run(true);
  if (s.status != LpStatus::Optimal) return {};
  return {true, std::move(s.x)};
}

// Largest violation of the constraints of lp at x, each row measured after
// scaling by its largest coefficient.
inline double max_scaled_violation(const LinearProgram& lp, std::span<const double> x) {
  double worst = 0.0;
  auto row_check = [&](std::span<const double> row, double rhs, bool equality) {
    const double s = norm_inf(row);
    double r = dot(row, x) - rhs;
    if (s > 0.0) r /= s;
    worst = std::max(worst, equality ? std::abs(r) : r);
  };
  for (std::size_t i = 0; i < lp.a_ub.rows(); ++i) row_check(lp.a_ub.row(i), lp.b_ub[i], false);
  for (std::size_t i = 0; i < lp.a_eq.rows(); ++i) row_check(lp.a_eq.row(i), lp.b_eq[i], true);
  for (std::size_t j = 0; j < lp.num_vars(); ++j)
    if (lp.lower[j]) worst = std::max(worst, *lp.lower[j] - x[j]);
  return worst;
}

struct Range {
  double min = 0.0;
  double max = 0.0;
  double width() const noexcept { return max - min; }
};

inline constexpr double kOptimalFaceSlack = 1e-9;

// min and max of dᵀx over {feasible x : cᵀx <= t0 + slack}, where t0 is the
// optimal value of lp. Unbounded directions report ±infinity.
inline Range objective_range_on_optimal_face(const LinearProgram& lp,
                                             std::span<const double> direction,
                                             const LpTolerances& tol = {}) {
  if (direction.size() != lp.num_vars())
    throw std::invalid_argument("objective_range_on_optimal_face: direction size mismatch");
  const LpSolution base = solve(lp, tol);
  if (!base.optimal())
    throw std::invalid_argument(std::string("objective_range_on_optimal_face: LP is ") +
                                to_string(base.status));
  LinearProgram face = lp;
  face.add_le(lp.objective, base.objective_value + kOptimalFaceSlack);

  Range r;
  face.objective.assign(direction.begin(), direction.end());
  const LpSolution lo = solve(face, tol);
  r.min = lo.optimal() ? lo.objective_value : -std::numeric_limits<double>::infinity();
  for (double& v : face.objective) v = -v;
  const LpSolution hi = solve(face, tol);
  r.max = hi.optimal() ? -hi.objective_value : std::numeric_limits<double>::infinity();
  if (lo.status == LpStatus::Infeasible || hi.status == LpStatus::Infeasible)
    throw SolverStalled("objective_range_on_optimal_face: optimal face lost feasibility");
  return r;
}

inline Range coordinate_range_on_optimal_face(const LinearProgram& lp, std::size_t coord,
                                              const LpTolerances& tol = {}) {
  if (coord >= lp.num_vars())
    throw std::invalid_argument("coordinate_range_on_optimal_face: coordinate out of range");
  Vector e(lp.num_vars(), 0.0);
  e[coord] = 1.0;
  return objective_range_on_optimal_face(lp, e, tol);
}

}  // namespace dantzig_kit
