#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dantzig_kit/dantzig.hpp"
#include "dantzig_kit/linalg.hpp"
#include "dantzig_kit/lp.hpp"
#include "dantzig_kit/parallel.hpp"
#include "dantzig_kit/random.hpp"

namespace dantzig_kit {

// Subset enumeration is exponential in p; calls above the cap are refused
// rather than sampled.
class CapExceeded : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidInstance : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Subsets A, B (nonempty), w ∈ ℝ^|B| and s ∈ {±1}^|A| with
// ||C_B w||_∞ <= 1, C_{A,B} w = s and a nontrivial null space of C_{B,A}.
struct ParallelismWitness {
  IndexSet a;
  IndexSet b;
  Vector w;
  std::vector<int> s;
};

struct ParallelismReport {
  bool parallel = false;
  std::vector<ParallelismWitness> witnesses;
  std::size_t pairs_examined = 0;
  bool p_cap_respected = true;
};

struct ParallelismOptions {
  double tol = 1e-8;
  std::size_t p_cap = 10;
  std::size_t max_witnesses = 16;
  unsigned jobs = 1;
};

// Re-checks a witness with plain arithmetic.
inline bool verify_witness(const Matrix& c, const ParallelismWitness& wit, double tol = 1e-8) {
  if (wit.a.empty() || wit.b.empty() || wit.w.size() != wit.b.size() ||
      wit.s.size() != wit.a.size())
    return false;
  const std::size_t p = c.rows();
  for (std::size_t i = 0; i < p; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < wit.b.size(); ++k) s += c(i, wit.b[k]) * wit.w[k];
    if (std::abs(s) > 1.0 + tol) return false;
  }
  for (std::size_t r = 0; r < wit.a.size(); ++r) {
    double s = 0.0;
    for (std::size_t k = 0; k < wit.b.size(); ++k) s += c(wit.a[r], wit.b[k]) * wit.w[k];
    if (std::abs(s - wit.s[r]) > tol) return false;
  }
  return null_space_dim(submatrix(c, wit.b, wit.a)) > 0;
}

namespace detail {

struct SubsetPair {
  unsigned long long a = 0;
  unsigned long long b = 0;
};

inline void check_parallel_input(const Matrix& c, const ParallelismOptions& opt) {
  if (!c.is_square() || c.rows() == 0)
    throw std::invalid_argument("parallelism: C must be a nonempty square matrix");
  if (!is_symmetric(c, 1e-10)) throw std::invalid_argument("parallelism: C must be symmetric");
  if (c.rows() > opt.p_cap)
    throw CapExceeded("parallelism: p = " + std::to_string(c.rows()) + " exceeds p_cap = " +
                      std::to_string(opt.p_cap));
  if (c.rows() >= 63) throw CapExceeded("parallelism: p too large for subset masks");
}

// All witnesses for one (A, B): one LP feasibility problem per sign pattern,
// with s and −s identified by fixing s_0 = +1.
inline std::vector<ParallelismWitness> examine_pair(const Matrix& c, const IndexSet& a,
                                                    const IndexSet& b, double tol) {
  std::vector<ParallelismWitness> found;
  // |A| > |B| forces a nontrivial null space of the |B|×|A| block.
  if (a.size() <= b.size() && null_space_dim(submatrix(c, b, a)) == 0) return found;

  const Matrix cab = submatrix(c, a, b);
  const Matrix cb = submatrix(c, all_indices, b);
  // Exact prefilter: min_w ||C_{A,B}w − s||_∞ >= ||(I − P)s||₂ / √|A| with P
  // the projector onto range(C_{A,B}); patterns far from the range skip the LP.
  const Matrix proj = cab * pseudoinverse(cab);
  const double root_a = std::sqrt(static_cast<double>(a.size()));

  const std::size_t patterns = std::size_t{1} << (a.size() - 1);
  Vector s(a.size());
  for (std::size_t code = 0; code < patterns; ++code) {
    s[0] = 1.0;
    for (std::size_t k = 1; k < a.size(); ++k) s[k] = (code >> (k - 1)) & 1U ? -1.0 : 1.0;
    const Vector ps = proj * s;
    if (norm2(subtract(s, ps)) / root_a > 10.0 * tol) continue;

    LinearProgram lp = LinearProgram::free(Vector(b.size(), 0.0));
    for (std::size_t i = 0; i < cb.rows(); ++i) {
      lp.add_le(cb.row(i), 1.0);
      lp.add_ge(cb.row(i), -1.0);
    }
    const double band = 0.5 * tol;
    for (std::size_t r = 0; r < a.size(); ++r) {
      lp.add_le(cab.row(r), s[r] + band);
      lp.add_ge(cab.row(r), s[r] - band);
    }
    const FeasibilityResult f = feasible(lp);
    if (!f.feasible) continue;
    ParallelismWitness wit{a, b, *f.witness, {}};
    for (double v : s) wit.s.push_back(v > 0.0 ? 1 : -1);
    if (verify_witness(c, wit, tol)) found.push_back(std::move(wit));
  }
  return found;
}

inline ParallelismReport enumerate_pairs(const Matrix& c, std::vector<SubsetPair> pairs,
                                         const ParallelismOptions& opt) {
  const std::size_t p = c.rows();
  std::sort(pairs.begin(), pairs.end(), [p](const SubsetPair& x, const SubsetPair& y) {
    const int lx = std::popcount(x.a) + std::popcount(x.b);
    const int ly = std::popcount(y.a) + std::popcount(y.b);
    if (lx != ly) return lx < ly;
    const IndexSet xa = IndexSet::from_mask(x.a, p), ya = IndexSet::from_mask(y.a, p);
    if (xa != ya) return xa < ya;
    return IndexSet::from_mask(x.b, p) < IndexSet::from_mask(y.b, p);
  });

  ParallelismReport report;
  std::size_t start = 0;
  while (start < pairs.size()) {
    // One level (fixed |A| + |B|) at a time, so the stopping point and the
    // reported witnesses do not depend on the number of workers.
    const int level = std::popcount(pairs[start].a) + std::popcount(pairs[start].b);
    std::size_t end = start;
    while (end < pairs.size() &&
           std::popcount(pairs[end].a) + std::popcount(pairs[end].b) == level)
      ++end;
    std::vector<std::vector<ParallelismWitness>> slots(end - start);
    parallel_for(end - start, opt.jobs, [&](std::size_t k) {
      const SubsetPair& pr = pairs[start + k];
      slots[k] = examine_pair(c, IndexSet::from_mask(pr.a, p), IndexSet::from_mask(pr.b, p),
                              opt.tol);
    });
    report.pairs_examined += end - start;
    for (auto& slot : slots)
      for (auto& w : slot)
        if (report.witnesses.size() < opt.max_witnesses) report.witnesses.push_back(std::move(w));
    if (report.witnesses.size() >= opt.max_witnesses) break;
    start = end;
  }
  report.parallel = !report.witnesses.empty();
  return report;
}

}  // namespace detail

// Decides whether the symmetric matrix C is parallel to the ℓ¹-ball by
// enumerating every pair of nonempty subsets A, B.
inline ParallelismReport is_parallel(const Matrix& c, const ParallelismOptions& opt = {}) {
  detail::check_parallel_input(c, opt);
  const std::size_t p = c.rows();
  const unsigned long long full = (1ULL << p) - 1;
  std::vector<detail::SubsetPair> pairs;
  pairs.reserve(full * full);
  for (unsigned long long a = 1; a <= full; ++a)
    for (unsigned long long b = 1; b <= full; ++b) pairs.push_back({a, b});
  return detail::enumerate_pairs(c, std::move(pairs), opt);
}

// The necessary condition for multiple lasso solutions: parallelism with B
// fixed to {1, ..., p}.
inline ParallelismReport lasso_parallelism_check(const Matrix& c,
                                                 const ParallelismOptions& opt = {}) {
  detail::check_parallel_input(c, opt);
  const std::size_t p = c.rows();
  const unsigned long long full = (1ULL << p) - 1;
  std::vector<detail::SubsetPair> pairs;
  for (unsigned long long a = 1; a <= full; ++a) pairs.push_back({a, full});
  return detail::enumerate_pairs(c, std::move(pairs), opt);
}

// ---------------------------------------------------------------------------
// Random designs

using DesignGenerator = std::function<Matrix(std::size_t n, std::size_t p, std::mt19937_64&)>;

inline Matrix standard_normal_design(std::size_t n, std::size_t p, std::mt19937_64& rng) {
  return standard_normal_matrix(n, p, rng);
}

// Continuous rows except that the last column repeats the first. Violates the
// continuity hypothesis on purpose.
inline Matrix duplicated_column_design(std::size_t n, std::size_t p, std::mt19937_64& rng) {
  Matrix x = standard_normal_matrix(n, p, rng);
  if (p >= 2)
    for (std::size_t i = 0; i < n; ++i) x(i, p - 1) = x(i, 0);
  return x;
}

struct Prop2Result {
  double fraction_parallel = 0.0;
  std::size_t parallel_count = 0;
  std::size_t reps = 0;
};

// Fraction of random designs whose n⁻¹XᵀX is parallel to the ℓ¹-ball.
inline Prop2Result prop2_experiment(std::size_t n, std::size_t p, std::size_t reps,
                                    std::uint64_t seed,
                                    const DesignGenerator& gen = standard_normal_design,
                                    const ParallelismOptions& opt = {}) {
  if (n == 0 || p == 0 || reps == 0)
    throw std::invalid_argument("prop2_experiment: n, p and reps must be positive");
  if (p > opt.p_cap)
    throw CapExceeded("prop2_experiment: p = " + std::to_string(p) + " exceeds p_cap");
  std::vector<char> hit(reps, 0);
  ParallelismOptions inner = opt;
  inner.jobs = 1;
  inner.max_witnesses = 1;
  parallel_for(reps, opt.jobs, [&](std::size_t r) {
    auto rng = replicate_stream(seed, n, r, 0x70);
    const Matrix x = gen(n, p, rng);
    hit[r] = is_parallel(scaled_gram(x), inner).parallel ? 1 : 0;
  });
  Prop2Result out;
  out.reps = reps;
  out.parallel_count = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
  out.fraction_parallel = static_cast<double>(out.parallel_count) / static_cast<double>(reps);
  return out;
}

// ---------------------------------------------------------------------------
// Sufficient condition for multiple Dantzig solutions

struct MultInstance {
  DesignData data;
  double lambda = 0.0;
  Vector beta0;
  Vector mu0;  // length |B|
  IndexSet a;
  IndexSet b;
};

struct MultVerdict {
  bool holds = false;
  std::array<bool, 4> conditions{};
  double min_linear_over_f = 0.0;  // min over F of n⁻¹βᵀXᵀX_Bμ⁰
};

inline MultVerdict verify_mult(const MultInstance& inst, double tol = 1e-7) {
  inst.data.validate();
  const std::size_t p = inst.data.p();
  if (inst.beta0.size() != p || inst.a.universe() != p || inst.b.universe() != p ||
      inst.mu0.size() != inst.b.size())
    throw std::invalid_argument("verify_mult: shapes not conformable");
  if (inst.a.empty() || inst.b.empty())
    throw InvalidInstance("verify_mult: A and B must be nonempty (degenerate instance)");

  const DantzigProblem prob = DantzigProblem::from_data(inst.data, inst.lambda);
  const Matrix& c = prob.c;
  const double scale = std::max(1.0, inst.lambda);

  // g = C_{·,B} μ⁰
  Vector g(p, 0.0);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = 0; k < inst.b.size(); ++k) g[i] += c(i, inst.b[k]) * inst.mu0[k];

  MultVerdict v;
  {
    bool ok = norm_inf(g) <= 1.0 + tol;
    for (std::size_t i : inst.a) ok = ok && std::abs(std::abs(g[i]) - 1.0) <= tol;
    ok = ok && null_space_dim(submatrix(c, inst.b, inst.a)) > 0;
    v.conditions[0] = ok;
  }
  {
    LinearProgram lp = split_lp(prob);
    // Same feasible set over free β: rows act on (β⁺, β⁻); reuse directly.
    Vector obj(2 * p);
    for (std::size_t j = 0; j < p; ++j) {
      obj[j] = g[j];
      obj[p + j] = -g[j];
    }
    lp.objective = obj;
    const LpSolution s = solve(lp);
    if (s.status == LpStatus::Infeasible)
      throw InvalidInstance("verify_mult: feasible set F is empty");
    if (s.status == LpStatus::Unbounded) {
      v.min_linear_over_f = -std::numeric_limits<double>::infinity();
      v.conditions[1] = false;
    } else {
      v.min_linear_over_f = s.objective_value;
      v.conditions[1] = s.objective_value >= norm1(inst.beta0) - tol * std::max(1.0, norm1(inst.beta0));
    }
  }
  {
    std::vector<std::size_t> support;
    for (std::size_t j = 0; j < p; ++j)
      if (inst.beta0[j] != 0.0) support.push_back(j);
    if (support.empty())
      throw InvalidInstance("verify_mult: beta0 = 0 forces A = ∅ (degenerate instance)");
    v.conditions[2] = IndexSet(support, p) == inst.a;
  }
  {
    const Vector cb = c * inst.beta0;
    bool ok = true;
    for (std::size_t j = 0; j < p; ++j) {
      const double r = std::abs(prob.v[j] - cb[j]);
      if (inst.b.contains(j))
        ok = ok && std::abs(r - inst.lambda) <= tol * scale;
      else
        ok = ok && r < inst.lambda - tol * scale;
    }
    v.conditions[3] = ok;
  }
  v.holds = std::all_of(v.conditions.begin(), v.conditions.end(), [](bool b) { return b; });
  return v;
}

// Two identical predictor columns x₁ = x₂ = (1, 0)ᵀ with y = (2, 0)ᵀ, so
// C = ½·[[1,1],[1,1]] and v = (1, 1). At lambda = 0.5 the feasible set is the
// strip 1 <= β₁ + β₂ <= 3 and every β >= 0 on β₁ + β₂ = 1 is a solution.
inline MultInstance duplicated_column_instance() {
  MultInstance inst;
  inst.data.x = Matrix{{1.0, 1.0}, {0.0, 0.0}};
  inst.data.y = {2.0, 0.0};
  inst.lambda = 0.5;
  inst.beta0 = {0.5, 0.5};
  inst.a = IndexSet({0, 1}, 2);
  inst.b = IndexSet({0, 1}, 2);
  inst.mu0 = {1.0, 1.0};
  return inst;
}

}  // namespace dantzig_kit
