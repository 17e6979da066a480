#include <gtest/gtest.h>

#include <random>

#include "dantzig_kit/dantzig.hpp"
#include "dantzig_kit/lasso.hpp"
#include "dantzig_kit/uniqueness.hpp"
#include "oracles.hpp"

using namespace dantzig_kit;

namespace {

// Witness conditions recomputed with plain loops.
bool witness_holds(const Matrix& c, const ParallelismWitness& w, double tol) {
  for (std::size_t i = 0; i < c.rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < w.b.size(); ++k) s += c(i, w.b[k]) * w.w[k];
    if (std::abs(s) > 1.0 + tol) return false;
    for (std::size_t r = 0; r < w.a.size(); ++r)
      if (w.a[r] == i && std::abs(s - w.s[r]) > tol) return false;
  }
  // Null space of C_{B,A}: compare its rank against |A| by elimination.
  oracle::Mat m;
  for (std::size_t bi : w.b) {
    oracle::Vec row;
    for (std::size_t ai : w.a) row.push_back(c(bi, ai));
    m.push_back(row);
  }
  std::size_t rank = 0;
  for (std::size_t col = 0; col < w.a.size() && rank < m.size(); ++col) {
    std::size_t piv = rank;
    for (std::size_t i = rank; i < m.size(); ++i)
      if (std::abs(m[i][col]) > std::abs(m[piv][col])) piv = i;
    if (std::abs(m[piv][col]) < 1e-10) continue;
    std::swap(m[piv], m[rank]);
    for (std::size_t i = rank + 1; i < m.size(); ++i) {
      const double f = m[i][col] / m[rank][col];
      for (std::size_t j = col; j < w.a.size(); ++j) m[i][j] -= f * m[rank][j];
    }
    ++rank;
  }
  return rank < w.a.size();
}

// p = 2: some column is a nonzero multiple of a point in {±1}².
bool column_criterion(const Matrix& c) {
  for (std::size_t j = 0; j < 2; ++j)
    if (c(0, j) != 0.0 && std::abs(c(0, j)) == std::abs(c(1, j))) return true;
  return false;
}

}  // namespace

TEST(IsParallel, IdentityIsNot) {
  const ParallelismReport r = is_parallel(Matrix::identity(3));
  EXPECT_FALSE(r.parallel);
  EXPECT_TRUE(r.witnesses.empty());
  EXPECT_EQ(r.pairs_examined, 49u);
  EXPECT_TRUE(r.p_cap_respected);
}

TEST(IsParallel, AllOnesHasDocumentedWitness) {
  const Matrix c{{1, 1}, {1, 1}};
  const ParallelismReport r = is_parallel(c);
  ASSERT_TRUE(r.parallel);
  const ParallelismWitness& w = r.witnesses.front();
  EXPECT_EQ(w.a, IndexSet({0, 1}, 2));
  EXPECT_EQ(w.b, IndexSet({0}, 2));
  ASSERT_EQ(w.w.size(), 1u);
  EXPECT_NEAR(w.w[0], 1.0, 1e-8);
  EXPECT_EQ(w.s, (std::vector<int>{1, 1}));
  for (const auto& wit : r.witnesses) EXPECT_TRUE(witness_holds(c, wit, 1e-8));
}

TEST(IsParallel, TwoOneOneTwoIsNot) {
  EXPECT_FALSE(is_parallel(Matrix{{2, 1}, {1, 2}}).parallel);
}

TEST(IsParallel, Guards) {
  EXPECT_THROW(is_parallel(Matrix::identity(11)), CapExceeded);
  ParallelismOptions opt;
  opt.p_cap = 2;
  EXPECT_THROW(is_parallel(Matrix::identity(3), opt), CapExceeded);
  EXPECT_THROW(is_parallel(Matrix{{1, 2}, {0, 1}}), std::invalid_argument);
  EXPECT_THROW(is_parallel(Matrix(2, 3, 0.0)), std::invalid_argument);
}

TEST(IsParallel, ColumnCriterionOnAllSmallTwoByTwo) {
  std::size_t parallel = 0;
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b)
      for (int d = -2; d <= 2; ++d) {
        const Matrix c{{double(a), double(b)}, {double(b), double(d)}};
        const ParallelismReport r = is_parallel(c);
        EXPECT_EQ(r.parallel, column_criterion(c)) << a << " " << b << " " << d;
        for (const auto& w : r.witnesses) EXPECT_TRUE(witness_holds(c, w, 1e-8));
        parallel += r.parallel;
      }
  EXPECT_GT(parallel, 10u);
}

TEST(IsParallel, WitnessesSoundAndSignSymmetric) {
  std::mt19937_64 rng(51);
  for (int t = 0; t < 10; ++t) {
    // A column repeated up to sign makes the Gram matrix parallel.
    Matrix x = standard_normal_matrix(6, 4, rng);
    for (std::size_t i = 0; i < 6; ++i) x(i, 3) = (t % 2 ? -1.0 : 1.0) * x(i, 1);
    const Matrix c = scaled_gram(x);
    const ParallelismReport r = is_parallel(c);
    ASSERT_TRUE(r.parallel);
    EXPECT_LE(r.witnesses.size(), 16u);
    for (const auto& w : r.witnesses) {
      EXPECT_TRUE(witness_holds(c, w, 1e-8));
      EXPECT_EQ(w.s.front(), 1);
      ParallelismWitness neg = w;
      for (double& v : neg.w) v = -v;
      for (int& s : neg.s) s = -s;
      EXPECT_TRUE(witness_holds(c, neg, 1e-8));
      EXPECT_TRUE(verify_witness(c, neg));
    }
  }
}

TEST(IsParallel, DeterministicAcrossWorkerCounts) {
  std::mt19937_64 rng(52);
  Matrix x = standard_normal_matrix(7, 5, rng);
  for (std::size_t i = 0; i < 7; ++i) x(i, 4) = x(i, 2);
  const Matrix c = scaled_gram(x);
  ParallelismOptions one, many;
  many.jobs = 4;
  const auto r1 = is_parallel(c, one), r4 = is_parallel(c, many);
  EXPECT_EQ(r1.pairs_examined, r4.pairs_examined);
  ASSERT_EQ(r1.witnesses.size(), r4.witnesses.size());
  for (std::size_t k = 0; k < r1.witnesses.size(); ++k) {
    EXPECT_EQ(r1.witnesses[k].a, r4.witnesses[k].a);
    EXPECT_EQ(r1.witnesses[k].b, r4.witnesses[k].b);
    EXPECT_EQ(r1.witnesses[k].w, r4.witnesses[k].w);
    EXPECT_EQ(r1.witnesses[k].s, r4.witnesses[k].s);
  }
}

TEST(LassoParallelism, Examples) {
  EXPECT_FALSE(lasso_parallelism_check(Matrix::identity(2)).parallel);
  EXPECT_FALSE(lasso_parallelism_check(Matrix{{2, 1}, {1, 2}}).parallel);
  const Matrix ones{{1, 1}, {1, 1}};
  const ParallelismReport r = lasso_parallelism_check(ones);
  ASSERT_TRUE(r.parallel);
  for (const auto& w : r.witnesses) {
    EXPECT_EQ(w.b, IndexSet::all(2));
    EXPECT_TRUE(witness_holds(ones, w, 1e-8));
  }
  EXPECT_TRUE(std::any_of(r.witnesses.begin(), r.witnesses.end(),
                          [](const ParallelismWitness& w) { return w.a == IndexSet::all(2); }));
  // The documented choice w = (1, 0) satisfies the conditions.
  EXPECT_TRUE(witness_holds(ones, {IndexSet::all(2), IndexSet::all(2), {1.0, 0.0}, {1, 1}}, 1e-12));
}

TEST(RandomDesignFraction, ContinuousDesignsNeverParallel) {
  EXPECT_EQ(prop2_experiment(10, 3, 40, 7).fraction_parallel, 0.0);
  ParallelismOptions opt;
  opt.jobs = 4;
  EXPECT_EQ(prop2_experiment(10, 4, 20, 8, standard_normal_design, opt).fraction_parallel, 0.0);
}

TEST(RandomDesignFraction, DuplicatedColumnAlwaysParallel) {
  const Prop2Result r = prop2_experiment(10, 3, 20, 9, duplicated_column_design);
  EXPECT_EQ(r.fraction_parallel, 1.0);
  EXPECT_EQ(r.parallel_count, 20u);
  EXPECT_THROW(prop2_experiment(10, 11, 1, 1), CapExceeded);
  EXPECT_THROW(prop2_experiment(10, 3, 0, 1), std::invalid_argument);
}

// Non-parallel C: unique Dantzig solutions and a single lasso solution.
TEST(ConsistencyChain, NonParallelImpliesUniqueness) {
  std::mt19937_64 rng(53);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t = 0; t < 6; ++t) {
    const std::size_t p = 2 + t % 3;
    const Matrix x = standard_normal_matrix(p + 4, p, rng);
    const Matrix c = scaled_gram(x);
    ASSERT_FALSE(is_parallel(c).parallel);
    ASSERT_FALSE(lasso_parallelism_check(c).parallel);
    for (int k = 0; k < 25; ++k) {
      Vector v(p);
      for (double& e : v) e = z(rng);
      const double lambda = (k % 5) * 0.25 * norm_inf(v);
      EXPECT_LE(solution_set_diameter({c, v, lambda}).diameter_inf, kUniqueDiameter);
    }
    DesignData d{x, Vector(p + 4)};
    for (double& e : d.y) e = z(rng);
    const double lambda = 0.2 * norm_inf(transpose_times(x, d.y)) / double(p + 4);
    const Vector first = lasso_solve(d, lambda, {}).beta_hat;
    for (int s = 0; s < 20; ++s) {
      LassoOptions opt;
      opt.warm_start = Vector(p);
      for (double& e : *opt.warm_start) e = u(rng);
      EXPECT_LE(max_abs_diff(lasso_solve(d, lambda, opt).beta_hat, first), 1e-6);
    }
  }
}

TEST(VerifyMult, DuplicatedColumnInstanceHolds) {
  const MultInstance inst = duplicated_column_instance();
  const MultVerdict v = verify_mult(inst);
  EXPECT_TRUE(v.holds);
  for (bool b : v.conditions) EXPECT_TRUE(b);
  EXPECT_NEAR(v.min_linear_over_f, 1.0, 1e-9);
  const DantzigProblem prob = DantzigProblem::from_data(inst.data, inst.lambda);
  EXPECT_NEAR(solution_set_diameter(prob).diameter_inf, 1.0, 1e-6);
}

// μ⁰ derived independently: the condition-1 system by vertex enumeration on a
// box, then condition 2 by vertex enumeration of min over F ∩ box.
TEST(VerifyMult, DerivedMuPassesAndMatchesOracle) {
  const MultInstance base = duplicated_column_instance();
  const Matrix c = scaled_gram(base.data.x);
  const Vector v = scaled(transpose_times(base.data.x, base.data.y), 0.5);
  oracle::Mat g;
  oracle::Vec h;
  for (std::size_t i = 0; i < 2; ++i) {
    g.push_back({c(i, 0), c(i, 1)});
    h.push_back(1.0);
    g.push_back({-c(i, 0), -c(i, 1)});
    h.push_back(1.0);
    g.push_back({c(i, 0), c(i, 1)});  // (Cμ)_i <= 1 and >= 1: s = (1, 1)
    h.push_back(1.0);
    g.push_back({-c(i, 0), -c(i, 1)});
    h.push_back(-1.0);
    oracle::Vec e{0, 0};
    e[i] = 1;
    g.push_back(e);
    h.push_back(10);
    e[i] = -1;
    g.push_back(e);
    h.push_back(10);
  }
  const auto mu = oracle::vertex_enumeration(g, h, {1.0, 0.0});
  ASSERT_TRUE(mu.feasible);

  MultInstance inst = base;
  inst.mu0 = mu.argmin;
  const MultVerdict verdict = verify_mult(inst);
  EXPECT_TRUE(verdict.holds);

  const Vector gvec = c * inst.mu0;
  oracle::Mat f;
  oracle::Vec fh;
  for (std::size_t i = 0; i < 2; ++i) {
    f.push_back({c(i, 0), c(i, 1)});
    fh.push_back(v[i] + inst.lambda);
    f.push_back({-c(i, 0), -c(i, 1)});
    fh.push_back(inst.lambda - v[i]);
    oracle::Vec e{0, 0};
    e[i] = 1;
    f.push_back(e);
    fh.push_back(100);
    e[i] = -1;
    f.push_back(e);
    fh.push_back(100);
  }
  const auto lo = oracle::vertex_enumeration(f, fh, gvec);
  ASSERT_TRUE(lo.feasible);
  EXPECT_NEAR(verdict.min_linear_over_f, lo.best, 1e-9);
  EXPECT_GE(lo.best, norm1(inst.beta0) - 1e-9);
}

TEST(VerifyMult, SingletonSupportFailsConditionOne) {
  // β⁰ = (1, 0) with A = {1}: C_{B,A} is a nonzero column, so its null space
  // is trivial.
  MultInstance inst = duplicated_column_instance();
  inst.beta0 = {1.0, 0.0};
  inst.a = IndexSet({0}, 2);
  const MultVerdict v = verify_mult(inst);
  EXPECT_FALSE(v.holds);
  EXPECT_FALSE(v.conditions[0]);
  EXPECT_TRUE(v.conditions[1]);
  EXPECT_TRUE(v.conditions[2]);
  EXPECT_TRUE(v.conditions[3]);
}

TEST(VerifyMult, WrongBFailsConditionFour) {
  MultInstance inst = duplicated_column_instance();
  inst.b = IndexSet({0}, 2);
  inst.mu0 = {2.0};
  const MultVerdict v = verify_mult(inst);
  EXPECT_FALSE(v.holds);
  EXPECT_FALSE(v.conditions[3]);
}

TEST(VerifyMult, DegenerateAndInvalid) {
  MultInstance inst = duplicated_column_instance();
  inst.lambda = 2.0;
  inst.beta0 = {0.0, 0.0};
  EXPECT_THROW(verify_mult(inst), InvalidInstance);

  MultInstance empty_a = duplicated_column_instance();
  empty_a.a = IndexSet({}, 2);
  EXPECT_THROW(verify_mult(empty_a), InvalidInstance);

  // F is never empty for data-derived (C, v), so the reachable shape error is
  // a mismatched μ⁰.
  MultInstance mismatched = duplicated_column_instance();
  mismatched.mu0 = {1.0};
  EXPECT_THROW(verify_mult(mismatched), std::invalid_argument);
}
