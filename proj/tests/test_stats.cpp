#include <gtest/gtest.h>

#include <random>

#include "dantzig_kit/stats.hpp"

using namespace dantzig_kit;

TEST(Stats, MeanSdQuantile) {
  const Vector x{4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(stats::mean(x), 2.5);
  EXPECT_NEAR(stats::stddev(x), std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_DOUBLE_EQ(stats::median(x), 2.5);
  EXPECT_DOUBLE_EQ(stats::quantile(x, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(stats::quantile(x, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(stats::quantile(x, 0.25), 1.75);
  EXPECT_THROW(stats::quantile({}, 0.5), std::invalid_argument);
  EXPECT_THROW(stats::quantile(x, 1.5), std::invalid_argument);
}

TEST(Stats, CovarianceAndFrobenius) {
  const Matrix s{{1, 2}, {2, 4}, {3, 6}};
  const Matrix cov = stats::covariance(s);
  EXPECT_DOUBLE_EQ(cov(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(cov(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(cov(1, 1), 4.0);
  EXPECT_DOUBLE_EQ(stats::relative_frobenius(cov, cov), 0.0);
  EXPECT_NEAR(stats::relative_frobenius(2.0 * cov, cov), 1.0, 1e-15);
}

TEST(Stats, AtomMass) {
  const Vector x{0.0, 1e-7, -1e-7, 0.5, 2.0};
  EXPECT_DOUBLE_EQ(stats::atom_mass(x, 1e-6), 0.6);
}

TEST(Stats, KolmogorovSmirnov) {
  std::mt19937_64 rng(61);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> a(2000), b(2000), c(2000);
  for (auto& v : a) v = z(rng);
  for (auto& v : b) v = z(rng);
  for (auto& v : c) v = z(rng) + 0.5;
  EXPECT_DOUBLE_EQ(stats::ks_two_sample(a, a).statistic, 0.0);
  const auto same = stats::ks_two_sample(a, b);
  EXPECT_LT(same.statistic, 0.05);
  EXPECT_GT(same.p_value, 0.001);
  const auto shifted = stats::ks_two_sample(a, c);
  EXPECT_GT(shifted.statistic, 0.15);
  EXPECT_LT(shifted.p_value, 1e-10);
  // Disjoint supports give D = 1; ties across samples are handled jointly.
  EXPECT_DOUBLE_EQ(stats::ks_two_sample({1, 2, 3}, {4, 5}).statistic, 1.0);
  EXPECT_DOUBLE_EQ(stats::ks_two_sample({0, 0, 1}, {0, 1, 1}).statistic, 1.0 / 3.0);
}

TEST(Stats, JarqueBera) {
  std::mt19937_64 rng(62);
  std::normal_distribution<double> z(0.0, 1.0);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> normal(5000), skewed(5000), atom(5000);
  for (auto& v : normal) v = z(rng);
  for (auto& v : skewed) v = e(rng);
  for (std::size_t i = 0; i < atom.size(); ++i) atom[i] = i % 3 == 0 ? z(rng) : 0.0;
  EXPECT_GT(stats::jarque_bera(normal).p_value, 0.001);
  EXPECT_LT(stats::jarque_bera(skewed).p_value, 1e-10);
  EXPECT_LT(stats::jarque_bera(atom).p_value, 1e-10);
  EXPECT_TRUE(std::isnan(stats::jarque_bera(std::vector<double>(10, 1.0)).statistic));
}
