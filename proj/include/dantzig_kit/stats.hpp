#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "dantzig_kit/linalg.hpp"

namespace dantzig_kit::stats {

inline double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean: empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// Unbiased (N − 1) standard deviation; 0 for a single observation.
inline double stddev(std::span<const double> x) {
  const double m = mean(x);
  if (x.size() < 2) return 0.0;
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

// Linear interpolation between order statistics (R type 7).
inline double quantile(std::vector<double> x, double q) {
  if (x.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q outside [0, 1]");
  std::sort(x.begin(), x.end());
  const double h = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

inline double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

// Covariance of the columns of a sample stored one observation per row.
inline Matrix covariance(const Matrix& sample) {
  const std::size_t n = sample.rows(), p = sample.cols();
  if (n < 2) throw std::invalid_argument("covariance: need at least two observations");
  Vector mu(p, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) mu[j] += sample(i, j);
  for (double& m : mu) m /= static_cast<double>(n);
  Matrix cov(p, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = a; b < p; ++b)
        cov(a, b) += (sample(i, a) - mu[a]) * (sample(i, b) - mu[b]);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a; b < p; ++b) {
      cov(a, b) /= static_cast<double>(n - 1);
      cov(b, a) = cov(a, b);
    }
  return cov;
}

// ||a − ref||_F / ||ref||_F
inline double relative_frobenius(const Matrix& a, const Matrix& ref) {
  if (a.rows() != ref.rows() || a.cols() != ref.cols())
    throw std::invalid_argument("relative_frobenius: shape mismatch");
  const double denom = frobenius(ref);
  if (denom == 0.0) throw std::invalid_argument("relative_frobenius: zero reference");
  double s = 0.0;
  for (std::size_t k = 0; k < a.entries().size(); ++k) {
    const double d = a.entries()[k] - ref.entries()[k];
    s += d * d;
  }
  return std::sqrt(s) / denom;
}

// Fraction of |x_i| below tol.
inline double atom_mass(std::span<const double> x, double tol) {
  if (x.empty()) return 0.0;
  const auto k = std::count_if(x.begin(), x.end(), [tol](double v) { return std::abs(v) < tol; });
  return static_cast<double>(k) / static_cast<double>(x.size());
}

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Survival function of the Kolmogorov distribution.
inline double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// Two-sample Kolmogorov–Smirnov statistic sup|F_a − F_b| with the asymptotic
// p-value (effective-size correction of Stephens).
inline TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

// Jarque–Bera normality test; the statistic is asymptotically χ²₂, whose
// survival function is exp(−x/2). A constant sample has no defined skewness
// and yields NaN.
inline TestResult jarque_bera(std::span<const double> x) {
  if (x.size() < 3) throw std::invalid_argument("jarque_bera: need at least three observations");
  const double m = mean(x);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - m;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  const double n = static_cast<double>(x.size());
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 == 0.0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);
  const double jb = n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
  return {jb, std::exp(-0.5 * jb)};
}

}  // namespace dantzig_kit::stats
