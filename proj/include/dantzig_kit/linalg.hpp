#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dantzig_kit {

using Vector = std::vector<double>;

// Dense row-major real matrix. p is desk-scale throughout, so no expression
// templates and no sparse storage.
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
      throw std::invalid_argument("Matrix: entries length " + std::to_string(data_.size()) +
                                  " != rows*cols " + std::to_string(rows_ * cols_));
    }
    if (!all_finite()) throw std::invalid_argument("Matrix: non-finite entry");
  }

  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  Vector column(std::size_t j) const {
    Vector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  const std::vector<double>& entries() const noexcept { return data_; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
  }

  bool is_square() const noexcept { return rows_ == cols_; }

  // Appends one row; on a default-constructed matrix this fixes the width.
  void append_row(std::span<const double> r) {
    if (rows_ == 0 && cols_ == 0) cols_ = r.size();
    if (r.size() != cols_) throw std::invalid_argument("Matrix::append_row: width mismatch");
    data_.insert(data_.end(), r.begin(), r.end());
    ++rows_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Strictly increasing 0-based positions inside {0, ..., universe-1}.
class IndexSet {
 public:
  IndexSet() = default;

  IndexSet(std::vector<std::size_t> indices, std::size_t universe)
      : indices_(std::move(indices)), universe_(universe) {
    for (std::size_t k = 0; k < indices_.size(); ++k) {
      if (indices_[k] >= universe_) {
        throw std::invalid_argument("IndexSet: index " + std::to_string(indices_[k]) +
                                    " out of range for universe " + std::to_string(universe_));
      }
      if (k > 0 && indices_[k] <= indices_[k - 1]) {
        throw std::invalid_argument("IndexSet: indices must be strictly increasing");
      }
    }
  }

  static IndexSet all(std::size_t universe) {
    std::vector<std::size_t> idx(universe);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return IndexSet(std::move(idx), universe);
  }

  // Bit k of mask selects index k.
  static IndexSet from_mask(unsigned long long mask, std::size_t universe) {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < universe; ++k)
      if (mask & (1ULL << k)) idx.push_back(k);
    return IndexSet(std::move(idx), universe);
  }

  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  std::size_t universe() const noexcept { return universe_; }
  std::size_t operator[](std::size_t k) const noexcept { return indices_[k]; }
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }

  bool contains(std::size_t i) const {
    return std::binary_search(indices_.begin(), indices_.end(), i);
  }

  IndexSet complement() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < universe_; ++i)
      if (!contains(i)) out.push_back(i);
    return IndexSet(std::move(out), universe_);
  }

  friend bool operator==(const IndexSet&, const IndexSet&) = default;
  friend auto operator<=>(const IndexSet& a, const IndexSet& b) { return a.indices_ <=> b.indices_; }

 private:
  std::vector<std::size_t> indices_;
  std::size_t universe_ = 0;
};

struct AllIndices {};
inline constexpr AllIndices all_indices{};

using IndexSelection = std::variant<AllIndices, IndexSet>;

// ---------------------------------------------------------------------------
// Small vector helpers

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

inline double norm1(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += std::abs(x);
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline Vector subtract(std::span<const double> a, std::span<const double> b) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Vector scaled(std::span<const double> a, double s) {
  Vector out(a.begin(), a.end());
  for (double& x : out) x *= s;
  return out;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  return max_abs_diff(a.entries(), b.entries());
}

inline double max_abs(const Matrix& m) { return norm_inf(m.entries()); }

inline double frobenius(const Matrix& m) { return norm2(m.entries()); }

inline Vector operator*(const Matrix& m, std::span<const double> x) {
  if (x.size() != m.cols()) throw std::invalid_argument("matvec: dimension mismatch");
  Vector out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = dot(m.row(i), x);
  return out;
}

inline Vector operator*(const Matrix& m, const Vector& x) { return m * std::span<const double>(x); }

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: dimension mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

inline Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("matadd: dimension mismatch");
  std::vector<double> e(a.entries());
  for (std::size_t k = 0; k < e.size(); ++k) e[k] += b.entries()[k];
  return Matrix(a.rows(), a.cols(), std::move(e));
}

inline Matrix operator*(double s, const Matrix& a) {
  std::vector<double> e(a.entries());
  for (double& x : e) x *= s;
  return Matrix(a.rows(), a.cols(), std::move(e));
}

// Xᵀv without forming the transpose.
inline Vector transpose_times(const Matrix& x, std::span<const double> v) {
  if (v.size() != x.rows()) throw std::invalid_argument("transpose_times: dimension mismatch");
  Vector out(x.cols(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto r = x.row(i);
    for (std::size_t j = 0; j < x.cols(); ++j) out[j] += r[j] * v[i];
  }
  return out;
}

// n⁻¹XᵀX, symmetric by construction.
inline Matrix scaled_gram(const Matrix& x) {
  const std::size_t n = x.rows(), p = x.cols();
  Matrix g(p, p);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = x.row(i);
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = a; b < p; ++b) g(a, b) += r[a] * r[b];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a; b < p; ++b) {
      g(a, b) *= inv_n;
      g(b, a) = g(a, b);
    }
  return g;
}

inline bool is_symmetric(const Matrix& m, double tol) {
  if (!m.is_square()) return false;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > tol) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Submatrices

namespace detail {

inline std::vector<std::size_t> resolve(const IndexSelection& sel, std::size_t extent,
                                        const char* what) {
  if (std::holds_alternative<AllIndices>(sel)) {
    std::vector<std::size_t> idx(extent);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
  }
  const auto& set = std::get<IndexSet>(sel);
  for (std::size_t i : set)
    if (i >= extent)
      throw std::invalid_argument(std::string("submatrix: ") + what + " index " +
                                  std::to_string(i) + " out of range " + std::to_string(extent));
  return set.indices();
}

}  // namespace detail

inline Matrix submatrix(const Matrix& m, const IndexSelection& rows, const IndexSelection& cols) {
  const auto r = detail::resolve(rows, m.rows(), "row");
  const auto c = detail::resolve(cols, m.cols(), "column");
  Matrix out(r.size(), c.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) out(i, j) = m(r[i], c[j]);
  return out;
}

inline Vector subvector(std::span<const double> v, const IndexSet& idx) {
  Vector out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Singular value decomposition (one-sided Jacobi)

inline constexpr double kDefaultRankTolerance = 1e-12;

struct Svd {
  Matrix u;        // rows × k
  Vector singular;  // k values, descending
  Matrix v;        // cols × k
};

namespace detail {

// Hestenes one-sided Jacobi on a tall matrix (rows >= cols).
inline Svd jacobi_svd_tall(const Matrix& a) {
  const std::size_t m = a.rows(), n = a.cols();
  Matrix u = a;
  Matrix v = Matrix::identity(n);
  const double eps = std::numeric_limits<double>::epsilon();
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += u(i, p) * u(i, p);
          beta += u(i, q) * u(i, q);
          gamma += u(i, p) * u(i, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double up = u(i, p), uq = u(i, q);
          u(i, p) = c * up - s * uq;
          u(i, q) = s * up + c * uq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }
  Vector sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += u(i, j) * u(i, j);
    sigma[j] = std::sqrt(s);
    if (sigma[j] > 0.0)
      for (std::size_t i = 0; i < m; ++i) u(i, j) /= sigma[j];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });
  Svd out{Matrix(m, n), Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.singular[k] = sigma[j];
    for (std::size_t i = 0; i < m; ++i) out.u(i, k) = u(i, j);
    for (std::size_t i = 0; i < n; ++i) out.v(i, k) = v(i, j);
  }
  return out;
}

}  // namespace detail

inline Svd svd(const Matrix& a) {
  if (a.rows() >= a.cols()) return detail::jacobi_svd_tall(a);
  Svd t = detail::jacobi_svd_tall(a.transpose());
  return Svd{std::move(t.v), std::move(t.singular), std::move(t.u)};
}

inline Vector singular_values(const Matrix& a) {
  if (a.empty()) return {};
  return svd(a).singular;
}

namespace detail {

inline double rank_threshold(const Vector& sigma, std::size_t rows, std::size_t cols, double tol) {
  const double smax = sigma.empty() ? 0.0 : sigma.front();
  return tol * smax * static_cast<double>(std::max(rows, cols));
}

}  // namespace detail

inline std::size_t rank(const Matrix& m, double tol = kDefaultRankTolerance) {
  if (m.empty()) return 0;
  const Vector sigma = singular_values(m);
  if (sigma.front() == 0.0) return 0;
  const double thr = detail::rank_threshold(sigma, m.rows(), m.cols(), tol);
  return static_cast<std::size_t>(
      std::count_if(sigma.begin(), sigma.end(), [thr](double s) { return s > thr; }));
}

// cols − rank. A matrix with no columns has a zero-dimensional null space.
inline std::size_t null_space_dim(const Matrix& m, double tol = kDefaultRankTolerance) {
  if (tol < 0.0) throw std::invalid_argument("null_space_dim: negative tolerance");
  if (m.cols() == 0) return 0;
  return m.cols() - rank(m, tol);
}

inline Matrix pseudoinverse(const Matrix& m, double tol = kDefaultRankTolerance) {
  if (m.empty()) throw std::invalid_argument("pseudoinverse: empty matrix");
  const Svd d = svd(m);
  const double thr = detail::rank_threshold(d.singular, m.rows(), m.cols(), tol);
  Matrix out(m.cols(), m.rows());
  for (std::size_t k = 0; k < d.singular.size(); ++k) {
    const double s = d.singular[k];
    if (s == 0.0 || s <= thr) continue;
    const double inv = 1.0 / s;
    for (std::size_t i = 0; i < m.cols(); ++i) {
      const double vik = d.v(i, k) * inv;
      if (vik == 0.0) continue;
      for (std::size_t j = 0; j < m.rows(); ++j) out(i, j) += vik * d.u(j, k);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Square solves

// LU with partial pivoting, kept for repeated solves against one basis.
class LuFactorization {
 public:
  explicit LuFactorization(Matrix a) : lu_(std::move(a)), perm_(lu_.rows()) {
    if (!lu_.is_square()) throw std::invalid_argument("LU: matrix not square");
    const std::size_t n = lu_.rows();
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    const double scale = std::max(1.0, max_abs(lu_));
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t piv = k;
      for (std::size_t i = k + 1; i < n; ++i)
        if (std::abs(lu_(i, k)) > std::abs(lu_(piv, k))) piv = i;
      if (std::abs(lu_(piv, k)) <= 1e-14 * scale) {
        singular_ = true;
        return;
      }
      if (piv != k) {
        for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
        std::swap(perm_[k], perm_[piv]);
      }
      for (std::size_t i = k + 1; i < n; ++i) {
        const double f = lu_(i, k) / lu_(k, k);
        lu_(i, k) = f;
        if (f == 0.0) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
      }
    }
  }

  bool singular() const noexcept { return singular_; }

  Vector solve(std::span<const double> b) const {
    if (singular_) throw std::runtime_error("LU: singular matrix");
    const std::size_t n = lu_.rows();
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu_(i, j) * x[j];
      x[i] /= lu_(i, i);
    }
    return x;
  }

  // Solves Aᵀx = b.
  Vector solve_transposed(std::span<const double> b) const {
    if (singular_) throw std::runtime_error("LU: singular matrix");
    const std::size_t n = lu_.rows();
    Vector z(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) z[i] -= lu_(j, i) * z[j];
      z[i] /= lu_(i, i);
    }
    for (std::size_t i = n; i-- > 0;)
      for (std::size_t j = i + 1; j < n; ++j) z[i] -= lu_(j, i) * z[j];
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[perm_[i]] = z[i];
    return x;
  }

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
  bool singular_ = false;
};

inline Vector solve_linear(const Matrix& a, std::span<const double> b) {
  if (b.size() != a.rows()) throw std::invalid_argument("solve_linear: dimension mismatch");
  LuFactorization lu(a);
  if (lu.singular()) throw std::invalid_argument("solve_linear: singular matrix");
  return lu.solve(b);
}

inline Matrix inverse(const Matrix& a) {
  LuFactorization lu(a);
  if (lu.singular()) throw std::invalid_argument("inverse: singular matrix");
  const std::size_t n = a.rows();
  Matrix out(n, n);
  Vector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    const Vector col = lu.solve(e);
    for (std::size_t i = 0; i < n; ++i) out(i, j) = col[i];
  }
  return out;
}

// Lower-triangular L with LLᵀ = a, or a 0×0 matrix when a is not positive
// definite.
inline Matrix cholesky(const Matrix& a) {
  if (!a.is_square()) throw std::invalid_argument("cholesky: matrix not square");
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return Matrix{};
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

inline bool is_positive_definite(const Matrix& a) { return !cholesky(a).empty(); }

// ---------------------------------------------------------------------------
// Rank probe for XᵀW with continuously distributed X

inline Matrix standard_normal_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> e(rows * cols);
  for (double& x : e) x = z(rng);
  return Matrix(rows, cols, std::move(e));
}

// Fraction of replicates in which XᵀW (X: n×p with iid standard normal rows)
// attains rank min(q, p). W must be n×q of full column rank.
inline double lemma_a3_probe(const Matrix& w, std::size_t p, std::size_t reps,
                             std::uint64_t seed) {
  const std::size_t n = w.rows(), q = w.cols();
  if (p == 0 || q == 0 || reps == 0) throw std::invalid_argument("lemma_a3_probe: empty shape");
  if (n < p) throw std::invalid_argument("lemma_a3_probe: requires n >= p");
  if (q > n) throw std::invalid_argument("lemma_a3_probe: requires q <= n");
  if (rank(w) != q) throw std::invalid_argument("lemma_a3_probe: W must have rank q");
  std::mt19937_64 rng(seed);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    const Matrix x = standard_normal_matrix(n, p, rng);
    if (rank(x.transpose() * w) == std::min(q, p)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(reps);
}

inline double lemma_a3_probe(std::size_t n, std::size_t p, std::size_t q, std::size_t reps,
                             std::uint64_t seed) {
  if (q == 0 || q > n) throw std::invalid_argument("lemma_a3_probe: requires 1 <= q <= n");
  // W is drawn once from a separate stream; a Gaussian draw has full rank
  // almost surely and the rank is re-checked by the overload above.
  std::mt19937_64 wrng(seed ^ 0x9e3779b97f4a7c15ULL);
  const Matrix w = standard_normal_matrix(n, q, wrng);
  return lemma_a3_probe(w, p, reps, seed);
}

}  // namespace dantzig_kit
