#pragma once

// Dense real-matrix primitives. All factorizations and rank decisions used
// by the rest of the library live here. Matrices are small (at most a few
// dozen rows), so everything is unblocked and allocation-per-result.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "slspec/errors.hpp"

namespace slspec {

/// Row-major dense real matrix.
class Mat {
 public:
  Mat() = default;

  Mat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  Mat(std::size_t rows, std::size_t cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("Mat: entry count does not match rows x cols");
    }
    if (!all_finite()) throw DomainError("Mat: non-finite entry");
  }

  Mat(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionError("Mat: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
    if (!all_finite()) throw DomainError("Mat: non-finite entry");
  }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Mat diagonal(std::span<const double> d) {
    Mat m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<const double> entries() const noexcept { return data_; }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  Mat transpose() const {
    Mat t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Mat block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) throw DimensionError("Mat::block out of range");
    Mat b(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
  }

  void set_block(std::size_t r0, std::size_t c0, const Mat& b) {
    if (r0 + b.rows_ > rows_ || c0 + b.cols_ > cols_) throw DimensionError("Mat::set_block out of range");
    for (std::size_t i = 0; i < b.rows_; ++i)
      for (std::size_t j = 0; j < b.cols_; ++j) (*this)(r0 + i, c0 + j) = b(i, j);
  }

  Mat col(std::size_t j) const { return block(0, j, rows_, 1); }

  Mat& operator+=(const Mat& o) {
    check_same_shape(o, "+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    check_same_shape(o, "-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Mat& operator*=(double s) noexcept {
    for (double& v : data_) v *= s;
    return *this;
  }

  /// this += s * o, without a temporary.
  Mat& add_scaled(const Mat& o, double s) {
    check_same_shape(o, "add_scaled");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += s * o.data_[k];
    return *this;
  }

  friend Mat operator+(Mat a, const Mat& b) { return a += b; }
  friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
  friend Mat operator-(Mat a) { return a *= -1.0; }
  friend Mat operator*(double s, Mat a) { return a *= s; }
  friend Mat operator*(Mat a, double s) { return a *= s; }

  friend Mat operator*(const Mat& a, const Mat& b) {
    if (a.cols_ != b.rows_) throw DimensionError("Mat: product shape mismatch");
    Mat c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        const double* brow = &b.data_[k * b.cols_];
        double* crow = &c.data_[i * c.cols_];
        for (std::size_t j = 0; j < b.cols_; ++j) crow[j] += aik * brow[j];
      }
    }
    return c;
  }

  friend bool operator==(const Mat&, const Mat&) = default;

 private:
  void check_same_shape(const Mat& o, const char* op) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
      throw DimensionError(std::string("Mat: shape mismatch in ") + op);
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double trace(const Mat& m) {
  if (!m.square()) throw DimensionError("trace: matrix not square");
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, i);
  return s;
}

inline double norm_fro(const Mat& m) {
  double s = 0.0;
  for (double v : m.entries()) s += v * v;
  return std::sqrt(s);
}

/// Maximum absolute row sum.
inline double norm_inf(const Mat& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += std::abs(m(i, j));
    best = std::max(best, s);
  }
  return best;
}

/// Maximum absolute column sum.
inline double norm_one(const Mat& m) { return norm_inf(m.transpose()); }

inline double max_abs(const Mat& m) {
  double best = 0.0;
  for (double v : m.entries()) best = std::max(best, std::abs(v));
  return best;
}

inline Mat hstack(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows()) throw DimensionError("hstack: row counts differ");
  Mat c(a.rows(), a.cols() + b.cols());
  c.set_block(0, 0, a);
  c.set_block(0, a.cols(), b);
  return c;
}

inline Mat vstack(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) throw DimensionError("vstack: column counts differ");
  Mat c(a.rows() + b.rows(), a.cols());
  c.set_block(0, 0, a);
  c.set_block(a.rows(), 0, b);
  return c;
}

inline bool is_symmetric(const Mat& m, double rel_tol = 1e-10) {
  if (!m.square()) return false;
  return norm_fro(m - m.transpose()) <= rel_tol * std::max(norm_fro(m), 1e-300);
}

inline Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

// ---------------------------------------------------------------------------
// LU with partial pivoting

struct LUFactors {
  Mat lu;                         // unit-lower L below the diagonal, U on and above
  std::vector<std::size_t> perm;  // row i of PA is row perm[i] of A
  int sign = 1;                   // parity of perm
  bool exactly_singular = false;  // a zero pivot was met
};

inline LUFactors lu_decompose(const Mat& a) {
  if (!a.square()) throw DimensionError("lu_decompose: matrix not square");
  const std::size_t n = a.rows();
  LUFactors f{a, std::vector<std::size_t>(n), 1, false};
  std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
  Mat& lu = f.lu;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu(i, k)) > std::abs(lu(p, k))) p = i;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(p, j));
      std::swap(f.perm[k], f.perm[p]);
      f.sign = -f.sign;
    }
    const double pivot = lu(k, k);
    if (pivot == 0.0) {
      f.exactly_singular = true;
      continue;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double l = lu(i, k) / pivot;
      lu(i, k) = l;
      if (l == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= l * lu(k, j);
    }
  }
  return f;
}

inline double det(const Mat& m) {
  if (!m.square()) throw DimensionError("det: matrix not square");
  if (m.rows() == 0) return 1.0;
  const LUFactors f = lu_decompose(m);
  if (f.exactly_singular) return 0.0;
  double d = f.sign;
  for (std::size_t i = 0; i < m.rows(); ++i) d *= f.lu(i, i);
  return d;
}

/// Inverse via LU. Rejects |det| <= tol_singular * (max row sum).
inline Mat inverse(const Mat& m, double tol_singular = 1e-12) {
  if (!m.square()) throw DimensionError("inverse: matrix not square");
  const std::size_t n = m.rows();
  const LUFactors f = lu_decompose(m);
  double d = f.exactly_singular ? 0.0 : static_cast<double>(f.sign);
  if (!f.exactly_singular)
    for (std::size_t i = 0; i < n; ++i) d *= f.lu(i, i);
  if (f.exactly_singular || !(std::abs(d) > tol_singular * norm_inf(m))) {
    std::ostringstream os;
    os << "inverse: matrix singular to tolerance (det = " << d << ")";
    throw SingularityError(os.str(), d);
  }
  Mat inv(n, n);
  std::vector<double> x(n);
  for (std::size_t c = 0; c < n; ++c) {
    // forward substitution on permuted unit vector
    for (std::size_t i = 0; i < n; ++i) {
      double s = f.perm[i] == c ? 1.0 : 0.0;
      for (std::size_t k = 0; k < i; ++k) s -= f.lu(i, k) * x[k];
      x[i] = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double s = x[ii];
      for (std::size_t k = ii + 1; k < n; ++k) s -= f.lu(ii, k) * x[k];
      x[ii] = s / f.lu(ii, ii);
    }
    for (std::size_t i = 0; i < n; ++i) inv(i, c) = x[i];
  }
  return inv;
}

// ---------------------------------------------------------------------------
// Singular values (one-sided Jacobi)

struct SVDResult {
  std::vector<double> sigma;  // descending, one per column of the input
  Mat V;                      // right singular vectors as columns
};

inline SVDResult svd_jacobi(const Mat& m) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  Mat a = m;
  Mat v = Mat::identity(cols);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          alpha += a(i, p) * a(i, p);
          beta += a(i, q) * a(i, q);
          gamma += a(i, p) * a(i, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const double ap = a(i, p), aq = a(i, q);
          a(i, p) = c * ap - s * aq;
          a(i, q) = s * ap + c * aq;
        }
        for (std::size_t i = 0; i < cols; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }
  std::vector<double> sigma(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += a(i, j) * a(i, j);
    sigma[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(cols);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });
  SVDResult r{std::vector<double>(cols), Mat(cols, cols)};
  for (std::size_t k = 0; k < cols; ++k) {
    r.sigma[k] = sigma[order[k]];
    for (std::size_t i = 0; i < cols; ++i) r.V(i, k) = v(i, order[k]);
  }
  return r;
}

enum class NullspaceMethod { SingularValues, PivotedQR };

struct NullspaceResult {
  Mat basis;                    // cols x k, orthonormal columns
  std::vector<double> singular_values;
  double threshold = 0.0;       // tol * largest singular value
  NullspaceMethod method = NullspaceMethod::SingularValues;

  std::size_t dimension() const noexcept { return basis.cols(); }
};

/// Orthonormal basis of {v : |Mv| <= tol |M|}, decided by singular values
/// relative to the largest one.
inline NullspaceResult nullspace(const Mat& m, double tol) {
  if (!(tol > 0.0)) throw DomainError("nullspace: tolerance must be positive");
  const SVDResult s = svd_jacobi(m);
  const double smax = s.sigma.empty() ? 0.0 : s.sigma.front();
  NullspaceResult r;
  r.singular_values = s.sigma;
  r.threshold = tol * smax;
  std::vector<std::size_t> null_cols;
  for (std::size_t k = 0; k < s.sigma.size(); ++k)
    if (s.sigma[k] <= r.threshold) null_cols.push_back(k);
  r.basis = Mat(m.cols(), null_cols.size());
  for (std::size_t c = 0; c < null_cols.size(); ++c)
    for (std::size_t i = 0; i < m.cols(); ++i) r.basis(i, c) = s.V(i, null_cols[c]);
  return r;
}

inline std::size_t rank(const Mat& m, double tol = 1e-12) {
  return m.cols() - nullspace(m, tol).dimension();
}

// ---------------------------------------------------------------------------
// Gram-Schmidt

/// Modified Gram-Schmidt over the columns of `vectors` with one full
/// re-orthogonalization pass. A column whose residual falls below
/// tol * (its original norm) is rejected as dependent.
inline Mat orthonormalize(const Mat& vectors, double tol = 1e-10) {
  const std::size_t dim = vectors.rows();
  const std::size_t k = vectors.cols();
  Mat q(dim, k);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> v(dim);
    double original = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      v[i] = vectors(i, j);
      original += v[i] * v[i];
    }
    original = std::sqrt(original);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t p = 0; p < j; ++p) {
        double dot = 0.0;
        for (std::size_t i = 0; i < dim; ++i) dot += q(i, p) * v[i];
        for (std::size_t i = 0; i < dim; ++i) v[i] -= dot * q(i, p);
      }
    }
    double nv = 0.0;
    for (double x : v) nv += x * x;
    nv = std::sqrt(nv);
    if (original == 0.0 || nv <= tol * original) {
      throw RankDeficiencyError("orthonormalize: input vectors are linearly dependent");
    }
    for (std::size_t i = 0; i < dim; ++i) q(i, j) = v[i] / nv;
  }
  return q;
}

// ---------------------------------------------------------------------------
// Matrix exponential

/// Scaling and squaring around a truncated Taylor series; the scaled
/// argument has 1-norm at most 1/4.
inline Mat expm(const Mat& m) {
  if (!m.square()) throw DimensionError("expm: matrix not square");
  const std::size_t n = m.rows();
  const double nrm = norm_one(m);
  int squarings = 0;
  if (nrm > 0.25) squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.25)));
  const Mat a = std::ldexp(1.0, -squarings) * m;
  Mat result = Mat::identity(n);
  Mat term = Mat::identity(n);
  for (int k = 1; k <= 30; ++k) {
    term = (1.0 / k) * (term * a);
    result += term;
    if (norm_one(term) <= 1e-18 * norm_one(result)) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition (cyclic Jacobi)

struct SymEigen {
  std::vector<double> values;  // ascending
  Mat vectors;                 // matching eigenvectors as columns
};

inline SymEigen sym_eigen(const Mat& m) {
  if (!m.square()) throw DimensionError("sym_eigen: matrix not square");
  const std::size_t n = m.rows();
  Mat a = symmetrized(m);
  Mat v = Mat::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off <= 1e-30 * std::max(1e-300, norm_fro(a) * norm_fro(a))) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  SymEigen r{std::vector<double>(n), Mat(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    r.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) r.vectors(i, k) = v(i, order[k]);
  }
  return r;
}

/// Positive part (M + |M|)/2 of a symmetric matrix: eigenvalues clipped at 0.
inline Mat positive_part(const Mat& m) {
  const SymEigen e = sym_eigen(m);
  const std::size_t n = m.rows();
  Mat r(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = std::max(e.values[k], 0.0);
    if (lam == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) r(i, j) += lam * e.vectors(i, k) * e.vectors(j, k);
  }
  return r;
}

}  // namespace slspec
