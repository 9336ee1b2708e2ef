#pragma once

// Independent spectral references: roots of the scalar Robin secular
// equation, finite-difference Dirichlet eigenvalues, and tail estimates for
// truncated sums over lambda_k ~ c k^2 spectra.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "slspec/coeffs.hpp"
#include "slspec/errors.hpp"
#include "slspec/numkernel.hpp"

namespace slspec {

// ---------------------------------------------------------------------------
// Robin secular equation

/// Left end point of the k-th Robin bracket for sqrt(lambda) (k >= 1).
inline double robin_bracket_lo(std::size_t k, double T) { return (static_cast<double>(k) - 0.5) * M_PI / T; }
inline double robin_bracket_hi(std::size_t k, double T) { return static_cast<double>(k) * M_PI / T; }

/// sin(sT) + tan(theta) s cos(sT): continuous form of
/// tan(sT) = -tan(theta) s.
inline double robin_secular(double s, double theta, double T) {
  return std::sin(s * T) + std::tan(theta) * s * std::cos(s * T);
}

/// First K eigenvalues of y'' + lambda y = 0, y(0) = 0,
/// cos(theta) y(T) + sin(theta) y'(T) = 0.
inline std::vector<double> robin_roots(double theta, double T, std::size_t K) {
  if (!(theta >= 0.0 && theta <= M_PI / 2 + 1e-15)) throw DomainError("robin_roots: theta must lie in [0, pi/2]");
  if (!(T > 0.0)) throw DomainError("robin_roots: T must be positive");
  std::vector<double> out;
  out.reserve(K);
  const bool dirichlet = theta == 0.0;
  const bool neumann = std::abs(theta - M_PI / 2) <= 1e-15;
  for (std::size_t k = 1; k <= K; ++k) {
    double s;
    if (dirichlet) {
      s = robin_bracket_hi(k, T);
    } else if (neumann) {
      s = robin_bracket_lo(k, T);
    } else {
      double lo = robin_bracket_lo(k, T);
      double hi = robin_bracket_hi(k, T);
      double flo = robin_secular(lo, theta, T);
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = robin_secular(mid, theta, T);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fm > 0.0) == (flo > 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      s = 0.5 * (lo + hi);
    }
    out.push_back(s * s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Finite-difference Dirichlet oracle

namespace detail {

// Number of eigenvalues below sigma of the pencil (K, blockdiag(R_i)), where
// K is the block-tridiagonal second-difference matrix (2/h^2 on the diagonal
// blocks, -1/h^2 off the diagonal). Block LDL^T inertia count: a direct
// generalization of the Sturm sequence for n = 1.
inline std::size_t fd_count_below(const std::vector<Mat>& r_nodes, double h, double sigma) {
  const std::size_t n = r_nodes.front().rows();
  const double diag = 2.0 / (h * h);
  const double off2 = 1.0 / (h * h * h * h);
  std::size_t negatives = 0;
  if (n == 1) {
    double d_prev = 0.0;
    bool first = true;
    for (const Mat& r : r_nodes) {
      double d = diag - sigma * r(0, 0);
      if (!first) d -= off2 / d_prev;
      if (d == 0.0) d = -1e-300;
      if (d < 0.0) ++negatives;
      d_prev = d;
      first = false;
    }
    return negatives;
  }
  Mat d_prev_inv;
  bool first = true;
  for (const Mat& r : r_nodes) {
    Mat d = Mat::identity(n) * diag;
    d.add_scaled(r, -sigma);
    if (!first) d.add_scaled(d_prev_inv, -off2);
    const SymEigen e = sym_eigen(d);
    Mat inv(n, n);
    for (std::size_t k = 0; k < n; ++k) {
      double lam = e.values[k];
      if (lam == 0.0) lam = -1e-300;
      if (lam < 0.0) ++negatives;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv(i, j) += e.vectors(i, k) * e.vectors(j, k) / lam;
    }
    d_prev_inv = std::move(inv);
    first = false;
  }
  return negatives;
}

}  // namespace detail

/// K smallest eigenvalues of -y'' = lambda R(t) y with y(0) = y(T) = 0,
/// discretized by central differences on M uniform intervals. Eigenvalues
/// are isolated by bisection on the inertia count.
inline std::vector<double> fd_dirichlet_eigs(const CoeffPath& R, double T, std::size_t mesh, std::size_t K) {
  if (mesh < 64) throw DomainError("fd_dirichlet_eigs: mesh must have at least 64 intervals");
  if (!(T > 0.0)) throw DomainError("fd_dirichlet_eigs: T must be positive");
  const std::size_t n = R.dim();
  const double h = T / static_cast<double>(mesh);
  std::vector<Mat> r_nodes;
  r_nodes.reserve(mesh - 1);
  double min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < mesh; ++i) {
    Mat r = eval_path(R, static_cast<double>(i) * h, T);
    const double lo = sym_eigen(r).values.front();
    if (!(lo > 0.0)) throw OracleRefusal("fd_dirichlet_eigs: R(t) is not positive definite; oracle covers definite R only");
    min_eig = std::min(min_eig, lo);
    r_nodes.push_back(symmetrized(r));
  }
  if (K > n * (mesh - 1)) throw DomainError("fd_dirichlet_eigs: requested more eigenvalues than unknowns");
  // Gershgorin bound on K (4/h^2) over the smallest mass eigenvalue
  const double upper = 4.0 / (h * h) / min_eig * (1.0 + 1e-12);
  std::vector<double> eigs;
  eigs.reserve(K);
  for (std::size_t k = 1; k <= K; ++k) {
    double lo = eigs.empty() ? 0.0 : eigs.back() * (1.0 - 1e-14);
    double hi = upper;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (detail::fd_count_below(r_nodes, h, mid) >= k) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    eigs.push_back(0.5 * (lo + hi));
  }
  return eigs;
}

// ---------------------------------------------------------------------------
// Tail estimates

enum class TailMethod { IntegralComparison, AsymptoticFit };

inline const char* to_string(TailMethod m) {
  return m == TailMethod::IntegralComparison ? "integral-comparison" : "asymptotic-fit";
}

/// Estimate of sum_{k > K} 1 / lambda_k^m.
struct TailEstimate {
  std::size_t order = 1;
  std::size_t truncation = 0;
  double value = 0.0;
  TailMethod method = TailMethod::IntegralComparison;
  double fit_scale = 0.0;   // c in lambda_k ~ c k^2 (or slope^2 for the shifted fit)
  double fit_shift = 0.0;   // b in sqrt(lambda_k) ~ a k + b, asymptotic fit only
  double fit_residual = 0.0;

  static TailEstimate none(std::size_t m = 1) {
    TailEstimate t;
    t.order = m;
    return t;
  }
};

/// Fits the last K/4 eigenvalues against Weyl-type growth and integrates the
/// fitted model beyond K with a midpoint correction:
///   sum_{k > K} f(k) ~ int_{K + 1/2}^inf f(k) dk.
/// IntegralComparison fits lambda_k = c k^2; AsymptoticFit fits
/// sqrt(lambda_k) = a k + b. Refuses when the relative fit residual exceeds 10%.
inline TailEstimate tail_sum(const std::vector<double>& eigs, std::size_t m,
                             TailMethod method = TailMethod::IntegralComparison) {
  if (m == 0) throw DomainError("tail_sum: order must be positive");
  const std::size_t K = eigs.size();
  if (K < 10) throw OracleRefusal("tail_sum: need at least 10 eigenvalues");
  for (std::size_t i = 1; i < K; ++i)
    if (eigs[i] < eigs[i - 1]) throw DomainError("tail_sum: eigenvalues must be sorted ascending");
  if (!(eigs.front() > 0.0)) throw OracleRefusal("tail_sum: spectrum must be positive");

  const std::size_t first = K - std::max<std::size_t>(K / 4, 2);
  TailEstimate t;
  t.order = m;
  t.truncation = K;
  t.method = method;
  const double md = static_cast<double>(m);
  const double kk = static_cast<double>(K) + 0.5;

  if (method == TailMethod::IntegralComparison) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = first; i < K; ++i) {
      const double k = static_cast<double>(i + 1);
      num += eigs[i] * k * k;
      den += k * k * k * k;
    }
    const double c = num / den;
    double resid = 0.0;
    for (std::size_t i = first; i < K; ++i) {
      const double k = static_cast<double>(i + 1);
      resid = std::max(resid, std::abs(eigs[i] / (c * k * k) - 1.0));
    }
    t.fit_scale = c;
    t.fit_residual = resid;
    if (resid > 0.1) throw OracleRefusal("tail_sum: spectrum does not grow like c k^2 (fit residual > 10%)");
    t.value = std::pow(kk, 1.0 - 2.0 * md) / ((2.0 * md - 1.0) * std::pow(c, md));
  } else {
    double sk = 0.0, ss = 0.0, skk = 0.0, sks = 0.0;
    double cnt = 0.0;
    for (std::size_t i = first; i < K; ++i) {
      const double k = static_cast<double>(i + 1);
      const double s = std::sqrt(eigs[i]);
      sk += k;
      ss += s;
      skk += k * k;
      sks += k * s;
      cnt += 1.0;
    }
    const double a = (cnt * sks - sk * ss) / (cnt * skk - sk * sk);
    const double b = (ss - a * sk) / cnt;
    double resid = 0.0;
    for (std::size_t i = first; i < K; ++i) {
      const double k = static_cast<double>(i + 1);
      const double model = a * k + b;
      resid = std::max(resid, std::abs(eigs[i] / (model * model) - 1.0));
    }
    t.fit_scale = a * a;
    t.fit_shift = b;
    t.fit_residual = resid;
    if (!(a > 0.0) || resid > 0.1) throw OracleRefusal("tail_sum: spectrum does not grow like (a k + b)^2 (fit residual > 10%)");
    t.value = std::pow(a * kk + b, 1.0 - 2.0 * md) / (a * (2.0 * md - 1.0));
  }
  return t;
}

/// sum_j 1 / lambda_j^m over the listed eigenvalues.
inline double partial_power_sum(const std::vector<double>& eigs, std::size_t m) {
  double s = 0.0;
  // smallest terms first
  for (auto it = eigs.rbegin(); it != eigs.rend(); ++it) s += std::pow(*it, -static_cast<double>(m));
  return s;
}

}  // namespace slspec
