#pragma once

// Lagrangian frames, boundary presets and the boundary-adapted symplectic
// change of basis M3 used to reduce det(gamma(T) Z0, Z1) to an n x n
// determinant.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "slspec/errors.hpp"
#include "slspec/numkernel.hpp"

namespace slspec {

/// J = [[0, -I], [I, 0]] in (x, y) block order. With this sign, z' = J B z
/// reproduces y' = P^-1 x - P^-1 Q y.
inline Mat standard_J(std::size_t n) {
  if (n == 0) throw DimensionError("standard_J: n must be positive");
  Mat j(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    j(i, n + i) = -1.0;
    j(n + i, i) = 1.0;
  }
  return j;
}

/// Frame Z = (X; Y) of a Lagrangian subspace: X^T Y = Y^T X and the stacked
/// 2n x n matrix has full column rank.
class LagFrame {
 public:
  static constexpr double kLagrangianTol = 1e-10;

  LagFrame(Mat x, Mat y) : X_(std::move(x)), Y_(std::move(y)) {
    if (!X_.square() || X_.rows() == 0 || X_.rows() != Y_.rows() || X_.cols() != Y_.cols())
      throw DimensionError("LagFrame: X and Y must both be n x n");
    if (!X_.all_finite() || !Y_.all_finite()) throw DomainError("LagFrame: non-finite entries");
    const Mat z = stacked();
    const double scale = std::max(1.0, norm_fro(z) * norm_fro(z));
    if (norm_fro(X_.transpose() * Y_ - Y_.transpose() * X_) > kLagrangianTol * scale)
      throw InvariantError("LagFrame: X^T Y != Y^T X, subspace is not Lagrangian");
    if (rank(z, 1e-10) != n()) throw InvariantError("LagFrame: frame is rank deficient");
  }

  /// Frame from a 2n x n stacked matrix.
  static LagFrame from_stacked(const Mat& z) {
    if (z.rows() != 2 * z.cols()) throw DimensionError("LagFrame: stacked frame must be 2n x n");
    const std::size_t n = z.cols();
    return LagFrame(z.block(0, 0, n, n), z.block(n, 0, n, n));
  }

  std::size_t n() const noexcept { return X_.rows(); }
  const Mat& X() const noexcept { return X_; }
  const Mat& Y() const noexcept { return Y_; }
  Mat stacked() const { return vstack(X_, Y_); }

 private:
  Mat X_, Y_;
};

struct BoundaryPair {
  LagFrame Z0;  // condition at t = 0
  LagFrame Z1;  // condition at t = T

  BoundaryPair(LagFrame z0, LagFrame z1) : Z0(std::move(z0)), Z1(std::move(z1)) {
    if (Z0.n() != Z1.n()) throw DimensionError("BoundaryPair: frames have different dimension");
  }
  std::size_t n() const noexcept { return Z0.n(); }
};

/// y = 0.
inline LagFrame preset_dirichlet(std::size_t n) { return LagFrame(Mat::identity(n), Mat(n, n)); }

/// x = 0.
inline LagFrame preset_neumann(std::size_t n) { return LagFrame(Mat(n, n), Mat::identity(n)); }

/// cos(theta) y + sin(theta) x = 0 coordinatewise; frame column (cos; -sin).
inline LagFrame preset_robin(std::span<const double> theta) {
  const std::size_t n = theta.size();
  if (n == 0) throw DimensionError("preset_robin: need at least one angle");
  Mat x(n, n), y(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(theta[i] >= 0.0 && theta[i] <= M_PI / 2 + 1e-15))
      throw DomainError("preset_robin: angle must lie in [0, pi/2]");
    x(i, i) = std::cos(theta[i]);
    y(i, i) = -std::sin(theta[i]);
  }
  return LagFrame(std::move(x), std::move(y));
}

inline LagFrame preset_robin(double theta, std::size_t n = 1) {
  const std::vector<double> t(n, theta);
  return preset_robin(std::span<const double>(t));
}

struct Intersection {
  std::size_t k0 = 0;
  Mat basis;                  // 2n x k0, orthonormal columns spanning the intersection
  double smallest_kept = 0.0; // smallest singular value classified as non-null
  double largest_null = 0.0;  // largest singular value classified as null
  bool near_intersection = false;  // a non-null singular value within 1e3 x threshold
};

namespace detail {

// Greedy pivoted Gram-Schmidt: repeatedly takes the candidate column with
// the largest residual against `against` plus the vectors already taken
// (ties broken by column index), until `count` vectors are collected.
inline Mat pivoted_completion(const Mat& against, const Mat& candidates, std::size_t count) {
  const std::size_t dim = candidates.rows();
  std::vector<std::vector<double>> basis;
  for (std::size_t c = 0; c < against.cols(); ++c) {
    std::vector<double> v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = against(i, c);
    basis.push_back(std::move(v));
  }
  const std::size_t fixed = basis.size();
  std::vector<bool> used(candidates.cols(), false);
  auto residual = [&](std::size_t c) {
    std::vector<double> v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = candidates(i, c);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        double dot = 0.0;
        for (std::size_t i = 0; i < dim; ++i) dot += b[i] * v[i];
        for (std::size_t i = 0; i < dim; ++i) v[i] -= dot * b[i];
      }
    return v;
  };
  auto norm = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  for (std::size_t taken = 0; taken < count; ++taken) {
    std::vector<double> norms(candidates.cols(), -1.0);
    double best = -1.0;
    for (std::size_t c = 0; c < candidates.cols(); ++c) {
      if (used[c]) continue;
      norms[c] = norm(residual(c));
      best = std::max(best, norms[c]);
    }
    if (best <= 1e-8) throw RankDeficiencyError("basis completion: candidates do not span the required space");
    std::size_t pick = 0;
    while (used[pick] || norms[pick] < (1.0 - 1e-8) * best) ++pick;
    used[pick] = true;
    std::vector<double> v = residual(pick);
    const double nv = norm(v);
    for (double& x : v) x /= nv;
    basis.push_back(std::move(v));
  }
  Mat out(dim, count);
  for (std::size_t c = 0; c < count; ++c)
    for (std::size_t i = 0; i < dim; ++i) out(i, c) = basis[fixed + c][i];
  return out;
}

// Orthogonal projector onto the column span of an orthonormal 2n x k matrix.
inline Mat projector(const Mat& q) { return q * q.transpose(); }

}  // namespace detail

/// Intersection of the subspaces spanned by Z0 and Z1, computed from the
/// null space of (Z0, -Z1) mapped back through Z0. The returned basis is
/// canonical: the projections of the orthonormalized Z0 columns onto the
/// intersection, Gram-Schmidt-reduced in pivoted column order.
inline Intersection intersection(const Mat& z0, const Mat& z1, double tol = 1e-10) {
  if (z0.rows() != z1.rows()) throw DimensionError("intersection: frames live in different spaces");
  const Mat q0 = orthonormalize(z0);
  const Mat q1 = orthonormalize(z1);
  const NullspaceResult ns = nullspace(hstack(q0, -q1), tol);
  Intersection r;
  r.k0 = ns.dimension();
  const auto& sv = ns.singular_values;
  for (double s : sv) {
    if (s > ns.threshold) {
      r.smallest_kept = s;
    } else {
      r.largest_null = std::max(r.largest_null, s);
    }
  }
  r.near_intersection = r.smallest_kept > 0.0 && r.smallest_kept <= 1e3 * ns.threshold;
  if (r.k0 == 0) {
    r.basis = Mat(z0.rows(), 0);
    return r;
  }
  // raw span of the intersection, then canonicalize against q0's columns
  const Mat raw = orthonormalize(q0 * ns.basis.block(0, 0, q0.cols(), r.k0));
  r.basis = detail::pivoted_completion(Mat(z0.rows(), 0), detail::projector(raw) * q0, r.k0);
  return r;
}

inline Intersection intersection(const LagFrame& z0, const LagFrame& z1, double tol = 1e-10) {
  return intersection(z0.stacked(), z1.stacked(), tol);
}

/// Boundary-adapted symplectic basis change. M1^T = (d_1..d_n, J d_1..J d_n)
/// with d_1..d_k0 spanning Lambda0 ∩ Lambda1 and d_1..d_n spanning Lambda0,
/// so M1 maps Lambda0 onto span(e_1..e_n); M3 = shear(-X1 Y1^-1) * M1 also
/// maps the rest of Lambda1 into the y block.
struct Normalizer {
  std::size_t n = 0;
  std::size_t k0 = 0;
  Mat M1, M3, M3inv;
  Mat tildeX1, tildeY1;  // (n - k0) x (n - k0)
  Intersection meta;
};

inline Normalizer build_normalizer(const LagFrame& z0, const LagFrame& z1, double tol = 1e-10) {
  if (z0.n() != z1.n()) throw DimensionError("build_normalizer: frame dimensions differ");
  const std::size_t n = z0.n();
  const Mat J = standard_J(n);
  Normalizer nrm;
  nrm.n = n;
  nrm.meta = intersection(z0, z1, tol);
  const std::size_t k0 = nrm.k0 = nrm.meta.k0;
  const std::size_t r = n - k0;

  const Mat q0 = orthonormalize(z0.stacked());
  const Mat q1 = orthonormalize(z1.stacked());
  const Mat v0 = nrm.meta.basis;

  // d_1..d_n: V0 basis extended to an orthonormal basis of Lambda0. M1 is
  // the coordinate change d_i -> e_i, d_{n+i} = J d_i -> e_{n+i}.
  const Mat d = hstack(v0, detail::pivoted_completion(v0, q0, r));
  nrm.M1 = hstack(d, J * d).transpose();

  // frame of V1 = Lambda1 minus V0, expressed in M1 coordinates
  const Mat f = detail::pivoted_completion(v0, q1, r);
  const Mat w = nrm.M1 * f;
  nrm.tildeX1 = w.block(k0, 0, r, r);
  nrm.tildeY1 = w.block(n + k0, 0, r, r);

  Mat shear = Mat::identity(2 * n);
  Mat shear_inv = Mat::identity(2 * n);
  if (r > 0) {
    Mat y_inv;
    try {
      y_inv = inverse(nrm.tildeY1, 1e-10);
    } catch (const SingularityError& e) {
      throw SingularityError("build_normalizer: reduced frame block Y1 is singular; boundary frames are ill-conditioned",
                             e.determinant());
    }
    // -X1 Y1^-1 is symmetric for a Lagrangian V1; symmetrize away roundoff
    const Mat s = symmetrized(-(nrm.tildeX1 * y_inv));
    shear.set_block(k0, n + k0, s);
    shear_inv.set_block(k0, n + k0, -s);
  }
  nrm.M3 = shear * nrm.M1;
  nrm.M3inv = nrm.M1.transpose() * shear_inv;
  return nrm;
}

inline Normalizer build_normalizer(const BoundaryPair& bc, double tol = 1e-10) {
  return build_normalizer(bc.Z0, bc.Z1, tol);
}

/// n x n matrix with entry (i, j) = (M3 M M3^-1)(i + k0, j).
inline Mat project(const Normalizer& nrm, const Mat& m) {
  if (m.rows() != 2 * nrm.n || m.cols() != 2 * nrm.n) throw DimensionError("project: matrix must be 2n x 2n");
  return (nrm.M3 * m * nrm.M3inv).block(nrm.k0, 0, nrm.n, nrm.n);
}

/// max |M^T J M - J|.
inline double symplectic_defect(const Mat& m) {
  const Mat J = standard_J(m.rows() / 2);
  return max_abs(m.transpose() * J * m - J);
}

}  // namespace slspec
