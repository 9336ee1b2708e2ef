#pragma once

// Coefficient paths P, Q, R, R1 of the Sturm-Liouville system
//   -(P y' + Q y)' + Q^T y' + (R + lambda R1) y = 0   on [0, T]
// and the Hamiltonian coefficient B_lambda obtained through x = P y' + Q y.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "slspec/errors.hpp"
#include "slspec/numkernel.hpp"

namespace slspec {

struct ConstantPath {
  Mat value;
  friend bool operator==(const ConstantPath&, const ConstantPath&) = default;
};

/// sum_k coefficients[k] * t^k
struct PolynomialPath {
  std::vector<Mat> coefficients;
  friend bool operator==(const PolynomialPath&, const PolynomialPath&) = default;
};

/// Piecewise-linear interpolation through (times[i], values[i]).
struct SampledPath {
  std::vector<double> times;
  std::vector<Mat> values;
  friend bool operator==(const SampledPath&, const SampledPath&) = default;
};

/// A continuous path of n x n matrices on [0, T].
class CoeffPath {
 public:
  using Variant = std::variant<ConstantPath, PolynomialPath, SampledPath>;

  CoeffPath() : CoeffPath(ConstantPath{Mat(1, 1)}) {}

  explicit CoeffPath(ConstantPath p) : v_(std::move(p)) { validate(); }
  explicit CoeffPath(PolynomialPath p) : v_(std::move(p)) { validate(); }
  explicit CoeffPath(SampledPath p) : v_(std::move(p)) { validate(); }

  static CoeffPath constant(Mat m) { return CoeffPath(ConstantPath{std::move(m)}); }
  static CoeffPath constant_scalar(double c) { return constant(Mat{{c}}); }
  static CoeffPath zero(std::size_t n) { return constant(Mat(n, n)); }
  static CoeffPath identity(std::size_t n) { return constant(Mat::identity(n)); }
  static CoeffPath polynomial(std::vector<Mat> c) { return CoeffPath(PolynomialPath{std::move(c)}); }
  static CoeffPath sampled(std::vector<double> t, std::vector<Mat> v) {
    return CoeffPath(SampledPath{std::move(t), std::move(v)});
  }

  std::size_t dim() const noexcept { return dim_; }
  const Variant& variant() const noexcept { return v_; }

  friend bool operator==(const CoeffPath& a, const CoeffPath& b) { return a.v_ == b.v_; }

  bool is_constant() const noexcept { return std::holds_alternative<ConstantPath>(v_); }
  bool is_sampled() const noexcept { return std::holds_alternative<SampledPath>(v_); }

  /// True when the path is the zero matrix everywhere.
  bool identically_zero() const {
    auto zero = [](const Mat& m) { return max_abs(m) == 0.0; };
    return std::visit(
        [&](const auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, ConstantPath>) {
            return zero(p.value);
          } else if constexpr (std::is_same_v<P, PolynomialPath>) {
            return std::all_of(p.coefficients.begin(), p.coefficients.end(), zero);
          } else {
            return std::all_of(p.values.begin(), p.values.end(), zero);
          }
        },
        v_);
  }

  /// Evaluation without a horizon check; Sampled paths still reject
  /// points outside their grid.
  Mat operator()(double t) const {
    return std::visit(
        [&](const auto& p) -> Mat {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, ConstantPath>) {
            return p.value;
          } else if constexpr (std::is_same_v<P, PolynomialPath>) {
            Mat acc = p.coefficients.back();
            for (std::size_t k = p.coefficients.size() - 1; k-- > 0;) {
              acc *= t;
              acc += p.coefficients[k];
            }
            return acc;
          } else {
            const auto& ts = p.times;
            const double slack = 1e-12 * std::max(1.0, std::abs(ts.back()));
            if (t < ts.front() - slack || t > ts.back() + slack) {
              std::ostringstream os;
              os << "sampled path evaluated at t = " << t << " outside [" << ts.front() << ", " << ts.back() << "]";
              throw DomainError(os.str());
            }
            auto it = std::upper_bound(ts.begin(), ts.end(), t);
            std::size_t hi = static_cast<std::size_t>(it - ts.begin());
            hi = std::clamp<std::size_t>(hi, 1, ts.size() - 1);
            const std::size_t lo = hi - 1;
            const double w = std::clamp((t - ts[lo]) / (ts[hi] - ts[lo]), 0.0, 1.0);
            Mat r = (1.0 - w) * p.values[lo];
            r.add_scaled(p.values[hi], w);
            return r;
          }
        },
        v_);
  }

 private:
  void validate() {
    std::visit(
        [&](const auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, ConstantPath>) {
            set_dim(p.value);
          } else if constexpr (std::is_same_v<P, PolynomialPath>) {
            if (p.coefficients.empty()) throw InvariantError("polynomial path needs at least one coefficient");
            for (const Mat& c : p.coefficients) set_dim(c);
          } else {
            if (p.times.size() < 2 || p.times.size() != p.values.size())
              throw InvariantError("sampled path needs >= 2 nodes and one matrix per node");
            for (std::size_t i = 1; i < p.times.size(); ++i)
              if (!(p.times[i] > p.times[i - 1])) throw InvariantError("sampled path grid not strictly increasing");
            for (const Mat& m : p.values) set_dim(m);
          }
        },
        v_);
  }

  void set_dim(const Mat& m) {
    if (!m.square() || m.rows() == 0) throw DimensionError("coefficient matrix must be square and non-empty");
    if (!m.all_finite()) throw DomainError("coefficient matrix has non-finite entries");
    if (dim_ == 0) dim_ = m.rows();
    if (m.rows() != dim_) throw DimensionError("coefficient matrices of one path differ in size");
  }

  Variant v_;
  std::size_t dim_ = 0;
};

/// Evaluates `path` at t, rejecting t outside [0, horizon].
inline Mat eval_path(const CoeffPath& path, double t, double horizon) {
  const double slack = 1e-12 * std::max(1.0, horizon);
  if (t < -slack || t > horizon + slack) {
    std::ostringstream os;
    os << "coefficient path evaluated at t = " << t << " outside [0, " << horizon << "]";
    throw DomainError(os.str());
  }
  return path(std::clamp(t, 0.0, horizon));
}

/// Number of probe points used when validating symmetry and invertibility.
inline constexpr std::size_t kProbePoints = 64;

/// The system (P, Q, R, R1) on [0, T]. Construction validates the
/// coefficient invariants on a uniform probe grid.
class SLSystem {
 public:
  SLSystem(std::size_t n, double horizon, CoeffPath p, CoeffPath q, CoeffPath r, CoeffPath r1)
      : n_(n), T_(horizon), P_(std::move(p)), Q_(std::move(q)), R_(std::move(r)), R1_(std::move(r1)) {
    if (n_ == 0) throw DimensionError("system dimension must be positive");
    if (!(T_ > 0.0) || !std::isfinite(T_)) throw DomainError("horizon T must be positive and finite");
    for (const CoeffPath* c : {&P_, &Q_, &R_, &R1_})
      if (c->dim() != n_) throw DimensionError("coefficient path dimension differs from n");
    for (std::size_t i = 0; i <= kProbePoints; ++i) check_node(T_ * static_cast<double>(i) / kProbePoints);
    if (const auto* s = std::get_if<SampledPath>(&P_.variant())) check_sampled_nodes(*s);
    for (const CoeffPath* c : {&Q_, &R_, &R1_})
      if (const auto* s = std::get_if<SampledPath>(&c->variant())) check_sampled_nodes(*s);
  }

  std::size_t n() const noexcept { return n_; }
  double T() const noexcept { return T_; }
  const CoeffPath& P() const noexcept { return P_; }
  const CoeffPath& Q() const noexcept { return Q_; }
  const CoeffPath& R() const noexcept { return R_; }
  const CoeffPath& R1() const noexcept { return R1_; }

  /// Symmetry of P, R, R1 and invertibility of P at one node.
  void check_node(double t) const {
    const Mat p = eval_path(P_, t, T_);
    check_symmetric(p, "P", t);
    check_symmetric(eval_path(R_, t, T_), "R", t);
    check_symmetric(eval_path(R1_, t, T_), "R1", t);
    p_inverse(p, t);
  }

  /// P(t)^{-1}, raising SingularityError naming t.
  static Mat p_inverse(const Mat& p, double t) {
    try {
      return inverse(p);
    } catch (const SingularityError& e) {
      std::ostringstream os;
      os << "P(t) is singular at t = " << t;
      throw SingularityError(os.str(), e.determinant());
    }
  }

 private:
  static void check_symmetric(const Mat& m, const char* name, double t) {
    if (norm_fro(m - m.transpose()) > 1e-10 * std::max(norm_fro(m), 1e-300)) {
      std::ostringstream os;
      os << name << "(t) is not symmetric at t = " << t;
      throw InvariantError(os.str());
    }
  }

  void check_sampled_nodes(const SampledPath& s) const {
    const double slack = 1e-9 * std::max(1.0, T_);
    if (s.times.front() > slack || s.times.back() < T_ - slack)
      throw InvariantError("sampled path grid does not cover [0, T]");
    for (double t : s.times)
      if (t >= 0.0 && t <= T_) check_node(t);
  }

  std::size_t n_;
  double T_;
  CoeffPath P_, Q_, R_, R1_;
};

/// B_lambda(t) = [[P^-1, -P^-1 Q], [-Q^T P^-1, Q^T P^-1 Q - R - lambda R1]].
inline Mat assemble_B(const SLSystem& sys, double lambda, double t) {
  const std::size_t n = sys.n();
  const double T = sys.T();
  const Mat pinv = SLSystem::p_inverse(eval_path(sys.P(), t, T), t);
  const Mat q = eval_path(sys.Q(), t, T);
  const Mat qt = q.transpose();
  const Mat pinv_q = pinv * q;
  Mat lower_right = qt * pinv_q - eval_path(sys.R(), t, T);
  lower_right.add_scaled(eval_path(sys.R1(), t, T), -lambda);
  Mat b(2 * n, 2 * n);
  b.set_block(0, 0, pinv);
  b.set_block(0, n, -pinv_q);
  b.set_block(n, 0, -(qt * pinv));
  b.set_block(n, n, lower_right);
  // the off-diagonal blocks are transposes of each other up to roundoff
  return symmetrized(b);
}

/// D(t) = diag(0, -R1(t)), so that B_lambda = B_0 + lambda D.
inline Mat assemble_D(const SLSystem& sys, double t) {
  const std::size_t n = sys.n();
  Mat d(2 * n, 2 * n);
  d.set_block(n, n, -eval_path(sys.R1(), t, sys.T()));
  return d;
}

/// Wraps y'' + lambda R y = 0 as P = I, Q = 0, R = 0, R1 = -R.
inline SLSystem system_for_second_order(const CoeffPath& curvature, double horizon) {
  const std::size_t n = curvature.dim();
  CoeffPath r1 = std::visit(
      [](const auto& p) -> CoeffPath {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ConstantPath>) {
          return CoeffPath(ConstantPath{-p.value});
        } else if constexpr (std::is_same_v<P, PolynomialPath>) {
          PolynomialPath q;
          for (const Mat& c : p.coefficients) q.coefficients.push_back(-c);
          return CoeffPath(std::move(q));
        } else {
          SampledPath q{p.times, {}};
          for (const Mat& v : p.values) q.values.push_back(-v);
          return CoeffPath(std::move(q));
        }
      },
      curvature.variant());
  return SLSystem(n, horizon, CoeffPath::identity(n), CoeffPath::zero(n), CoeffPath::zero(n), std::move(r1));
}

}  // namespace slspec
