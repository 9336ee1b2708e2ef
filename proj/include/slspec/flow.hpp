#pragma once

// Fundamental solutions of z' = J B_lambda(t) z by fixed-step classical RK4,
// and the iterated integrals F_k that are the lambda-Taylor coefficients of
// gamma_0(T)^-1 gamma_lambda(T).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "slspec/coeffs.hpp"
#include "slspec/errors.hpp"
#include "slspec/numkernel.hpp"
#include "slspec/symplectic.hpp"

namespace slspec {

inline constexpr std::size_t kDefaultSteps = 2048;
inline constexpr std::size_t kMinSteps = 16;

/// J B_0 and J D sampled at every RK4 stage node t = i h / 2, i = 0..2N.
/// Building the table validates the coefficient invariants at each node;
/// afterwards J B_lambda = JB0 + lambda JD costs one axpy per stage.
class StageTable {
 public:
  StageTable(const SLSystem& sys, std::size_t steps) : n_(sys.n()), steps_(steps), T_(sys.T()) {
    if (steps_ < kMinSteps) throw DomainError("integrator needs at least 16 steps");
    const Mat J = standard_J(n_);
    jb0_.reserve(2 * steps_ + 1);
    jd_.reserve(2 * steps_ + 1);
    for (std::size_t i = 0; i <= 2 * steps_; ++i) {
      const double t = node(i);
      sys.check_node(t);
      jb0_.push_back(J * assemble_B(sys, 0.0, t));
      const Mat d = assemble_D(sys, t);
      d_.push_back(d);
      jd_.push_back(J * d);
    }
    r1_zero_ = sys.R1().identically_zero();
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t steps() const noexcept { return steps_; }
  double T() const noexcept { return T_; }
  double h() const noexcept { return T_ / static_cast<double>(steps_); }
  bool r1_identically_zero() const noexcept { return r1_zero_; }

  /// Time of half-step node i.
  double node(std::size_t i) const noexcept {
    return i == 2 * steps_ ? T_ : T_ * static_cast<double>(i) / static_cast<double>(2 * steps_);
  }

  const Mat& JB0(std::size_t i) const { return jb0_[i]; }
  const Mat& JD(std::size_t i) const { return jd_[i]; }
  const Mat& D(std::size_t i) const { return d_[i]; }

  Mat JB(double lambda, std::size_t i) const {
    Mat m = jb0_[i];
    if (lambda != 0.0) m.add_scaled(jd_[i], lambda);
    return m;
  }

 private:
  std::size_t n_;
  std::size_t steps_;
  double T_;
  bool r1_zero_ = false;
  std::vector<Mat> jb0_, jd_, d_;
};

struct FlowResult {
  double lambda = 0.0;
  std::vector<double> grid;   // N + 1 uniform nodes on [0, T]
  std::vector<Mat> gamma;     // gamma_lambda at each node
  Mat monodromy;              // gamma_lambda(T)
  double max_symplectic_defect = 0.0;
  double symplectic_tolerance = 0.0;
  bool accuracy_warning = false;  // defect beyond 100 x tolerance
};

/// Symplecticity tolerance for a run with `steps` steps: 1e-8 at the
/// default step count, growing linearly with node count beyond it.
inline double symplectic_tolerance(std::size_t steps) {
  return 1e-8 * std::max(1.0, static_cast<double>(steps) / static_cast<double>(kDefaultSteps));
}

namespace detail {

inline Mat rk4_step(const StageTable& tab, double lambda, std::size_t step, const Mat& g) {
  const double h = tab.h();
  const std::size_t i0 = 2 * step;
  const Mat a0 = tab.JB(lambda, i0);
  const Mat a1 = tab.JB(lambda, i0 + 1);
  const Mat a2 = tab.JB(lambda, i0 + 2);
  const Mat k1 = a0 * g;
  Mat tmp = g;
  tmp.add_scaled(k1, 0.5 * h);
  const Mat k2 = a1 * tmp;
  tmp = g;
  tmp.add_scaled(k2, 0.5 * h);
  const Mat k3 = a1 * tmp;
  tmp = g;
  tmp.add_scaled(k3, h);
  const Mat k4 = a2 * tmp;
  Mat next = g;
  next.add_scaled(k1, h / 6.0);
  next.add_scaled(k2, h / 3.0);
  next.add_scaled(k3, h / 3.0);
  next.add_scaled(k4, h / 6.0);
  return next;
}

}  // namespace detail

/// gamma_lambda(T) only, without storing the trajectory.
inline Mat monodromy(const StageTable& tab, double lambda) {
  Mat g = Mat::identity(2 * tab.n());
  for (std::size_t s = 0; s < tab.steps(); ++s) g = detail::rk4_step(tab, lambda, s, g);
  return g;
}

inline FlowResult integrate_flow(const StageTable& tab, double lambda) {
  const std::size_t N = tab.steps();
  const Mat J = standard_J(tab.n());
  FlowResult r;
  r.lambda = lambda;
  r.symplectic_tolerance = symplectic_tolerance(N);
  r.grid.reserve(N + 1);
  r.gamma.reserve(N + 1);
  Mat g = Mat::identity(2 * tab.n());
  for (std::size_t s = 0; s <= N; ++s) {
    if (s > 0) g = detail::rk4_step(tab, lambda, s - 1, g);
    r.grid.push_back(tab.node(2 * s));
    r.max_symplectic_defect = std::max(r.max_symplectic_defect, norm_fro(g.transpose() * J * g - J));
    r.gamma.push_back(g);
  }
  r.monodromy = g;
  r.accuracy_warning = r.max_symplectic_defect > 100.0 * r.symplectic_tolerance;
  return r;
}

inline FlowResult integrate_flow(const SLSystem& sys, double lambda, std::size_t steps = kDefaultSteps) {
  return integrate_flow(StageTable(sys, steps), lambda);
}

struct IterIntegrals {
  std::size_t order = 0;
  std::vector<Mat> F;  // F_1 .. F_m
  Mat gamma0_T;        // gamma_0(T) from the same pass
};

/// Jointly integrates gamma_0' = J B_0 gamma_0 and
/// H_k' = J gamma_0^T D gamma_0 H_{k-1} (H_0 = I, H_k(0) = 0) with shared
/// RK4 stages; F_k = H_k(T).
inline IterIntegrals iterated_integrals(const StageTable& tab, std::size_t order) {
  if (order == 0) throw DomainError("iterated_integrals: order must be at least 1");
  const std::size_t dim = 2 * tab.n();
  const Mat J = standard_J(tab.n());
  const Mat I = Mat::identity(dim);
  const double h = tab.h();

  // state: [gamma0, H_1, ..., H_m]
  using State = std::vector<Mat>;
  State y(order + 1, Mat(dim, dim));
  y[0] = I;

  auto rhs = [&](std::size_t node, const State& s) {
    State k(order + 1);
    k[0] = tab.JB0(node) * s[0];
    const Mat jdhat = J * (s[0].transpose() * tab.D(node) * s[0]);
    k[1] = jdhat;  // H_0 = I
    for (std::size_t m = 2; m <= order; ++m) k[m] = jdhat * s[m - 1];
    return k;
  };
  auto axpy = [](const State& base, const State& k, double a) {
    State out = base;
    for (std::size_t i = 0; i < out.size(); ++i) out[i].add_scaled(k[i], a);
    return out;
  };

  if (!tab.r1_identically_zero()) {
    for (std::size_t s = 0; s < tab.steps(); ++s) {
      const std::size_t i0 = 2 * s;
      const State k1 = rhs(i0, y);
      const State k2 = rhs(i0 + 1, axpy(y, k1, 0.5 * h));
      const State k3 = rhs(i0 + 1, axpy(y, k2, 0.5 * h));
      const State k4 = rhs(i0 + 2, axpy(y, k3, h));
      for (std::size_t i = 0; i <= order; ++i) {
        y[i].add_scaled(k1[i], h / 6.0);
        y[i].add_scaled(k2[i], h / 3.0);
        y[i].add_scaled(k3[i], h / 3.0);
        y[i].add_scaled(k4[i], h / 6.0);
      }
    }
  } else {
    y[0] = monodromy(tab, 0.0);
  }
  IterIntegrals out;
  out.order = order;
  out.gamma0_T = y[0];
  out.F.assign(y.begin() + 1, y.end());
  return out;
}

inline IterIntegrals iterated_integrals(const SLSystem& sys, std::size_t order, std::size_t steps = kDefaultSteps) {
  return iterated_integrals(StageTable(sys, steps), order);
}

}  // namespace slspec
