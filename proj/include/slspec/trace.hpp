#pragma once

// Trace formula: power sums sum_j 1/lambda_j^m from the n x n matrices
//   G_k = P(gamma_0(T) F_k) P(gamma_0(T))^-1,
// plus the m = 1, 2 closed forms, the scalar Robin identity and the
// conjugate-point criterion for y'' + R y = 0.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "slspec/coeffs.hpp"
#include "slspec/errors.hpp"
#include "slspec/flow.hpp"
#include "slspec/numkernel.hpp"
#include "slspec/symplectic.hpp"

namespace slspec {

inline constexpr std::size_t kMaxTraceOrder = 12;

struct GMatrices {
  std::vector<Mat> G;  // G_1 .. G_m
  Mat P0;              // P(gamma_0(T))
  Normalizer normalizer;
};

inline GMatrices compute_G(const StageTable& tab, const BoundaryPair& bc, std::size_t m) {
  if (m == 0 || m > kMaxTraceOrder) throw DomainError("compute_G: order must lie in [1, 12]");
  if (bc.n() != tab.n()) throw DimensionError("compute_G: boundary frames do not match system dimension");
  const IterIntegrals it = iterated_integrals(tab, m);
  GMatrices out;
  out.normalizer = build_normalizer(bc);
  out.P0 = project(out.normalizer, it.gamma0_T);
  Mat p0_inv;
  try {
    p0_inv = inverse(out.P0);
  } catch (const SingularityError& e) {
    throw DegeneracyError("compute_G: P(gamma_0(T)) is singular (det = " + std::to_string(e.determinant()) +
                          "); 0 is an eigenvalue");
  }
  out.G.reserve(m);
  for (const Mat& f : it.F) out.G.push_back(project(out.normalizer, it.gamma0_T * f) * p0_inv);
  return out;
}

inline GMatrices compute_G(const SLSystem& sys, const BoundaryPair& bc, std::size_t m,
                           std::size_t steps = kDefaultSteps) {
  return compute_G(StageTable(sys, steps), bc, m);
}

// ---------------------------------------------------------------------------
// Composition engine

/// All ordered compositions of m (tuples of positive integers summing to
/// m), in lexicographic order. There are 2^(m-1) of them.
inline std::vector<std::vector<std::size_t>> compositions(std::size_t m) {
  std::vector<std::vector<std::size_t>> out;
  if (m == 0) return out;
  std::vector<std::size_t> c(m, 1);  // (1, 1, ..., 1) is lexicographically first
  while (true) {
    out.push_back(c);
    // next: drop the last part, increment the one before it
    if (c.size() == 1) break;
    const std::size_t last = c.back();
    c.pop_back();
    ++c.back();
    // refill with ones so the sum stays m
    for (std::size_t i = 1; i < last; ++i) c.push_back(1);
  }
  return out;
}

inline double trace_of_product(const std::vector<Mat>& G, const std::vector<std::size_t>& parts) {
  Mat acc = G.at(parts.front() - 1);
  for (std::size_t i = 1; i < parts.size(); ++i) acc = acc * G.at(parts[i] - 1);
  return trace(acc);
}

/// sum_j 1/lambda_j^m = m sum_k (-1)^k / k sum_{j_1+..+j_k = m} Tr(G_j1 ... G_jk).
inline double power_sum(const std::vector<Mat>& G, std::size_t m) {
  if (m == 0 || G.size() < m) throw DomainError("power_sum: need G_1 .. G_m");
  std::vector<double> by_length(m + 1, 0.0);
  for (const auto& parts : compositions(m)) by_length[parts.size()] += trace_of_product(G, parts);
  double s = 0.0;
  for (std::size_t k = 1; k <= m; ++k) s += ((k % 2 == 0) ? 1.0 : -1.0) / static_cast<double>(k) * by_length[k];
  return static_cast<double>(m) * s;
}

/// -Tr(G_1), written out independently of the composition engine.
inline double power_sum_1(const std::vector<Mat>& G) { return -trace(G.at(0)); }

/// Tr(G_1^2) - 2 Tr(G_2), written out independently of the composition engine.
inline double power_sum_2(const std::vector<Mat>& G) { return trace(G.at(0) * G.at(0)) - 2.0 * trace(G.at(1)); }

struct TraceReport {
  std::size_t order = 0;
  std::vector<Mat> G;
  std::vector<double> power_sums;  // index k-1 holds sum_j 1/lambda_j^k
  Mat P0;
  std::size_t steps = 0;
  std::size_t k0 = 0;
  double intersection_tol = 1e-10;
  double closed_form_mismatch = 0.0;  // max deviation of the m = 1, 2 closed forms from the engine
};

inline TraceReport trace_report(const SLSystem& sys, const BoundaryPair& bc, std::size_t m,
                                std::size_t steps = kDefaultSteps) {
  const GMatrices g = compute_G(sys, bc, m, steps);
  TraceReport r;
  r.order = m;
  r.G = g.G;
  r.P0 = g.P0;
  r.steps = steps;
  r.k0 = g.normalizer.k0;
  for (std::size_t k = 1; k <= m; ++k) r.power_sums.push_back(power_sum(g.G, k));
  r.closed_form_mismatch = std::abs(r.power_sums[0] - power_sum_1(g.G));
  if (m >= 2) r.closed_form_mismatch = std::max(r.closed_form_mismatch, std::abs(r.power_sums[1] - power_sum_2(g.G)));
  return r;
}

// ---------------------------------------------------------------------------
// Closed forms

/// sum_k 1/lambda_k for y'' + lambda y = 0, y(0) = 0,
/// cos(theta) y(T) + sin(theta) y'(T) = 0.
inline double robin_identity(double theta, double T) {
  if (!(theta >= 0.0 && theta <= M_PI / 2 + 1e-15)) throw DomainError("robin_identity: theta must lie in [0, pi/2]");
  if (!(T > 0.0)) throw DomainError("robin_identity: T must be positive");
  const double s = std::sin(theta), c = std::cos(theta);
  return (3.0 * T * T * s + T * T * T * c) / (6.0 * (s + T * c));
}

struct ConjugateCriterion {
  double value = 0.0;
  bool certified = false;  // value < 1: no conjugate point on [0, T]
};

/// Tr int_0^T (t - t^2/T) R^+(t) dt by composite Simpson on `intervals`
/// (rounded up to even) subintervals, R^+ = (R + |R|)/2.
inline ConjugateCriterion conjugate_criterion(const CoeffPath& R, double T, std::size_t intervals = kDefaultSteps) {
  if (!(T > 0.0)) throw DomainError("conjugate_criterion: T must be positive");
  if (intervals < 2) intervals = 2;
  if (intervals % 2 == 1) ++intervals;
  const double h = T / static_cast<double>(intervals);
  double sum = 0.0;
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double t = i == intervals ? T : h * static_cast<double>(i);
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double weight = t - t * t / T;
    if (weight == 0.0) continue;
    sum += w * weight * trace(positive_part(eval_path(R, t, T)));
  }
  ConjugateCriterion c;
  c.value = sum * h / 3.0;
  c.certified = c.value < 1.0;
  return c;
}

}  // namespace slspec
