#pragma once

// The Hill function g(lambda) = det(gamma_lambda(T) Z0, Z1), whose zeros are
// the eigenvalues of the boundary problem, and the Hill quotient
// g(1) / g(0) = prod_j (1 - 1 / lambda_j).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slspec/coeffs.hpp"
#include "slspec/errors.hpp"
#include "slspec/flow.hpp"
#include "slspec/numkernel.hpp"
#include "slspec/oracle.hpp"
#include "slspec/parallel.hpp"
#include "slspec/symplectic.hpp"

namespace slspec {

/// g(lambda) for a fixed system and boundary pair. Evaluations at different
/// lambda are independent and safe to run concurrently.
class HillFunction {
 public:
  HillFunction(const SLSystem& sys, BoundaryPair bc, std::size_t steps = kDefaultSteps)
      : table_(sys, steps),
        bc_(std::move(bc)),
        z0_(bc_.Z0.stacked()),
        z1_(bc_.Z1.stacked()),
        q0_(orthonormalize(z0_)),
        q1_(orthonormalize(z1_)) {
    if (bc_.n() != sys.n()) throw DimensionError("HillFunction: boundary frames do not match system dimension");
  }

  const StageTable& table() const noexcept { return table_; }
  const BoundaryPair& boundary() const noexcept { return bc_; }

  /// det(gamma_lambda(T) Z0, Z1) with the frames as given.
  double operator()(double lambda) const { return det(hstack(monodromy(table_, lambda) * z0_, z1_)); }

  /// Same determinant with orthonormalized frames; invariant under frame
  /// rescaling up to sign.
  double normalized(double lambda) const { return det(hstack(monodromy(table_, lambda) * q0_, q1_)); }

  /// gamma_lambda(T) Lambda0 ∩ Lambda1.
  Intersection eigen_intersection(double lambda, double tol) const {
    return intersection(monodromy(table_, lambda) * z0_, z1_, tol);
  }

 private:
  StageTable table_;
  BoundaryPair bc_;
  Mat z0_, z1_, q0_, q1_;
};

inline double hill_g(const SLSystem& sys, const BoundaryPair& bc, double lambda, std::size_t steps = kDefaultSteps) {
  return HillFunction(sys, bc, steps)(lambda);
}

struct NondegeneracyCheck {
  double g0 = 0.0;           // normalized g(0)
  double threshold = 0.0;    // 1e-8 * max(1, |gamma_0(T)|)
  bool nondegenerate = false;
};

inline NondegeneracyCheck check_nondegenerate(const HillFunction& g) {
  NondegeneracyCheck c;
  c.g0 = g.normalized(0.0);
  c.threshold = 1e-8 * std::max(1.0, norm_fro(monodromy(g.table(), 0.0)));
  c.nondegenerate = std::abs(c.g0) > c.threshold;
  return c;
}

/// g(1) / g(0). Throws DegeneracyError when 0 is an eigenvalue.
inline double hill_quotient(const HillFunction& g) {
  const NondegeneracyCheck c = check_nondegenerate(g);
  if (!c.nondegenerate)
    throw DegeneracyError("hill_quotient: |g(0)| = " + std::to_string(std::abs(c.g0)) +
                          " is below tolerance; 0 is an eigenvalue");
  return g(1.0) / g(0.0);
}

inline double hill_quotient(const SLSystem& sys, const BoundaryPair& bc, std::size_t steps = kDefaultSteps) {
  return hill_quotient(HillFunction(sys, bc, steps));
}

// ---------------------------------------------------------------------------
// Real eigenvalue locator

struct LocatorConfig {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t scan_points = 400;
  double refine_tol = 1e-10;          // absolute, on lambda
  std::size_t max_iterations = 200;
  double even_zero_rel = 1e-6;        // |g(min)| / neighbouring |g| below which a sign-preserving dip is a zero
  double intersection_tol = 1e-6;
  std::size_t threads = 0;            // 0: SLSPEC_THREADS or hardware concurrency
};

struct Spectrum {
  std::vector<double> eigenvalues;
  std::vector<std::pair<double, double>> brackets;
  std::vector<std::size_t> multiplicity_estimate;
  std::vector<bool> sign_change;      // false for sign-preserving (even-order) zeros
  std::vector<double> residuals;      // |g(lambda_j)|
  std::vector<double> local_scale;    // max |g| at the scan nodes around lambda_j
  std::pair<double, double> scan_range{0.0, 0.0};
  std::vector<double> continuity_warnings;  // scan nodes with suspicious jumps

  std::size_t size() const noexcept { return eigenvalues.size(); }
  std::size_t total_multiplicity() const {
    std::size_t s = 0;
    for (std::size_t m : multiplicity_estimate) s += m;
    return s;
  }
};

/// Scans g on a uniform grid over [lo, hi], bisects every sign change and
/// golden-section-minimizes |g| at every sign-preserving local dip. Dips that
/// reach (near) zero are reported with multiplicity >= 2. Multiplicities are
/// raised to the dimension of gamma_lambda(T) Lambda0 ∩ Lambda1.
inline Spectrum locate_eigenvalues(const HillFunction& g, const LocatorConfig& cfg) {
  if (cfg.scan_points < 2) throw DomainError("locate_eigenvalues: need at least 2 scan points");
  Spectrum spec;
  spec.scan_range = {cfg.lo, cfg.hi};
  if (!(cfg.hi > cfg.lo)) return spec;

  const std::size_t P = cfg.scan_points;
  std::vector<double> lam(P), val(P);
  for (std::size_t i = 0; i < P; ++i)
    lam[i] = i + 1 == P ? cfg.hi : cfg.lo + (cfg.hi - cfg.lo) * static_cast<double>(i) / static_cast<double>(P - 1);
  parallel_for(P, cfg.threads == 0 ? scan_threads() : cfg.threads, [&](std::size_t i) { val[i] = g(lam[i]); });
  for (double v : val)
    if (!std::isfinite(v)) throw Error("locate_eigenvalues: g is not finite on the scan grid");

  // continuity guard: a step much larger than both neighbouring steps
  double gmax = 0.0;
  for (double v : val) gmax = std::max(gmax, std::abs(v));
  for (std::size_t i = 1; i + 2 < P; ++i) {
    const double step = std::abs(val[i + 1] - val[i]);
    const double around = std::max(std::abs(val[i] - val[i - 1]), std::abs(val[i + 2] - val[i + 1]));
    if (step > 10.0 * around && step > 1e-3 * gmax) spec.continuity_warnings.push_back(lam[i]);
  }

  struct Found {
    double lambda;
    std::pair<double, double> bracket;
    bool sign_change;
    double scale;
  };
  std::vector<Found> found;

  for (std::size_t i = 0; i + 1 < P; ++i) {
    const double ga = val[i], gb = val[i + 1];
    if (ga == 0.0 && i > 0) {
      found.push_back({lam[i], {lam[i], lam[i]}, true, std::max(std::abs(val[i - 1]), std::abs(gb))});
      continue;
    }
    if (ga == 0.0 || gb == 0.0 || (ga > 0.0) == (gb > 0.0)) continue;
    double a = lam[i], b = lam[i + 1], fa = ga;
    for (std::size_t it = 0; it < cfg.max_iterations && b - a > cfg.refine_tol; ++it) {
      const double mid = 0.5 * (a + b);
      const double fm = g(mid);
      if (fm == 0.0) {
        a = b = mid;
        break;
      }
      if ((fm > 0.0) == (fa > 0.0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
    }
    found.push_back({0.5 * (a + b), {a, b}, true, std::max(std::abs(ga), std::abs(gb))});
  }

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (std::size_t i = 1; i + 1 < P; ++i) {
    const double gl = val[i - 1], gc = val[i], gr = val[i + 1];
    if (gc == 0.0 || (gl > 0.0) != (gc > 0.0) || (gr > 0.0) != (gc > 0.0)) continue;
    if (!(std::abs(gc) < std::abs(gl) && std::abs(gc) <= std::abs(gr))) continue;
    double a = lam[i - 1], b = lam[i + 1];
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = std::abs(g(c)), fd = std::abs(g(d));
    for (std::size_t it = 0; it < cfg.max_iterations && b - a > cfg.refine_tol; ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - inv_phi * (b - a);
        fc = std::abs(g(c));
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + inv_phi * (b - a);
        fd = std::abs(g(d));
      }
    }
    const double x = 0.5 * (a + b);
    const double scale = std::max(std::abs(gl), std::abs(gr));
    if (std::abs(g(x)) <= cfg.even_zero_rel * scale) found.push_back({x, {a, b}, false, scale});
  }

  std::sort(found.begin(), found.end(), [](const Found& x, const Found& y) { return x.lambda < y.lambda; });
  for (const Found& f : found) {
    if (!(f.lambda > cfg.lo && f.lambda < cfg.hi)) continue;
    const std::size_t dim = g.eigen_intersection(f.lambda, cfg.intersection_tol).k0;
    spec.eigenvalues.push_back(f.lambda);
    spec.brackets.push_back(f.bracket);
    spec.sign_change.push_back(f.sign_change);
    spec.multiplicity_estimate.push_back(std::max<std::size_t>(f.sign_change ? 1 : 2, dim));
    spec.residuals.push_back(std::abs(g(f.lambda)));
    spec.local_scale.push_back(f.scale);
  }
  return spec;
}

inline Spectrum locate_eigenvalues(const SLSystem& sys, const BoundaryPair& bc, const LocatorConfig& cfg,
                                   std::size_t steps = kDefaultSteps) {
  return locate_eigenvalues(HillFunction(sys, bc, steps), cfg);
}

// ---------------------------------------------------------------------------
// Truncated Euler-type product

struct ProductResult {
  double value = 1.0;
  bool hit_unit_eigenvalue = false;  // some lambda_j == 1, product is 0
};

/// prod_j (1 - 1/lambda_j)^{mult_j} * exp(-tail), with log(1 - x) ~ -x
/// applied to the tail of the sum of 1/lambda_j.
inline ProductResult truncated_product(const std::vector<double>& eigs, const std::vector<std::size_t>& multiplicity,
                                       const TailEstimate& tail, double unit_tol = 1e-12) {
  if (!multiplicity.empty() && multiplicity.size() != eigs.size())
    throw DimensionError("truncated_product: multiplicity list length differs from eigenvalue list");
  ProductResult r;
  double log_abs = 0.0;
  int sign = 1;
  for (std::size_t j = 0; j < eigs.size(); ++j) {
    const double lam = eigs[j];
    if (lam == 0.0) throw DomainError("truncated_product: zero eigenvalue");
    if (std::abs(lam - 1.0) <= unit_tol) {
      r.hit_unit_eigenvalue = true;
      r.value = 0.0;
      return r;
    }
    const double mult = multiplicity.empty() ? 1.0 : static_cast<double>(multiplicity[j]);
    const double factor = 1.0 - 1.0 / lam;
    if (factor < 0.0 && (static_cast<std::size_t>(mult) % 2 == 1)) sign = -sign;
    log_abs += mult * std::log(std::abs(factor));
  }
  r.value = sign * std::exp(log_abs - tail.value);
  return r;
}

inline ProductResult truncated_product(const Spectrum& spec, const TailEstimate& tail) {
  return truncated_product(spec.eigenvalues, spec.multiplicity_estimate, tail);
}

}  // namespace slspec
