// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "slspec/slspec.hpp"

using namespace slspec;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

SLSystem unit_second_order(double T) { return system_for_second_order(CoeffPath::constant_scalar(1.0), T); }
BoundaryPair dirichlet(std::size_t n = 1) { return {preset_dirichlet(n), preset_dirichlet(n)}; }
BoundaryPair robin(double theta) { return {preset_dirichlet(1), preset_robin(theta)}; }

double oracle_power_sum(double theta, double T, std::size_t K, std::size_t m) {
  const std::vector<double> eigs = robin_roots(theta, T, K);
  return partial_power_sum(eigs, m) + tail_sum(eigs, m, TailMethod::AsymptoticFit).value;
}

Outcome basel() {
  const double p1 = trace_report(unit_second_order(M_PI), dirichlet(), 1, 4096).power_sums[0];
  const double err = std::abs(p1 - 1.6449340668);
  return {err <= 1e-7, fmt("power_sum(1) = %.12f, |err| = %.2e (tol 1e-7)", p1, err)};
}

Outcome half_integer() {
  const double p1 = trace_report(unit_second_order(1.0), robin(M_PI / 2), 1).power_sums[0];
  const double id = robin_identity(M_PI / 2, 1.0);
  const double err = std::abs(p1 - 0.5);
  return {err <= 1e-7 && id == 0.5, fmt("power_sum(1) = %.12f, |err| = %.2e; robin_identity = %.17g", p1, err, id)};
}

Outcome robin_identity_check() {
  double worst_trace = 0.0, worst_oracle = 0.0;
  for (double th : {M_PI / 6, M_PI / 4, M_PI / 3})
    for (double T : {1.0, M_PI}) {
      const double id = robin_identity(th, T);
      const double p1 = trace_report(unit_second_order(T), robin(th), 1).power_sums[0];
      worst_trace = std::max(worst_trace, std::abs(p1 - id));
      worst_oracle = std::max(worst_oracle, std::abs(id - oracle_power_sum(th, T, 2000, 1)));
    }
  const double spot = std::abs(robin_identity(M_PI / 4, 1.0) - 1.0 / 3.0);
  return {worst_trace <= 1e-7 && worst_oracle <= 1e-5 && spot <= 1e-15,
          fmt("max |trace - identity| = %.2e (tol 1e-7), max |identity - oracle| = %.2e (tol 1e-5), spot err %.1e",
              worst_trace, worst_oracle, spot)};
}

Outcome hill_vs_product() {
  const double q = hill_quotient(unit_second_order(1.0), dirichlet());
  const std::vector<double> eigs = robin_roots(0.0, 1.0, 1000);
  const double prod = truncated_product(eigs, {}, tail_sum(eigs, 1)).value;
  const double e1 = std::abs(q - std::sin(1.0)), e2 = std::abs(q - prod);
  return {e1 <= 1e-7 && e2 <= 1e-4,
          fmt("quotient = %.12f (|err| %.2e, tol 1e-7), |quotient - product| = %.2e (tol 1e-4)", q, e1, e2)};
}

Outcome second_order_trace() {
  double zeta4 = 0.0;
  for (int k = 1000000; k >= 1; --k) {
    const double kk = static_cast<double>(k) * k;
    zeta4 += 1.0 / (kk * kk);
  }
  const double p2 = trace_report(unit_second_order(M_PI), dirichlet(), 2).power_sums[1];
  const double e_ref = std::abs(p2 - 1.0823232337), e_oracle = std::abs(p2 - zeta4);
  return {e_ref <= 1e-6 && e_oracle <= 1e-6,
          fmt("power_sum(2) = %.12f, |err| = %.2e, |p2 - direct zeta(4)| = %.2e (tol 1e-6)", p2, e_ref, e_oracle)};
}

Outcome third_order() {
  const double p3 = trace_report(unit_second_order(1.0), robin(M_PI / 4), 3).power_sums[2];
  const double ref = oracle_power_sum(M_PI / 4, 1.0, 2000, 3);
  const double err = std::abs(p3 - ref);
  return {err <= 1e-7, fmt("power_sum(3) = %.14f, oracle = %.14f, |err| = %.2e (tol 1e-7)", p3, ref, err)};
}

Outcome matrix_case() {
  const double d[] = {1.0, 4.0};
  const CoeffPath r = CoeffPath::constant(Mat::diagonal(d));
  const double p1 = trace_report(system_for_second_order(r, M_PI), dirichlet(2), 1).power_sums[0];
  const double e1 = std::abs(p1 - 5.0 * M_PI * M_PI / 6.0);
  const std::vector<double> fd = fd_dirichlet_eigs(r, M_PI, 1024, 4);
  const double expect[] = {0.25, 1.0, 1.0, 2.25};
  double worst = 0.0;
  for (std::size_t k = 0; k < 4; ++k) worst = std::max(worst, std::abs(fd[k] - expect[k]) / expect[k]);
  return {e1 <= 1e-6 && worst <= 1e-4,
          fmt("power_sum(1) = %.12f (|err| %.2e, tol 1e-6), FD max rel err = %.2e (tol 1e-4)", p1, e1, worst)};
}

Outcome symplecticity() {
  std::vector<SLSystem> corpus{
      unit_second_order(M_PI),
      unit_second_order(1.0),
      system_for_second_order(CoeffPath::constant(Mat{{1, 0}, {0, 4}}), M_PI),
      system_for_second_order(CoeffPath::polynomial({Mat{{1.0}}, Mat{{0.5}}}), 2.0),
      SLSystem(2, 2.0, CoeffPath::polynomial({Mat{{2.0, 0.3}, {0.3, 1.5}}, Mat{{0.2, 0.0}, {0.0, -0.1}}}),
               CoeffPath::polynomial({Mat{{0.1, -0.4}, {0.2, 0.0}}, Mat{{0.0, 0.1}, {0.0, 0.2}}}),
               CoeffPath::polynomial({Mat{{1.0, 0.2}, {0.2, -0.5}}, Mat{{0.0, 0.0}, {0.0, 0.3}}}),
               CoeffPath::polynomial({Mat{{-1.0, 0.0}, {0.0, -2.0}}, Mat{{-0.5, 0.1}, {0.1, 0.0}}})),
  };
  double worst = 0.0;
  for (const SLSystem& sys : corpus)
    for (double lambda : {0.0, 1.0, 10.0}) worst = std::max(worst, integrate_flow(sys, lambda, 2048).max_symplectic_defect);
  // step doubling, measured where the defect is far above roundoff
  double min_ratio = 1e300;
  for (std::size_t idx : {3u, 4u}) {
    const double a = integrate_flow(corpus[idx], 10.0, 256).max_symplectic_defect;
    const double b = integrate_flow(corpus[idx], 10.0, 512).max_symplectic_defect;
    min_ratio = std::min(min_ratio, a / b);
  }
  return {worst <= 1e-8 && min_ratio >= 12.0,
          fmt("max defect at N=2048 = %.2e (tol 1e-8), min defect(N)/defect(2N) = %.1f (need >= 12)", worst, min_ratio)};
}

Outcome taylor_remainder() {
  double lo = 1e300, hi = 0.0;
  // gamma_lambda and F_k do not see the boundary pair; the Robin and
  // Dirichlet fixtures differ only in T
  for (double T : {1.0, M_PI}) {
    const StageTable tab(unit_second_order(T), 2048);
    const IterIntegrals it = iterated_integrals(tab, 3);
    auto r = [&](double eps) {
      Mat s = Mat::identity(2);
      double pw = 1.0;
      for (const Mat& f : it.F) {
        pw *= eps;
        s.add_scaled(f, pw);
      }
      return norm_fro(monodromy(tab, eps) - it.gamma0_T * s);
    };
    const double ratio = r(2e-2) / r(1e-2);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  return {lo >= 8.0 && hi <= 32.0, fmt("r(2e)/r(e) in [%.3f, %.3f] (need [8, 32])", lo, hi)};
}

Outcome conjugate_point() {
  auto scan = [](double c, double T) {
    const SLSystem sys = system_for_second_order(CoeffPath::constant_scalar(c), T);
    LocatorConfig cfg;
    cfg.lo = 0.0;
    cfg.hi = 1.0 + 1e-3;
    std::vector<double> zeros;
    for (double l : locate_eigenvalues(sys, dirichlet(), cfg).eigenvalues)
      if (l <= 1.0 + 1e-8) zeros.push_back(l);
    return zeros;
  };
  const double c9 = 5.4 / (M_PI * M_PI);
  const ConjugateCriterion a = conjugate_criterion(CoeffPath::constant_scalar(c9), M_PI);
  const ConjugateCriterion b = conjugate_criterion(CoeffPath::constant_scalar(1.0), M_PI);
  const std::vector<double> za = scan(c9, M_PI), zb = scan(1.0, M_PI);
  const bool ok = a.certified && std::abs(a.value - 0.9) <= 1e-10 && za.empty() && !b.certified && zb.size() == 1 &&
                  std::abs(zb[0] - 1.0) <= 1e-8;
  return {ok, fmt("value 0.9 case: %.12f, %g zeros; pi^2/6 case: %.12f", a.value, static_cast<double>(za.size()), b.value) +
                  fmt(", %g zero(s), first at %.12f", static_cast<double>(zb.size()), zb.empty() ? 0.0 : zb[0])};
}

Outcome projection_fixtures() {
  double worst_d = 0.0;
  for (double T : {0.5, 1.0, M_PI}) {
    const Normalizer nrm = build_normalizer(preset_dirichlet(1), preset_dirichlet(1));
    const Mat g0 = monodromy(StageTable(unit_second_order(T), 2048), 0.0);
    worst_d = std::max(worst_d, std::abs(project(nrm, g0)(0, 0) - T));
  }
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-10.0, 10.0), ang(0.01, M_PI / 2 - 0.01);
  double worst_r = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double th = ang(rng), a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    const Normalizer nrm = build_normalizer(preset_dirichlet(1), preset_robin(th));
    const double expect = a + c / std::tan(th);
    const double scale = std::abs(a) + std::abs(c / std::tan(th)) + 1.0;
    worst_r = std::max(worst_r, std::abs(project(nrm, Mat{{a, b}, {c, d}})(0, 0) - expect) / scale);
  }
  return {worst_d <= 1e-10 && worst_r <= 1e-13,
          fmt("Dirichlet |P(gamma0(T)) - T| = %.2e (tol 1e-10), Robin max rel err = %.2e (tol 1e-13)", worst_d, worst_r)};
}

Outcome zero_correspondence() {
  const HillFunction g(unit_second_order(1.0), dirichlet());
  LocatorConfig cfg;
  cfg.lo = 0.5;
  cfg.hi = 1000.0;
  cfg.scan_points = 800;
  const Spectrum s = locate_eigenvalues(g, cfg);
  std::size_t bad = 0;
  for (double l : s.eigenvalues)
    if (g.eigen_intersection(l, 1e-6).k0 < 1) ++bad;
  return {s.size() == 10 && bad == 0,
          fmt("%g eigenvalues located in (0.5, 1000) (expect 10), %g without intersection at tol 1e-6",
              static_cast<double>(s.size()), static_cast<double>(bad))};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"basel identity", basel},
      {"half-integer identity", half_integer},
      {"Robin identity and oracle", robin_identity_check},
      {"Hill quotient vs truncated product", hill_vs_product},
      {"second-order power sum", second_order_trace},
      {"third-order composition engine", third_order},
      {"matrix case", matrix_case},
      {"symplecticity", symplecticity},
      {"Taylor remainder", taylor_remainder},
      {"conjugate-point criterion", conjugate_point},
      {"projection fixtures", projection_fixtures},
      {"zero correspondence", zero_correspondence},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
