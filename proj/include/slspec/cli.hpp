#pragma once

// Job configuration (JSON), command implementations and report rendering
// for the `slspec` tool. Commands return a report plus an exit code:
//   0 success, 2 configuration error, 3 degenerate system, 4 verification failure.

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "slspec/coeffs.hpp"
#include "slspec/errors.hpp"
#include "slspec/flow.hpp"
#include "slspec/hill.hpp"
#include "slspec/numkernel.hpp"
#include "slspec/oracle.hpp"
#include "slspec/symplectic.hpp"
#include "slspec/trace.hpp"

namespace slspec::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kOk = 0, kInternal = 1, kConfig = 2, kDegenerate = 3, kVerifyFailed = 4 };

// ---------------------------------------------------------------------------
// Configuration types

struct SystemSpec {
  bool second_order = false;
  std::size_t n = 1;
  double T = 1.0;
  CoeffPath P, Q, R, R1;  // general form
  CoeffPath curvature;    // second-order form y'' + lambda R y = 0

  SLSystem build() const {
    if (second_order) return system_for_second_order(curvature, T);
    return SLSystem(n, T, P, Q, R, R1);
  }
  bool r1_identically_zero() const { return second_order ? curvature.identically_zero() : R1.identically_zero(); }

  friend bool operator==(const SystemSpec&, const SystemSpec&) = default;
};

struct BoundarySpec {
  enum class Kind { Dirichlet, Neumann, Robin, Frames };
  Kind kind = Kind::Dirichlet;
  std::vector<double> theta0, theta1;  // Robin angles per coordinate
  Mat X0, Y0, X1, Y1;                  // explicit frames

  BoundaryPair build(std::size_t n) const {
    switch (kind) {
      case Kind::Dirichlet:
        return BoundaryPair(preset_dirichlet(n), preset_dirichlet(n));
      case Kind::Neumann:
        return BoundaryPair(preset_neumann(n), preset_neumann(n));
      case Kind::Robin:
        return BoundaryPair(preset_robin(theta0), preset_robin(theta1));
      case Kind::Frames:
        return BoundaryPair(LagFrame(X0, Y0), LagFrame(X1, Y1));
    }
    throw ConfigError("unknown boundary kind");
  }

  /// Angle representation when both ends are Robin-type presets
  /// (Dirichlet = 0, Neumann = pi/2 coordinatewise).
  std::optional<std::pair<std::vector<double>, std::vector<double>>> angles(std::size_t n) const {
    switch (kind) {
      case Kind::Dirichlet:
        return std::make_pair(std::vector<double>(n, 0.0), std::vector<double>(n, 0.0));
      case Kind::Neumann:
        return std::make_pair(std::vector<double>(n, M_PI / 2), std::vector<double>(n, M_PI / 2));
      case Kind::Robin:
        return std::make_pair(theta0, theta1);
      case Kind::Frames:
        return std::nullopt;
    }
    return std::nullopt;
  }

  friend bool operator==(const BoundarySpec&, const BoundarySpec&) = default;
};

struct Numerics {
  std::size_t N = kDefaultSteps;
  double scan_lo = 0.0;
  double scan_hi = 100.0;
  std::size_t scan_points = 400;
  double refine_tol = 1e-10;
  std::size_t m = 2;
  std::size_t K = 1000;
  double intersection_tol = 1e-6;
  std::size_t fd_mesh = 1024;
  bool conjugate_scan = true;

  friend bool operator==(const Numerics&, const Numerics&) = default;
};

struct OutputSpec {
  std::string format = "json";
  int precision = 12;

  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct JobConfig {
  int schema_version = kSchemaVersion;
  SystemSpec system;
  BoundarySpec boundary;
  Numerics numerics;
  OutputSpec output;

  friend bool operator==(const JobConfig&, const JobConfig&) = default;
};

// ---------------------------------------------------------------------------
// JSON <-> domain types

inline Json mat_to_json(const Mat& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Row-major nested array; a bare number is accepted as a 1 x 1 matrix.
inline Mat mat_from_json(const Json& j, const std::string& where) {
  if (j.is_number()) return Mat(1, 1, {j.get<double>()});
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": matrix must be a non-empty nested array");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  std::vector<double> data;
  for (const Json& r : j) {
    if (!r.is_array()) throw ConfigError(where + ": matrix rows must be arrays");
    if (cols == 0) cols = r.size();
    if (r.size() != cols || cols == 0) throw ConfigError(where + ": ragged or empty matrix rows");
    for (const Json& v : r) {
      if (!v.is_number()) throw ConfigError(where + ": matrix entries must be numbers");
      data.push_back(v.get<double>());
    }
  }
  return Mat(rows, cols, std::move(data));
}

inline Json path_to_json(const CoeffPath& p) {
  return std::visit(
      [](const auto& v) -> Json {
        using P = std::decay_t<decltype(v)>;
        Json out;
        if constexpr (std::is_same_v<P, ConstantPath>) {
          out["type"] = "constant";
          out["data"] = mat_to_json(v.value);
        } else if constexpr (std::is_same_v<P, PolynomialPath>) {
          out["type"] = "polynomial";
          Json d = Json::array();
          for (const Mat& c : v.coefficients) d.push_back(mat_to_json(c));
          out["data"] = std::move(d);
        } else {
          out["type"] = "sampled";
          Json vals = Json::array();
          for (const Mat& m : v.values) vals.push_back(mat_to_json(m));
          out["data"] = Json{{"times", v.times}, {"values", std::move(vals)}};
        }
        return out;
      },
      p.variant());
}

inline CoeffPath path_from_json(const Json& j, const std::string& where) {
  if (j.is_number() || (j.is_array())) return CoeffPath::constant(mat_from_json(j, where));
  if (!j.is_object() || !j.contains("type") || !j.contains("data"))
    throw ConfigError(where + ": path must be {\"type\": ..., \"data\": ...}");
  const std::string type = j.at("type").get<std::string>();
  const Json& d = j.at("data");
  if (type == "constant") return CoeffPath::constant(mat_from_json(d, where));
  if (type == "polynomial") {
    if (!d.is_array()) throw ConfigError(where + ": polynomial data must be a list of matrices");
    std::vector<Mat> c;
    for (const Json& m : d) c.push_back(mat_from_json(m, where));
    return CoeffPath::polynomial(std::move(c));
  }
  if (type == "sampled") {
    if (!d.is_object() || !d.contains("times") || !d.contains("values"))
      throw ConfigError(where + ": sampled data must be {\"times\": [...], \"values\": [...]}");
    std::vector<Mat> v;
    for (const Json& m : d.at("values")) v.push_back(mat_from_json(m, where));
    return CoeffPath::sampled(d.at("times").get<std::vector<double>>(), std::move(v));
  }
  throw ConfigError(where + ": unknown path type '" + type + "'");
}

namespace detail {

inline std::vector<double> angles_from_json(const Json& j, std::size_t n, const std::string& where) {
  if (j.is_number()) return std::vector<double>(n, j.get<double>());
  auto v = j.get<std::vector<double>>();
  if (v.size() != n) throw ConfigError(where + ": need one angle per coordinate");
  return v;
}

inline std::size_t positive_count(const Json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(std::string("numerics.") + key + " must be a non-negative integer");
  return static_cast<std::size_t>(v.get<long long>());
}

}  // namespace detail

inline Json to_json(const JobConfig& c) {
  Json j;
  j["schema_version"] = c.schema_version;
  Json sys;
  if (c.system.second_order) {
    sys["second_order"] = Json{{"R", path_to_json(c.system.curvature)}, {"T", c.system.T}};
  } else {
    sys["n"] = c.system.n;
    sys["T"] = c.system.T;
    sys["P"] = path_to_json(c.system.P);
    sys["Q"] = path_to_json(c.system.Q);
    sys["R"] = path_to_json(c.system.R);
    sys["R1"] = path_to_json(c.system.R1);
  }
  j["system"] = std::move(sys);
  switch (c.boundary.kind) {
    case BoundarySpec::Kind::Dirichlet:
      j["boundary"] = "dirichlet";
      break;
    case BoundarySpec::Kind::Neumann:
      j["boundary"] = "neumann";
      break;
    case BoundarySpec::Kind::Robin:
      j["boundary"] = Json{{"robin", Json{{"theta0", c.boundary.theta0}, {"theta1", c.boundary.theta1}}}};
      break;
    case BoundarySpec::Kind::Frames:
      j["boundary"] = Json{{"frames", Json{{"Z0", Json{{"X", mat_to_json(c.boundary.X0)}, {"Y", mat_to_json(c.boundary.Y0)}}},
                                          {"Z1", Json{{"X", mat_to_json(c.boundary.X1)}, {"Y", mat_to_json(c.boundary.Y1)}}}}}};
      break;
  }
  const Numerics& nm = c.numerics;
  j["numerics"] = Json{{"N", nm.N},
                       {"scan_range", {nm.scan_lo, nm.scan_hi}},
                       {"scan_points", nm.scan_points},
                       {"refine_tol", nm.refine_tol},
                       {"m", nm.m},
                       {"K", nm.K},
                       {"intersection_tol", nm.intersection_tol},
                       {"fd_mesh", nm.fd_mesh},
                       {"conjugate_scan", nm.conjugate_scan}};
  j["output"] = Json{{"format", c.output.format}, {"precision", c.output.precision}};
  return j;
}

/// Parses and validates a configuration. Every failure, including
/// violations of system or frame invariants, surfaces as ConfigError.
inline JobConfig parse_config(const Json& j) {
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    JobConfig c;
    c.schema_version = j.value("schema_version", kSchemaVersion);
    if (c.schema_version != kSchemaVersion)
      throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version));

    if (!j.contains("system")) throw ConfigError("missing 'system'");
    const Json& s = j.at("system");
    if (s.contains("second_order")) {
      const Json& so = s.at("second_order");
      c.system.second_order = true;
      c.system.curvature = path_from_json(so.at("R"), "system.second_order.R");
      c.system.T = so.at("T").get<double>();
      c.system.n = c.system.curvature.dim();
    } else {
      c.system.n = s.at("n").get<std::size_t>();
      c.system.T = s.at("T").get<double>();
      const std::size_t n = c.system.n;
      c.system.P = s.contains("P") ? path_from_json(s.at("P"), "system.P") : CoeffPath::identity(n);
      c.system.Q = s.contains("Q") ? path_from_json(s.at("Q"), "system.Q") : CoeffPath::zero(n);
      c.system.R = s.contains("R") ? path_from_json(s.at("R"), "system.R") : CoeffPath::zero(n);
      if (!s.contains("R1")) throw ConfigError("missing 'system.R1'");
      c.system.R1 = path_from_json(s.at("R1"), "system.R1");
    }
    const std::size_t n = c.system.n;
    (void)c.system.build();  // validates every SLSystem invariant

    const Json b = j.value("boundary", Json("dirichlet"));
    if (b.is_string()) {
      const std::string name = b.get<std::string>();
      if (name == "dirichlet") {
        c.boundary.kind = BoundarySpec::Kind::Dirichlet;
      } else if (name == "neumann") {
        c.boundary.kind = BoundarySpec::Kind::Neumann;
      } else {
        throw ConfigError("unknown boundary preset '" + name + "'");
      }
    } else if (b.is_object() && b.contains("robin")) {
      const Json& r = b.at("robin");
      c.boundary.kind = BoundarySpec::Kind::Robin;
      c.boundary.theta0 = detail::angles_from_json(r.value("theta0", Json(0.0)), n, "boundary.robin.theta0");
      c.boundary.theta1 = detail::angles_from_json(r.value("theta1", Json(0.0)), n, "boundary.robin.theta1");
    } else if (b.is_object() && b.contains("frames")) {
      const Json& f = b.at("frames");
      c.boundary.kind = BoundarySpec::Kind::Frames;
      c.boundary.X0 = mat_from_json(f.at("Z0").at("X"), "boundary.frames.Z0.X");
      c.boundary.Y0 = mat_from_json(f.at("Z0").at("Y"), "boundary.frames.Z0.Y");
      c.boundary.X1 = mat_from_json(f.at("Z1").at("X"), "boundary.frames.Z1.X");
      c.boundary.Y1 = mat_from_json(f.at("Z1").at("Y"), "boundary.frames.Z1.Y");
    } else {
      throw ConfigError("boundary must be \"dirichlet\", \"neumann\", {\"robin\": ...} or {\"frames\": ...}");
    }
    if (c.boundary.build(n).n() != n) throw ConfigError("boundary frames do not match system dimension");

    if (j.contains("numerics")) {
      const Json& nm = j.at("numerics");
      Numerics& out = c.numerics;
      out.N = detail::positive_count(nm, "N", out.N);
      out.scan_points = detail::positive_count(nm, "scan_points", out.scan_points);
      out.m = detail::positive_count(nm, "m", out.m);
      out.K = detail::positive_count(nm, "K", out.K);
      out.fd_mesh = detail::positive_count(nm, "fd_mesh", out.fd_mesh);
      if (nm.contains("scan_range")) {
        const auto range = nm.at("scan_range").get<std::vector<double>>();
        if (range.size() != 2 || range[1] < range[0]) throw ConfigError("numerics.scan_range must be [lo, hi] with lo <= hi");
        out.scan_lo = range[0];
        out.scan_hi = range[1];
      }
      out.refine_tol = nm.value("refine_tol", out.refine_tol);
      out.intersection_tol = nm.value("intersection_tol", out.intersection_tol);
      out.conjugate_scan = nm.value("conjugate_scan", out.conjugate_scan);
    }
    if (c.numerics.N < kMinSteps) throw ConfigError("numerics.N must be at least 16");
    if (c.numerics.scan_points < 2) throw ConfigError("numerics.scan_points must be at least 2");
    if (c.numerics.m < 1 || c.numerics.m > kMaxTraceOrder) throw ConfigError("numerics.m must lie in [1, 12]");
    if (!(c.numerics.refine_tol > 0.0) || !(c.numerics.intersection_tol > 0.0))
      throw ConfigError("numerics tolerances must be positive");

    if (j.contains("output")) {
      const Json& o = j.at("output");
      c.output.format = o.value("format", c.output.format);
      c.output.precision = o.value("precision", c.output.precision);
    }
    if (c.output.format != "json" && c.output.format != "csv") throw ConfigError("output.format must be json or csv");
    if (c.output.precision < 1 || c.output.precision > 17) throw ConfigError("output.precision must lie in [1, 17]");
    return c;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
}

inline JobConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

inline JobConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// ---------------------------------------------------------------------------
// Oracle references for `verify` and `hill`

/// Eigenvalues from an independent oracle, one family per decoupled
/// coordinate, each family asymptotically ~ c k^2.
struct OracleReference {
  std::string source;  // "trivial", "robin-roots", "finite-difference"
  std::vector<std::vector<double>> families;
  TailMethod method = TailMethod::AsymptoticFit;
  double trace_tol = 1e-5;
  double hill_tol = 1e-4;

  double tail(std::size_t m) const {
    double t = 0.0;
    for (const auto& f : families) t += tail_sum(f, m, method).value;
    return t;
  }
  double partial(std::size_t m) const {
    double s = 0.0;
    for (const auto& f : families) s += partial_power_sum(f, m);
    return s;
  }
  std::vector<double> merged() const {
    std::vector<double> all;
    for (const auto& f : families) all.insert(all.end(), f.begin(), f.end());
    std::sort(all.begin(), all.end());
    return all;
  }
};

/// Oracle coverage: R1 == 0 (trivial); y'' + lambda R y = 0 with constant
/// diagonal positive R, Dirichlet at 0 and Robin/Dirichlet/Neumann at T
/// (secular-equation roots); constant positive-definite R with Dirichlet at
/// both ends (roots per eigenvalue of R); positive-definite R with
/// Dirichlet at both ends (finite differences). Returns nullopt otherwise.
inline std::optional<OracleReference> oracle_reference(const JobConfig& c) {
  OracleReference ref;
  if (c.system.r1_identically_zero()) {
    ref.source = "trivial";
    return ref;
  }
  if (!c.system.second_order) return std::nullopt;
  const std::size_t n = c.system.n;
  const double T = c.system.T;
  const std::size_t K = std::max<std::size_t>(c.numerics.K, 10);
  const auto angles = c.boundary.angles(n);
  if (!angles) return std::nullopt;
  const auto& [theta0, theta1] = *angles;
  const bool left_dirichlet = std::all_of(theta0.begin(), theta0.end(), [](double t) { return t == 0.0; });
  if (!left_dirichlet) return std::nullopt;
  const bool right_dirichlet = std::all_of(theta1.begin(), theta1.end(), [](double t) { return t == 0.0; });

  if (const auto* cp = std::get_if<ConstantPath>(&c.system.curvature.variant())) {
    const Mat& R = cp->value;
    bool diagonal = true;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && R(i, j) != 0.0) diagonal = false;
    std::vector<double> scales;
    std::vector<double> thetas;
    if (diagonal) {
      for (std::size_t i = 0; i < n; ++i) {
        scales.push_back(R(i, i));
        thetas.push_back(theta1[i]);
      }
    } else if (right_dirichlet) {
      scales = sym_eigen(R).values;
      thetas.assign(n, 0.0);
    } else {
      return std::nullopt;
    }
    if (std::any_of(scales.begin(), scales.end(), [](double r) { return !(r > 0.0); }))
      throw OracleRefusal("oracle: curvature R must be positive definite");
    ref.source = "robin-roots";
    for (std::size_t i = 0; i < scales.size(); ++i) {
      auto roots = robin_roots(thetas[i], T, K);
      for (double& l : roots) l /= scales[i];
      ref.families.push_back(std::move(roots));
    }
    return ref;
  }
  if (!right_dirichlet) return std::nullopt;
  ref.source = "finite-difference";
  ref.method = TailMethod::IntegralComparison;
  ref.trace_tol = 1e-3;
  ref.hill_tol = 1e-3;
  const std::size_t Kfd = std::clamp<std::size_t>(c.numerics.fd_mesh / 8, 10, K);
  ref.families.push_back(fd_dirichlet_eigs(c.system.curvature, T, c.numerics.fd_mesh, Kfd));
  return ref;
}

// ---------------------------------------------------------------------------
// Commands

struct CommandResult {
  Json report;
  int exit_code = kOk;
  std::string table_key;  // report field rendered as the CSV table
};

namespace detail {

inline Json header(const char* command) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  return j;
}

inline LocatorConfig locator_config(const Numerics& nm, double lo, double hi) {
  LocatorConfig lc;
  lc.lo = lo;
  lc.hi = hi;
  lc.scan_points = nm.scan_points;
  lc.refine_tol = nm.refine_tol;
  lc.intersection_tol = nm.intersection_tol;
  return lc;
}

inline Json spectrum_rows(const Spectrum& s) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    rows.push_back(Json{{"index", i + 1},
                        {"lambda", s.eigenvalues[i]},
                        {"bracket_lo", s.brackets[i].first},
                        {"bracket_hi", s.brackets[i].second},
                        {"multiplicity", s.multiplicity_estimate[i]},
                        {"sign_change", static_cast<bool>(s.sign_change[i])},
                        {"residual", s.residuals[i]}});
  }
  return rows;
}

}  // namespace detail

inline CommandResult cmd_trace(const JobConfig& c) {
  const SLSystem sys = c.system.build();
  const BoundaryPair bc = c.boundary.build(sys.n());
  const TraceReport tr = trace_report(sys, bc, c.numerics.m, c.numerics.N);
  Json j = detail::header("trace");
  j["order"] = tr.order;
  j["n"] = sys.n();
  j["k0"] = tr.k0;
  j["P0"] = mat_to_json(tr.P0);
  Json rows = Json::array();
  for (std::size_t k = 1; k <= tr.order; ++k) {
    rows.push_back(Json{{"k", k}, {"trace_G", trace(tr.G[k - 1])}, {"power_sum", tr.power_sums[k - 1]}});
  }
  j["terms"] = std::move(rows);
  j["power_sums"] = tr.power_sums;
  j["metadata"] = Json{{"steps", tr.steps}, {"closed_form_mismatch", tr.closed_form_mismatch}};
  return {std::move(j), kOk, "terms"};
}

inline CommandResult cmd_hill(const JobConfig& c) {
  const SLSystem sys = c.system.build();
  HillFunction g(sys, c.boundary.build(sys.n()), c.numerics.N);
  const NondegeneracyCheck nd = check_nondegenerate(g);
  const double quotient = hill_quotient(g);
  Json j = detail::header("hill");
  std::vector<double> eigs;
  std::vector<std::size_t> mult;
  TailEstimate tail = TailEstimate::none();
  std::string source;
  std::vector<std::string> warnings;
  std::optional<OracleReference> ref;
  try {
    ref = oracle_reference(c);
  } catch (const OracleRefusal& e) {
    warnings.push_back(e.what());
  }
  if (ref) {
    source = ref->source;
    eigs = ref->merged();
    if (!ref->families.empty()) {
      tail.value = ref->tail(1);
      tail.method = ref->method;
      tail.truncation = ref->families.front().size();
    }
  } else {
    source = "locator";
    const Spectrum s = locate_eigenvalues(g, detail::locator_config(c.numerics, c.numerics.scan_lo, c.numerics.scan_hi));
    eigs = s.eigenvalues;
    mult = s.multiplicity_estimate;
    warnings.push_back("no oracle for this configuration; product uses located eigenvalues without a tail");
  }
  const ProductResult prod = truncated_product(eigs, mult, tail);
  const double residual = std::abs(quotient - prod.value);
  j["quotient"] = quotient;
  j["truncated_product"] = prod.value;
  j["residual"] = residual;
  j["tail"] = tail.value;
  j["eigenvalue_source"] = source;
  j["eigenvalues_used"] = eigs.size();
  j["unit_eigenvalue"] = prod.hit_unit_eigenvalue;
  j["g0"] = nd.g0;
  j["rows"] = Json::array({Json{{"quotient", quotient}, {"truncated_product", prod.value}, {"residual", residual}, {"tail", tail.value}}});
  j["warnings"] = warnings;
  return {std::move(j), kOk, "rows"};
}

inline CommandResult cmd_eigs(const JobConfig& c) {
  const SLSystem sys = c.system.build();
  HillFunction g(sys, c.boundary.build(sys.n()), c.numerics.N);
  const Spectrum s = locate_eigenvalues(g, detail::locator_config(c.numerics, c.numerics.scan_lo, c.numerics.scan_hi));
  Json j = detail::header("eigs");
  j["scan_range"] = {s.scan_range.first, s.scan_range.second};
  j["eigenvalues"] = s.eigenvalues;
  j["spectrum"] = detail::spectrum_rows(s);
  j["continuity_warnings"] = s.continuity_warnings;
  return {std::move(j), kOk, "spectrum"};
}

inline CommandResult cmd_verify(const JobConfig& c) {
  Json j = detail::header("verify");
  Json rows = Json::array();
  std::vector<std::string> warnings;
  std::optional<OracleReference> ref;
  try {
    ref = oracle_reference(c);
    if (!ref) warnings.push_back("configuration outside oracle coverage; rows unverifiable");
  } catch (const OracleRefusal& e) {
    warnings.push_back(std::string("oracle refused: ") + e.what());
  }

  const SLSystem sys = c.system.build();
  const BoundaryPair bc = c.boundary.build(sys.n());
  const TraceReport tr = trace_report(sys, bc, c.numerics.m, c.numerics.N);
  const double quotient = hill_quotient(sys, bc, c.numerics.N);

  bool all_pass = true;
  auto add_row = [&](const std::string& method, std::size_t order, double value, std::optional<double> oracle,
                     double tail, double tol) {
    Json r{{"method", method}, {"order", order}, {"value", value}};
    if (oracle) {
      const double residual = std::abs(value - *oracle);
      const bool pass = residual <= tol;
      all_pass = all_pass && pass;
      r["oracle"] = *oracle;
      r["tail"] = tail;
      r["residual"] = residual;
      r["tolerance"] = tol;
      r["status"] = pass ? "pass" : "fail";
    } else {
      r["oracle"] = nullptr;
      r["tail"] = nullptr;
      r["residual"] = nullptr;
      r["tolerance"] = nullptr;
      r["status"] = "unverifiable";
    }
    rows.push_back(std::move(r));
  };

  for (std::size_t k = 1; k <= tr.order; ++k) {
    std::optional<double> oracle;
    double tail = 0.0;
    double tol = 0.0;
    if (ref) {
      try {
        tail = ref->tail(k);
        oracle = ref->partial(k) + tail;
        tol = ref->trace_tol * std::max(1.0, std::abs(*oracle));
        if (ref->source == "trivial") tol = 1e-12;
      } catch (const OracleRefusal& e) {
        warnings.push_back(std::string("tail refused: ") + e.what());
      }
    }
    add_row("trace", k, tr.power_sums[k - 1], oracle, tail, tol);
  }
  {
    std::optional<double> oracle;
    double tail = 0.0;
    double tol = 0.0;
    if (ref) {
      try {
        TailEstimate t = TailEstimate::none();
        t.value = ref->tail(1);
        tail = t.value;
        oracle = truncated_product(ref->merged(), {}, t).value;
        tol = ref->source == "trivial" ? 1e-12 : ref->hill_tol;
      } catch (const OracleRefusal& e) {
        warnings.push_back(std::string("tail refused: ") + e.what());
      }
    }
    add_row("hill", 0, quotient, oracle, tail, tol);
  }
  j["oracle_source"] = ref ? ref->source : std::string("none");
  j["rows"] = std::move(rows);
  j["pass"] = all_pass;
  j["warnings"] = warnings;
  return {std::move(j), all_pass ? kOk : kVerifyFailed, "rows"};
}

inline CommandResult cmd_conjugate(const JobConfig& c) {
  if (!c.system.second_order) throw ConfigError("conjugate: system must be given as second_order {R, T}");
  if (c.boundary.kind != BoundarySpec::Kind::Dirichlet) throw ConfigError("conjugate: boundary must be dirichlet");
  const ConjugateCriterion crit = conjugate_criterion(c.system.curvature, c.system.T, c.numerics.N);
  Json j = detail::header("conjugate");
  j["value"] = crit.value;
  j["certified"] = crit.certified;
  Json row{{"value", crit.value}, {"certified", crit.certified}};
  if (c.numerics.conjugate_scan) {
    const SLSystem sys = c.system.build();
    HillFunction g(sys, c.boundary.build(sys.n()), c.numerics.N);
    // (0, 1] scanned with a small overshoot so a zero at exactly 1 is bracketed
    const Spectrum s = locate_eigenvalues(g, detail::locator_config(c.numerics, 0.0, 1.0 + 1e-3));
    std::vector<double> zeros;
    for (double l : s.eigenvalues)
      if (l <= 1.0 + 1e-8) zeros.push_back(l);
    j["scan"] = Json{{"range", {0.0, 1.0}}, {"zeros", zeros}, {"zero_free", zeros.empty()}};
    row["scan_zeros"] = zeros.size();
  }
  j["rows"] = Json::array({std::move(row)});
  return {std::move(j), kOk, "rows"};
}

/// Dispatches `command`, mapping library errors onto exit codes.
inline CommandResult run_command(const std::string& command, const JobConfig& c) {
  auto failure = [&](int code, const char* kind, const std::string& what) {
    Json j = detail::header(command.c_str());
    j["error"] = Json{{"kind", kind}, {"message", what}};
    return CommandResult{std::move(j), code, ""};
  };
  try {
    if (command == "trace") return cmd_trace(c);
    if (command == "hill") return cmd_hill(c);
    if (command == "eigs") return cmd_eigs(c);
    if (command == "verify") return cmd_verify(c);
    if (command == "conjugate") return cmd_conjugate(c);
    return failure(kConfig, "config", "unknown command '" + command + "'");
  } catch (const DegeneracyError& e) {
    return failure(kDegenerate, "degeneracy", e.what());
  } catch (const ConfigError& e) {
    return failure(kConfig, "config", e.what());
  } catch (const InvariantError& e) {
    return failure(kConfig, "config", e.what());
  } catch (const SingularityError& e) {
    return failure(kConfig, "config", e.what());
  } catch (const DomainError& e) {
    return failure(kConfig, "config", e.what());
  } catch (const Error& e) {
    return failure(kInternal, "numerical", e.what());
  }
}

// ---------------------------------------------------------------------------
// Rendering

/// Rounds x to `digits` significant digits.
inline double round_significant(double x, int digits) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return std::strtod(buf, nullptr);
}

inline void round_numbers(Json& j, int digits) {
  if (j.is_number_float()) {
    const double v = j.get<double>();
    j = std::isfinite(v) ? Json(round_significant(v, digits)) : Json(nullptr);
  } else if (j.is_structured()) {
    for (auto& v : j) round_numbers(v, digits);
  }
}

inline std::string render_json(Json report, int precision) {
  round_numbers(report, precision);
  return report.dump(2) + "\n";
}

inline std::string csv_cell(const Json& v, int precision) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v.get<double>());
    return buf;
  }
  return "\"" + v.dump() + "\"";
}

/// The command's main table as CSV (header from the first row's keys).
/// Error reports render as a single kind,message row.
inline std::string render_csv(const CommandResult& r, int precision) {
  std::ostringstream os;
  if (r.report.contains("error")) {
    os << "kind,message\n" << r.report["error"]["kind"].get<std::string>() << ",\""
       << r.report["error"]["message"].get<std::string>() << "\"\n";
    return os.str();
  }
  const Json& rows = r.report.at(r.table_key);
  std::vector<std::string> keys;
  if (!rows.empty())
    for (auto it = rows.front().begin(); it != rows.front().end(); ++it) keys.push_back(it.key());
  for (std::size_t i = 0; i < keys.size(); ++i) os << (i ? "," : "") << keys[i];
  os << "\n";
  for (const Json& row : rows) {
    for (std::size_t i = 0; i < keys.size(); ++i)
      os << (i ? "," : "") << (row.contains(keys[i]) ? csv_cell(row.at(keys[i]), precision) : "");
    os << "\n";
  }
  return os.str();
}

inline std::string render(const CommandResult& r, const std::string& format, int precision) {
  return format == "csv" ? render_csv(r, precision) : render_json(r.report, precision);
}

}  // namespace slspec::cli
