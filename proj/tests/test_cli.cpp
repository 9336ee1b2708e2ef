#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "slspec/cli.hpp"

using namespace slspec;
using namespace slspec::cli;

namespace {

const std::string kConfigDir = SLSPEC_CONFIG_DIR;

JobConfig config_file(const std::string& name) { return load_config(kConfigDir + "/" + name); }

CommandResult run(const std::string& cmd, const std::string& text) { return run_command(cmd, parse_config_text(text)); }

struct Invocation {
  int exit_code;
  std::string out;
};

Invocation invoke(const std::string& args) {
  const std::string cmd = std::string(SLSPEC_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("slspec_test_" + name);
  std::ofstream(path) << text;
  return path.string();
}

const char* kFreeSystem = R"({"system": {"n": 1, "T": 1.0, "R": -1.0, "R1": 0.0}, "numerics": {"m": 3}})";
const char* kNeumannPair = R"({"system": {"second_order": {"R": 1.0, "T": 1.0}}, "boundary": "neumann"})";

}  // namespace

TEST(Config, DefaultsAndRoundTrip) {
  const JobConfig c = parse_config_text(R"({"system": {"second_order": {"R": 1.0, "T": 2.0}}})");
  EXPECT_EQ(c.numerics.N, 2048u);
  EXPECT_EQ(c.numerics.scan_points, 400u);
  EXPECT_EQ(c.numerics.m, 2u);
  EXPECT_EQ(c.numerics.K, 1000u);
  EXPECT_EQ(c.output.format, "json");
  EXPECT_EQ(c.output.precision, 12);
  EXPECT_EQ(c.boundary.kind, BoundarySpec::Kind::Dirichlet);

  for (const auto& entry : std::filesystem::directory_iterator(kConfigDir)) {
    const JobConfig a = load_config(entry.path().string());
    const JobConfig b = parse_config(to_json(a));
    EXPECT_TRUE(a == b) << entry.path();
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump()) << entry.path();
  }
}

TEST(Config, RejectsInvalidInput) {
  const char* bad[] = {
      "not json",
      R"([1, 2])",
      R"({"schema_version": 2, "system": {"second_order": {"R": 1.0, "T": 1.0}}})",
      R"({"system": {"n": 1, "T": 1.0}})",
      R"({"system": {"n": 1, "T": 1.0, "P": 0.0, "R1": 1.0}})",
      R"({"system": {"n": 2, "T": 1.0, "R": [[0, 1], [0, 0]], "R1": [[1, 0], [0, 1]]}})",
      R"({"system": {"second_order": {"R": 1.0, "T": -1.0}}})",
      R"({"system": {"second_order": {"R": 1.0, "T": 1.0}}, "boundary": "periodic"})",
      R"({"system": {"second_order": {"R": 1.0, "T": 1.0}}, "boundary": {"robin": {"theta1": 3.0}}})",
      R"({"system": {"second_order": {"R": 1.0, "T": 1.0}}, "boundary": {"frames": {"Z0": {"X": [[1]], "Y": [[0]]}, "Z1": {"X": [[0]], "Y": [[0]]}}}})",
      R"({"system": {"second_order": {"R": 1.0, "T": 1.0}}, "numerics": {"N": 8}})",
      R"({"system": {"second_order": {"R": 1.0, "T": 1.0}}, "numerics": {"m": 13}})",
      R"({"system": {"second_order": {"R": 1.0, "T": 1.0}}, "numerics": {"scan_range": [5, 1]}})",
      R"({"system": {"second_order": {"R": 1.0, "T": 1.0}}, "output": {"format": "xml"}})",
      R"({"system": {"second_order": {"R": {"type": "sampled", "data": {"times": [0, 0.5], "values": [1, 1]}}, "T": 1.0}}})",
  };
  for (const char* text : bad) EXPECT_THROW(parse_config_text(text), ConfigError) << text;
}

TEST(CmdTrace, Examples) {
  const CommandResult basel = run("trace", R"({"system": {"second_order": {"R": 1.0, "T": 3.141592653589793}},
                                              "boundary": {"robin": {"theta1": 0.0}}, "numerics": {"m": 1}})");
  EXPECT_EQ(basel.exit_code, kOk);
  EXPECT_NEAR(basel.report["power_sums"][0].get<double>(), 1.6449340668, 1e-8);

  const CommandResult zero = run("trace", kFreeSystem);
  ASSERT_EQ(zero.report["power_sums"].size(), 3u);
  for (const Json& p : zero.report["power_sums"]) EXPECT_EQ(p.get<double>(), 0.0);

  const CommandResult quarter = run("trace", R"({"system": {"second_order": {"R": 1.0, "T": 1.0}},
                                               "boundary": {"robin": {"theta1": 0.7853981633974483}}, "numerics": {"m": 1}})");
  EXPECT_NEAR(quarter.report["power_sums"][0].get<double>(), 1.0 / 3.0, 1e-8);
}

TEST(CmdHill, Examples) {
  const CommandResult one = run("hill", R"({"system": {"second_order": {"R": 1.0, "T": 1.0}}})");
  EXPECT_EQ(one.exit_code, kOk);
  EXPECT_NEAR(one.report["quotient"].get<double>(), 0.8414709848, 1e-8);
  EXPECT_LE(one.report["residual"].get<double>(), 1e-4);

  const CommandResult free = run("hill", kFreeSystem);
  EXPECT_EQ(free.report["quotient"].get<double>(), 1.0);
  EXPECT_EQ(free.report["truncated_product"].get<double>(), 1.0);

  const CommandResult half_pi = run("hill", R"({"system": {"second_order": {"R": 1.0, "T": 1.5707963267948966}}})");
  EXPECT_NEAR(half_pi.report["quotient"].get<double>(), 2.0 / M_PI, 1e-8);
}

TEST(CmdEigs, Examples) {
  const CommandResult d = run("eigs", R"({"system": {"second_order": {"R": 1.0, "T": 3.141592653589793}},
                                         "numerics": {"scan_range": [0.5, 20]}})");
  ASSERT_EQ(d.report["eigenvalues"].size(), 4u);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(d.report["eigenvalues"][k].get<double>(), (k + 1) * (k + 1), 1e-8);

  const CommandResult empty = run("eigs", R"({"system": {"second_order": {"R": 1.0, "T": 1.0}},
                                             "numerics": {"scan_range": [3, 3]}})");
  EXPECT_EQ(empty.exit_code, kOk);
  EXPECT_TRUE(empty.report["eigenvalues"].empty());

  const CommandResult half = run("eigs", R"({"system": {"second_order": {"R": 1.0, "T": 1.0}},
                                            "boundary": {"robin": {"theta1": 1.5707963267948966}},
                                            "numerics": {"scan_range": [0, 25]}})");
  ASSERT_EQ(half.report["eigenvalues"].size(), 2u);
  EXPECT_NEAR(half.report["eigenvalues"][0].get<double>(), 2.4674011, 1e-7);
  EXPECT_NEAR(half.report["eigenvalues"][1].get<double>(), 22.2066099, 1e-7);
}

TEST(CmdVerify, Examples) {
  const CommandResult quarter = run("verify", R"({"system": {"second_order": {"R": 1.0, "T": 1.0}},
                                                "boundary": {"robin": {"theta1": 0.7853981633974483}}, "numerics": {"m": 2}})");
  EXPECT_EQ(quarter.exit_code, kOk);
  EXPECT_TRUE(quarter.report["pass"].get<bool>());
  EXPECT_EQ(quarter.report["oracle_source"], "robin-roots");
  for (const Json& row : quarter.report["rows"]) {
    EXPECT_EQ(row["status"], "pass");
    if (row["method"] == "trace") { EXPECT_LE(row["residual"].get<double>(), 1e-5); }
  }

  const CommandResult free = run("verify", kFreeSystem);
  EXPECT_EQ(free.exit_code, kOk);
  EXPECT_EQ(free.report["oracle_source"], "trivial");
  EXPECT_TRUE(free.report["pass"].get<bool>());

  const CommandResult basel = run("verify", R"({"system": {"second_order": {"R": 1.0, "T": 3.141592653589793}},
                                              "numerics": {"m": 2}})");
  EXPECT_TRUE(basel.report["pass"].get<bool>());
  EXPECT_NEAR(basel.report["rows"][1]["value"].get<double>(), std::pow(M_PI, 4) / 90, 1e-6);
}

TEST(CmdVerify, UnverifiableOutsideOracleCoverage) {
  const CommandResult r = run_command("verify", config_file("general_hamiltonian.json"));
  EXPECT_EQ(r.exit_code, kOk);
  EXPECT_EQ(r.report["oracle_source"], "none");
  for (const Json& row : r.report["rows"]) EXPECT_EQ(row["status"], "unverifiable");
  EXPECT_FALSE(r.report["warnings"].empty());
}

TEST(CmdVerify, FiniteDifferenceOracle) {
  const CommandResult r = run("verify", R"({"system": {"second_order": {"R": {"type": "polynomial", "data": [1.0, 0.5]}, "T": 1.0}},
                                          "numerics": {"m": 1}})");
  EXPECT_EQ(r.report["oracle_source"], "finite-difference");
  EXPECT_EQ(r.exit_code, kOk);
  EXPECT_TRUE(r.report["pass"].get<bool>());
}

TEST(CmdConjugate, Examples) {
  const CommandResult cert = run("conjugate", R"({"system": {"second_order": {"R": 0.5977949834897929, "T": 3.141592653589793}}})");
  EXPECT_NEAR(cert.report["value"].get<double>(), 5.9 / 6, 1e-10);
  EXPECT_TRUE(cert.report["certified"].get<bool>());
  EXPECT_TRUE(cert.report["scan"]["zero_free"].get<bool>());

  const CommandResult zero = run("conjugate", R"({"system": {"second_order": {"R": 0.0, "T": 2.0}}})");
  EXPECT_EQ(zero.report["value"].get<double>(), 0.0);
  EXPECT_TRUE(zero.report["certified"].get<bool>());

  const CommandResult no = run("conjugate", R"({"system": {"second_order": {"R": 1.0, "T": 3.141592653589793}}})");
  EXPECT_NEAR(no.report["value"].get<double>(), M_PI * M_PI / 6, 1e-10);
  EXPECT_FALSE(no.report["certified"].get<bool>());
  ASSERT_EQ(no.report["scan"]["zeros"].size(), 1u);
  EXPECT_NEAR(no.report["scan"]["zeros"][0].get<double>(), 1.0, 1e-8);

  EXPECT_EQ(run("conjugate", kFreeSystem).exit_code, kConfig);
}

TEST(Render, DeterministicAndRounded) {
  const JobConfig c = config_file("robin_quarter.json");
  const std::string a = render(run_command("trace", c), "json", 12);
  const std::string b = render(run_command("trace", c), "json", 12);
  EXPECT_EQ(a, b);
  EXPECT_EQ(round_significant(1.23456789012345, 12), 1.23456789012);
  const std::string csv = render(run_command("trace", c), "csv", 12);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "k,trace_G,power_sum");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Binary, ExitCodes) {
  EXPECT_EQ(invoke("trace --config " + kConfigDir + "/robin_quarter.json").exit_code, kOk);
  EXPECT_EQ(invoke("trace --config /nonexistent.json").exit_code, kConfig);
  EXPECT_EQ(invoke("trace").exit_code, kConfig);
  EXPECT_EQ(invoke("hill --config " + write_temp("neumann.json", kNeumannPair)).exit_code, kDegenerate);
  EXPECT_EQ(invoke("trace --config " + write_temp("neumann.json", kNeumannPair)).exit_code, kDegenerate);
  // a 16-step integration is far too coarse for the 1e-5 verification tolerance
  const char* coarse = R"({"system": {"second_order": {"R": 1.0, "T": 10.0}}, "numerics": {"N": 16, "m": 1}})";
  EXPECT_EQ(invoke("verify --config " + write_temp("coarse.json", coarse)).exit_code, kVerifyFailed);
}

TEST(Binary, ByteIdenticalOutputAndFormats) {
  const std::string args = "eigs --config " + kConfigDir + "/basel.json";
  const Invocation a = invoke(args), b = invoke(args);
  EXPECT_EQ(a.exit_code, 0);
  EXPECT_EQ(a.out, b.out);
  const Json j = Json::parse(a.out);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["command"], "eigs");

  const Invocation csv = invoke(args + " --output csv");
  EXPECT_EQ(csv.out.rfind("index,lambda,", 0), 0u) << csv.out;

  const auto out = std::filesystem::temp_directory_path() / "slspec_test_out.json";
  EXPECT_EQ(invoke(args + " --out " + out.string()).exit_code, 0);
  std::ifstream in(out);
  const std::string written((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(written, a.out);
}

TEST(Binary, ConfigErrorReport) {
  const Invocation r = invoke("trace --config " + write_temp("bad.json", R"({"system": {}})"));
  EXPECT_EQ(r.exit_code, kConfig);
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["error"]["kind"], "config");
}
