// slspec <trace|hill|eigs|verify|conjugate> --config <file> [--output json|csv] [--out <file>]

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "slspec/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = slspec::cli;

  CLI::App app{"Eigenvalue statistics of Sturm-Liouville systems with separated boundary conditions"};
  app.require_subcommand(1);

  std::string config_path;
  std::string format;
  std::string out_path;
  for (const char* name : {"trace", "hill", "eigs", "verify", "conjugate"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON job configuration")->required();
    sub->add_option("--output", format, "Output format (overrides the config)")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", out_path, "Write the report to this file instead of stdout");
  }
  app.set_help_all_flag("--help-all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  cli::CommandResult result;
  int precision = 12;
  std::string fmt = format;
  try {
    const cli::JobConfig config = cli::load_config(config_path);
    precision = config.output.precision;
    if (fmt.empty()) fmt = config.output.format;
    result = cli::run_command(command, config);
  } catch (const slspec::ConfigError& e) {
    result.report = cli::Json{{"schema_version", cli::kSchemaVersion},
                              {"command", command},
                              {"error", {{"kind", "config"}, {"message", e.what()}}}};
    result.exit_code = cli::kConfig;
  }
  if (fmt.empty()) fmt = "json";

  const std::string text = cli::render(result, fmt, precision);
  if (result.report.contains("error")) std::cerr << "slspec: " << result.report["error"]["message"].get<std::string>() << "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "slspec: cannot write '" << out_path << "'\n";
      return cli::kConfig;
    }
    out << text;
  }
  return result.exit_code;
}
