#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dbr/report.hpp"

namespace {

int run_command(const std::string& config_path, const std::string& out_path, const std::string& format,
                const std::vector<std::string>& command_override) {
  dbr::ExperimentConfig config = dbr::ExperimentConfig::from_file(config_path);
  if (!command_override.empty()) {
    const auto& known = dbr::command_registry();
    for (const std::string& c : command_override)
      if (std::find(known.begin(), known.end(), c) == known.end())
        throw dbr::ConfigError("unknown command: " + c);
    config.commands = command_override;
  }
  if (const char* env_seed = std::getenv("DBR_SEED")) {
    config.seed = std::strtoull(env_seed, nullptr, 10);
  }

  dbr::Report report = dbr::run(config);

  if (!out_path.empty()) {
    dbr::export_report(report, out_path,
                       format == "csv" ? dbr::ExportFormat::Csv : dbr::ExportFormat::Json);
  } else if (format == "csv") {
    std::cout << report.to_csv();
  } else {
    std::cout << report.to_json().dump(2) << '\n';
  }

  for (const dbr::Record& r : report.records) {
    std::cerr << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << " residual=" << r.residual
              << " tol=" << r.tolerance;
    if (!r.metadata.empty()) std::cerr << " (" << r.metadata << ")";
    std::cerr << '\n';
  }
  return report.overall_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-rank canonical realizations of Schur functions on the right half-plane"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Execute verification commands from a JSON config");
  std::string config_path;
  std::string out_path;
  std::string format = "json";
  std::vector<std::string> commands;
  run->add_option("--config", config_path, "Path to the experiment config (JSON)")->required();
  run->add_option("--out", out_path, "Write the report to this path instead of stdout");
  run->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  run->add_option("--command", commands, "Override the config command list (repeatable)");

  CLI11_PARSE(app, argc, argv);

  try {
    return run_command(config_path, out_path, format, commands);
  } catch (const dbr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const dbr::IOError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
