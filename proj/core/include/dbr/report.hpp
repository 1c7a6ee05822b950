#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dbr/schur.hpp"
#include "dbr/types.hpp"

namespace dbr {

struct Tolerances {
  double psd = 1e-10;
  double identity = 1e-12;
  double transfer = 1e-10;
  double quad = 1e-6;
};

struct ExperimentConfig {
  SchurFunction function = SchurFunction::constant(CMat::Zero(1, 1));
  std::vector<Complex> nodes;
  Complex alpha{1.0, 0.0};
  Complex beta{1.0, 0.0};
  Tolerances tolerances;
  std::vector<std::string> commands;
  std::uint64_t seed = 1;

  static ExperimentConfig from_json(const nlohmann::json& j);  // ConfigError on bad input
  static ExperimentConfig from_file(const std::string& path);
};

struct Record {
  std::string name;
  std::string paper_anchor;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string metadata;  // free-form note (skip reason, sub-counts)
};

struct Report {
  std::vector<Record> records;

  bool overall_pass() const;
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// Fixed registry of anchor identifiers a record may carry.
const std::vector<std::string>& anchor_registry();

/// Known command names: check-kernels, build-model, energy, cayley, transfer,
/// intertwine, delta, conservativity, rigged, suite.
const std::vector<std::string>& command_registry();

/// Executes the configured commands. Failures of individual commands are
/// recorded as failing records; the call itself only throws ConfigError.
Report run(const ExperimentConfig& config);

enum class ExportFormat { Json, Csv };

void export_report(const Report& report, const std::string& path, ExportFormat format);

}  // namespace dbr
