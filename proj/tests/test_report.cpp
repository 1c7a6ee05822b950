#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dbr/report.hpp"

using namespace dbr;
using json = nlohmann::json;

namespace {

json blaschke_config() {
  return json{{"function", {{"kind", "blaschke"}, {"domain", "halfplane"}, {"data", {{"a", {1.0, 0.0}}}}}},
              {"nodes", {{1.0, 0.0}, {2.0, 0.0}, {3.0, 1.0}}},
              {"alpha", {1.0, 0.0}},
              {"beta", {1.0, 0.0}},
              {"commands", {"suite"}},
              {"seed", 42}};
}

}  // namespace

TEST_CASE("config parsing and validation") {
  ExperimentConfig cfg = ExperimentConfig::from_json(blaschke_config());
  CHECK(cfg.seed == 42);
  CHECK(cfg.nodes.size() == 3);
  CHECK(cfg.commands == std::vector<std::string>{"suite"});

  json bad = blaschke_config();
  bad["commands"] = {"not-a-command"};
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);

  json bad_tol = blaschke_config();
  bad_tol["tolerances"] = {{"psd", -1.0}};
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad_tol), ConfigError);

  CHECK_THROWS_AS(ExperimentConfig::from_json(json::array()), ConfigError);
}

TEST_CASE("empty command list yields an empty passing report") {
  ExperimentConfig cfg = ExperimentConfig::from_json(blaschke_config());
  cfg.commands.clear();
  Report rep = run(cfg);
  CHECK(rep.records.empty());
  CHECK(rep.overall_pass());
}

TEST_CASE("suite is deterministic for a fixed seed") {
  ExperimentConfig cfg = ExperimentConfig::from_json(blaschke_config());
  cfg.commands = {"energy", "transfer", "check-kernels"};
  Report a = run(cfg);
  Report b = run(cfg);
  CHECK(a.to_json().dump() == b.to_json().dump());
  CHECK(a.overall_pass());

  cfg.seed = 43;
  Report c = run(cfg);
  CHECK(c.overall_pass());
}

TEST_CASE("anchors come from the fixed registry") {
  ExperimentConfig cfg = ExperimentConfig::from_json(blaschke_config());
  Report rep = run(cfg);
  const auto& registry = anchor_registry();
  for (const Record& r : rep.records) {
    bool known = std::find(registry.begin(), registry.end(), r.paper_anchor) != registry.end();
    CHECK_MESSAGE(known, r.paper_anchor);
  }
  CHECK(rep.overall_pass());
}

TEST_CASE("csv export shape and ascii") {
  ExperimentConfig cfg = ExperimentConfig::from_json(blaschke_config());
  cfg.commands = {"energy"};
  Report rep = run(cfg);
  std::string csv = rep.to_csv();
  std::istringstream lines(csv);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    for (char ch : line) CHECK(static_cast<unsigned char>(ch) < 128);
  }
  CHECK(rows == rep.records.size() + 1);
}

TEST_CASE("json export round trips") {
  ExperimentConfig cfg = ExperimentConfig::from_json(blaschke_config());
  cfg.commands = {"energy"};
  Report rep = run(cfg);
  export_report(rep, "/tmp/dbr_test_report.json", ExportFormat::Json);
  std::ifstream in("/tmp/dbr_test_report.json");
  json parsed;
  in >> parsed;
  CHECK(parsed["records"].size() == rep.records.size());
  CHECK(parsed["overall_pass"] == rep.overall_pass());

  export_report(rep, "/tmp/dbr_test_report.csv", ExportFormat::Csv);
  std::ifstream csv_in("/tmp/dbr_test_report.csv");
  std::string header;
  std::getline(csv_in, header);
  CHECK(header == "name,paper_anchor,residual,tolerance,pass");
}

TEST_CASE("non-contractive symbols fail fast with skip records") {
  json cfg_json = blaschke_config();
  cfg_json["function"] = {{"kind", "constant"}, {"domain", "halfplane"}, {"data", {{"d", {{{1.2, 0.0}}}}}}};
  cfg_json["commands"] = {"energy", "transfer"};
  ExperimentConfig cfg = ExperimentConfig::from_json(cfg_json);
  Report rep = run(cfg);
  CHECK_FALSE(rep.overall_pass());
  REQUIRE(rep.records.size() == 3);  // scan + two skipped commands
  CHECK(rep.records[0].name == "contractivity/scan");
  CHECK_FALSE(rep.records[0].pass);
  for (std::size_t i = 1; i < rep.records.size(); ++i) {
    CHECK(rep.records[i].metadata.find("skipped") != std::string::npos);
    CHECK_FALSE(rep.records[i].pass);
  }
}

TEST_CASE("isometric constant runs the suite cleanly") {
  // The zero-dimensional realization makes Delta trivial; the vacuous B
  // perturbation must not be reported as a failing negative control.
  json cfg_json = blaschke_config();
  cfg_json["function"] = {{"kind", "constant"}, {"domain", "halfplane"}, {"data", {{"d", {{{1.0, 0.0}}}}}}};
  cfg_json["commands"] = {"delta", "energy", "build-model"};
  Report rep = run(ExperimentConfig::from_json(cfg_json));
  CHECK(rep.overall_pass());
}

TEST_CASE("nodes colliding with internal resolvent parameters are tolerated") {
  json cfg_json = blaschke_config();
  // conj(alpha + 0.3 + 0.4i) placed as a basis node on purpose.
  cfg_json["nodes"] = {{1.3, -0.4}, {2.0, 0.0}, {3.0, 1.0}};
  cfg_json["commands"] = {"build-model"};
  Report rep = run(ExperimentConfig::from_json(cfg_json));
  CHECK(rep.overall_pass());
}

TEST_CASE("suite passes on the blaschke example") {
  ExperimentConfig cfg = ExperimentConfig::from_json(blaschke_config());
  Report rep = run(cfg);
  CHECK(rep.overall_pass());
  CHECK(rep.records.size() > 20);
}
