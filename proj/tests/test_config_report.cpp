#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "alelab/config.hpp"
#include "alelab/errors.hpp"
#include "alelab/experiments.hpp"
#include "alelab/report.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace alelab;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CriterionResult sample_result() {
  CriterionResult r{"AC5", "sample"};
  r.checks.push_back(check_le("a", 0.5, 1.0));
  r.checks.push_back(check_in("b", -0.5, -0.6, -0.4));
  r.tables["samples"] = {{{"t", 1.0}, {"v", 2.0}}};
  Trajectory tr;
  for (double t : {1.0, 2.0}) {
    DiagnosticsRow row;
    row.t = t;
    row.L2_k = 1.0 / t;
    tr.rows.push_back(row);
  }
  r.trajectories.emplace_back("run", tr);
  r.finish();
  return r;
}

}  // namespace

TEST_CASE("config grammar") {
  const Config c = Config::parse("# comment\n\ngrid.n = 500   # trailing\nfit.window = 1, 1e2\nflow.snapshot_times = 1, inf\n");
  CHECK(c.integer("grid.n", 0) == 500);
  CHECK(c.number("grid.r_max", 7.0) == 7.0);
  CHECK(c.numbers("fit.window", {}) == std::vector<double>{1.0, 100.0});
  CHECK(std::isinf(c.numbers("flow.snapshot_times", {})[1]));
  CHECK(c.canonical() == "fit.window=1, 1e2\nflow.snapshot_times=1, inf\ngrid.n=500\n");

  CHECK_THROWS_AS(Config::parse("grid.n 5"), ConfigError);
  CHECK_THROWS_AS(Config::parse("grid.nodes = 5"), ConfigError);
  CHECK_THROWS_AS(Config::parse("grid.n = 5\ngrid.n = 6"), ConfigError);
  CHECK_THROWS_AS(Config::parse("grid.n ="), ConfigError);
  CHECK_THROWS_AS(Config::parse("grid.n = 5.5").integer("grid.n", 0), ConfigError);
  CHECK_THROWS_AS(Config::parse("grid.r_max = abc").number("grid.r_max", 0), ConfigError);
  CHECK_THROWS_AS(Config::load("/nonexistent/alelab.cfg"), ConfigError);
}

TEST_CASE("config validation") {
  CHECK_NOTHROW(Config::parse("grid.n = 100\nflow.scheme = bdf2\nnorms.p_list = 2, 4, inf").validate());
  for (const char* bad : {"grid.n = 3", "grid.stretch = 0.9", "background.kind = sphere", "flow.scheme = rk4",
                          "fit.window = 5, 1", "norms.p_list = 0.5", "norms.k_orders = 3",
                          "flow.t_end = 10\nflow.snapshot_times = 20", "perturbation.profile = wave"})
    CHECK_THROWS_AS(Config::parse(bad).validate(), ConfigError);
}

TEST_CASE("config hash is FNV-1a of the canonical form") {
  CHECK(Config().hash() == "cbf29ce484222325");  // FNV-1a 64 offset basis
  const Config a = Config::parse("grid.n = 100\nseed = 3"), b = Config::parse("seed = 3\n# x\ngrid.n = 100");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != Config::parse("grid.n = 101\nseed = 3").hash());
  CHECK(a.hash().size() == 16);
}

TEST_CASE("report json is deterministic and complete") {
  const Config cfg = Config::parse("seed = 1");
  const std::vector<CriterionResult> rs{sample_result()};
  const std::string a = report_json(rs, cfg, "flow");
  CHECK(a == report_json(rs, cfg, "flow"));
  const auto j = nlohmann::json::parse(a);
  CHECK(j["schema"] == 1);
  CHECK(j["software_version"] == software_version());
  CHECK(j["config_hash"] == cfg.hash());
  CHECK(j["config"]["seed"] == "1");
  CHECK(j["pass"] == true);
  CHECK(j["criteria"][0]["checks"].size() == 2);
  CHECK(j["criteria"][0]["checks"][1]["limit_lo"] == -0.6);
  CHECK(j["criteria"][0]["trajectories"][0] == "AC5/run.csv");
  CHECK(a.find("wall") == std::string::npos);

  const auto e = nlohmann::json::parse(report_json({}, Config(), "check"));
  CHECK(e["criteria"].empty());
}

TEST_CASE("emit_report writes stamped CSVs and report.json") {
  const auto dir = std::filesystem::temp_directory_path() / "alelab_report_test";
  std::filesystem::remove_all(dir);
  const Config cfg = Config::parse("seed = 1");
  const auto written = emit_report({sample_result()}, cfg, "flow", dir.string());
  CHECK(written.size() == 2);
  std::istringstream csv(slurp(dir / "AC5" / "run.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == std::string("# alelab ") + software_version() + " config " + cfg.hash());
  std::getline(csv, line);
  CHECK(line.rfind("t,L2_k,", 0) == 0);
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 2);
  const std::string first = slurp(dir / "report.json");
  emit_report({sample_result()}, cfg, "flow", dir.string());
  CHECK(slurp(dir / "report.json") == first);
  std::filesystem::remove_all(dir);
}

TEST_CASE("summary line lists failing checks first") {
  CriterionResult r{"AC1", "t"};
  r.checks = {check_le("ok", 0.0, 1.0), check_le("bad", 2.0, 1.0)};
  r.finish();
  CHECK_FALSE(r.pass);
  CHECK(summary_line(r).rfind("AC1 FAIL t: bad 2 <= 1; ok 0 <= 1", 0) == 0);
}

TEST_CASE("rates subcommand covers 12 pairs") {
  const auto rs = run_subcommand("rates", Config());
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].id == "AC1");
  CHECK(rs[0].tables.at("rates").size() == 12);
  CHECK_THROWS_AS(run_subcommand("bogus", Config()), ConfigError);
}
