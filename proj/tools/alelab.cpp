#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "alelab/config.hpp"
#include "alelab/errors.hpp"
#include "alelab/experiments.hpp"
#include "alelab/report.hpp"

namespace {

constexpr int kPass = 0, kFail = 1, kConfig = 2, kUsage = 64;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ricci-de Turck flow experiments near Eguchi-Hanson"};
  std::string sub, config_path, out_dir = "alelab_out";
  int jobs = 1;
  bool verbose = false;
  std::string names;
  for (const auto& s : alelab::subcommands()) names += (names.empty() ? "" : "|") + s;
  app.add_option("subcommand", sub, names)->required();
  app.add_option("--config", config_path, "flat key = value configuration file");
  app.add_option("--out", out_dir, "output directory (ALELAB_OUT overrides)");
  app.add_option("--jobs", jobs, "parallel sub-experiments")->check(CLI::PositiveNumber);
  app.add_flag("--verbose", verbose, "print every check");
  app.set_version_flag("--version", alelab::software_version());
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  const auto& known = alelab::subcommands();
  if (std::find(known.begin(), known.end(), sub) == known.end()) {
    std::cerr << "unknown subcommand '" << sub << "'\n" << app.help();
    return kUsage;
  }
  if (const char* env = std::getenv("ALELAB_OUT"); env && *env) out_dir = env;

  alelab::Config cfg;
  try {
    if (!config_path.empty()) cfg = alelab::Config::load(config_path);
    cfg.validate();
  } catch (const alelab::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<alelab::CriterionResult> results;
  try {
    results = alelab::run_subcommand(sub, cfg, jobs);
  } catch (const alelab::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << sub << " failed: " << e.what() << "\n";
    return kFail;
  }
  try {
    alelab::emit_report(results, cfg, sub, out_dir);
  } catch (const alelab::ConfigError& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kConfig;
  }
  for (const auto& r : results) {
    std::cout << alelab::summary_line(r) << "\n";
    if (verbose)
      for (const auto& c : r.checks) std::cout << "    " << (c.pass ? "ok   " : "FAIL ") << c.name << " = " << c.value << "\n";
  }
  if (verbose)
    std::cerr << "wall clock " << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
  return alelab::all_pass(results) ? kPass : kFail;
}
