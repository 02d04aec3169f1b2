#pragma once

#include <string>
#include <vector>

#include "alelab/config.hpp"
#include "alelab/experiments.hpp"

namespace alelab {

/// report.json content (schema 1). Keys are sorted; no timing, so identical runs
/// produce identical bytes.
std::string report_json(const std::vector<CriterionResult>& results, const Config& cfg, const std::string& subcommand);

/// Writes <out>/report.json and <out>/<criterion>/<name>.csv per trajectory.
/// Returns the written paths.
std::vector<std::string> emit_report(const std::vector<CriterionResult>& results, const Config& cfg,
                                     const std::string& subcommand, const std::string& out_dir);

bool all_pass(const std::vector<CriterionResult>& results);

/// "AC5 PASS stability of Eguchi-Hanson: Linf exponent -0.95 <= -0.8; ..."
std::string summary_line(const CriterionResult& r);

}  // namespace alelab
