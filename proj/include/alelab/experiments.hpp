#pragma once

#include <functional>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "alelab/config.hpp"
#include "alelab/flow.hpp"
#include "alelab/trajectory.hpp"

namespace alelab {

/// One measured quantity against its threshold.
struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double limit = 0.0;
  std::string relation;  // "<=", ">=" or "in" (value in [limit_lo, limit])
  double limit_lo = 0.0;
};

Check check_le(std::string name, double value, double limit);
Check check_ge(std::string name, double value, double limit);
Check check_in(std::string name, double value, double lo, double hi);

using TableRow = std::map<std::string, double>;

struct CriterionResult {
  CriterionResult() = default;
  CriterionResult(std::string id_, std::string title_) : id(std::move(id_)), title(std::move(title_)) {}

  std::string id;     // "AC1" .. "AC10"
  std::string title;
  bool pass = false;  // all checks pass
  std::vector<Check> checks;
  std::vector<NamedFit> fits;
  std::map<std::string, std::vector<TableRow>> tables;
  std::vector<std::pair<std::string, Trajectory>> trajectories;

  void finish();
};

/// Smooth bolt-compatible random tensor (k_rr = k_11 at u = 0) for property checks.
InvariantTensor random_tensor(const CohomMetric& h, std::mt19937& rng);

/// (core^2 + rho^2)^{-tail/2} exp(-(rho^2/taper^2)^2), times (1 - e^{-u^2}) when bolt_factor is set.
/// Scale-critical for tail = 2.
Vec tail_profile(const CohomMetric& h, double tail, double taper, double core = 1.0, bool bolt_factor = true);

CriterionResult rates_criterion(const Config& cfg);          // AC1
CriterionResult eh_ricci_criterion(const Config& cfg);       // AC2
CriterionResult heat_criterion(const Config& cfg);           // AC3
CriterionResult kernel_criterion(const Config& cfg);         // AC4
std::vector<CriterionResult> stability_criteria(const Config& cfg);  // AC5, AC7
CriterionResult picard_criterion(const Config& cfg);         // AC6
CriterionResult psc_criterion(const Config& cfg);            // AC8
CriterionResult adm_criterion(const Config& cfg);            // AC9
CriterionResult property_suite(const Config& cfg, int jobs = 1);  // AC10

const std::vector<std::string>& subcommands();
/// Criteria of a subcommand in id order. Throws ConfigError for an unknown name.
std::vector<CriterionResult> run_subcommand(const std::string& name, const Config& cfg, int jobs = 1);

/// Runs independent tasks on up to `jobs` threads; results keep the task order.
std::vector<CriterionResult> run_parallel(const std::vector<std::function<std::vector<CriterionResult>()>>& tasks,
                                          int jobs);

}  // namespace alelab
