// Runs AC1..AC10 with default settings, one line per criterion.
#include <chrono>
#include <cstdio>
#include <algorithm>
#include <functional>
#include <iostream>
#include <map>

#include "alelab/experiments.hpp"
#include "alelab/report.hpp"

using namespace alelab;

int main() {
  const Config cfg;
  // Runtime limits in seconds.
  const std::map<std::string, double> limit = {{"AC1", 10},  {"AC2", 30},  {"AC3", 120}, {"AC4", 600}, {"AC5", 1200},
                                               {"AC6", 600}, {"AC7", 1200}, {"AC8", 600}, {"AC9", 600}, {"AC10", 300}};
  using Run = std::pair<std::vector<std::string>, std::function<std::vector<CriterionResult>()>>;
  const std::vector<Run> runs = {
      {{"AC1"}, [&] { return std::vector{rates_criterion(cfg)}; }},
      {{"AC2"}, [&] { return std::vector{eh_ricci_criterion(cfg)}; }},
      {{"AC3"}, [&] { return std::vector{heat_criterion(cfg)}; }},
      {{"AC4"}, [&] { return std::vector{kernel_criterion(cfg)}; }},
      {{"AC5", "AC7"}, [&] { return stability_criteria(cfg); }},
      {{"AC6"}, [&] { return std::vector{picard_criterion(cfg)}; }},
      {{"AC8"}, [&] { return std::vector{psc_criterion(cfg)}; }},
      {{"AC9"}, [&] { return std::vector{adm_criterion(cfg)}; }},
      {{"AC10"}, [&] { return std::vector{property_suite(cfg)}; }}};
  std::vector<CriterionResult> all;
  std::map<std::string, double> seconds;
  for (const auto& [ids, run] : runs) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<CriterionResult> rs;
    try {
      rs = run();
    } catch (const std::exception& e) {
      for (const auto& id : ids) {
        CriterionResult r{id, std::string("exception: ") + e.what()};
        rs.push_back(r);
      }
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (auto& r : rs) {
      seconds[r.id] = s;
      if (!r.checks.empty()) r.checks.push_back(check_le("runtime [s]", s, limit.at(r.id)));
      r.finish();
      all.push_back(std::move(r));
    }
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return std::stoi(a.id.substr(2)) < std::stoi(b.id.substr(2)); });
  for (const auto& r : all) {
    char t[32];
    std::snprintf(t, sizeof t, " (%.1f s)", seconds[r.id]);
    std::cout << summary_line(r) << t << std::endl;
  }
  return all_pass(all) ? 0 : 1;
}
