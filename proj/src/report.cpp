#include "alelab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "alelab/errors.hpp"
#include "json.hpp"

namespace alelab {

namespace {

using nlohmann::json;

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json check_json(const Check& c) {
  json j = {{"name", c.name}, {"pass", c.pass}, {"value", number(c.value)}, {"limit", number(c.limit)}, {"relation", c.relation}};
  if (c.relation == "in") j["limit_lo"] = number(c.limit_lo);
  return j;
}

json fit_json(const NamedFit& f) {
  return {{"column", f.column},
          {"exponent", number(f.fit.exponent)},
          {"amplitude", number(f.fit.amplitude)},
          {"log_coefficient", number(f.fit.log_coefficient)},
          {"residual", number(f.fit.residual)},
          {"t_lo", number(f.fit.t_lo)},
          {"t_hi", number(f.fit.t_hi)},
          {"samples", f.fit.samples},
          {"has_log", f.fit.has_log},
          {"degenerate", f.fit.degenerate}};
}

std::string csv_name(const CriterionResult& r, const std::string& name) { return r.id + "/" + name + ".csv"; }

json criterion_json(const CriterionResult& r) {
  json j = {{"id", r.id}, {"title", r.title}, {"pass", r.pass}};
  j["checks"] = json::array();
  for (const auto& c : r.checks) j["checks"].push_back(check_json(c));
  j["fits"] = json::array();
  for (const auto& f : r.fits) j["fits"].push_back(fit_json(f));
  j["tables"] = json::object();
  for (const auto& [name, rows] : r.tables) {
    json t = json::array();
    for (const auto& row : rows) {
      json o = json::object();
      for (const auto& [k, v] : row) o[k] = number(v);
      t.push_back(o);
    }
    j["tables"][name] = t;
  }
  j["trajectories"] = json::array();
  for (const auto& [name, tr] : r.trajectories) j["trajectories"].push_back(csv_name(r, name));
  return j;
}

std::string format_value(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

}  // namespace

bool all_pass(const std::vector<CriterionResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.pass; });
}

std::string report_json(const std::vector<CriterionResult>& results, const Config& cfg, const std::string& subcommand) {
  json j;
  j["schema"] = 1;
  j["software_version"] = software_version();
  j["config_hash"] = cfg.hash();
  j["config"] = json::object();
  for (const auto& [k, v] : cfg.entries()) j["config"][k] = v;
  j["subcommand"] = subcommand;
  j["pass"] = all_pass(results);
  j["criteria"] = json::array();
  for (const auto& r : results) j["criteria"].push_back(criterion_json(r));
  return j.dump(2) + "\n";
}

std::vector<std::string> emit_report(const std::vector<CriterionResult>& results, const Config& cfg,
                                     const std::string& subcommand, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + out_dir + ": " + ec.message());
  std::vector<std::string> written;
  const std::string stamp = std::string("alelab ") + software_version() + " config " + cfg.hash();
  for (const auto& r : results)
    for (const auto& [name, tr] : r.trajectories) {
      const fs::path p = fs::path(out_dir) / csv_name(r, name);
      fs::create_directories(p.parent_path(), ec);
      if (ec) throw ConfigError("cannot create " + p.parent_path().string());
      write_trajectory_csv(tr, p.string(), stamp);
      written.push_back(p.string());
    }
  const fs::path rp = fs::path(out_dir) / "report.json";
  std::ofstream out(rp, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + rp.string());
  out << report_json(results, cfg, subcommand);
  written.push_back(rp.string());
  return written;
}

std::string summary_line(const CriterionResult& r) {
  std::string s = r.id + (r.pass ? " PASS " : " FAIL ") + r.title + ":";
  // Failing checks first, then as many as fit on a line.
  std::vector<const Check*> order;
  for (const auto& c : r.checks)
    if (!c.pass) order.push_back(&c);
  for (const auto& c : r.checks)
    if (c.pass) order.push_back(&c);
  const std::size_t shown = std::min<std::size_t>(order.size(), 3);
  for (std::size_t i = 0; i < shown; ++i) {
    const Check& c = *order[i];
    s += (i ? "; " : " ") + c.name + " " + format_value(c.value);
    if (c.relation == "in")
      s += " in [" + format_value(c.limit_lo) + ", " + format_value(c.limit) + "]";
    else
      s += " " + c.relation + " " + format_value(c.limit);
  }
  if (order.size() > shown) s += "; +" + std::to_string(order.size() - shown) + " more checks";
  return s;
}

}  // namespace alelab
