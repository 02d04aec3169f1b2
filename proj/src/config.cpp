#include "alelab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "alelab/errors.hpp"

#ifndef ALELAB_VERSION
#define ALELAB_VERSION "0.0.0"
#endif

namespace alelab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_number(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  }
  if (used != v.size() || !std::isfinite(x)) throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  return x;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("config: " + what);
}

}  // namespace

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "grid.r_max",          "grid.n",
      "grid.stretch",        "grid.ghost",
      "background.kind",     "background.eps",
      "perturbation.profile", "perturbation.amplitude",
      "perturbation.center", "perturbation.width",
      "perturbation.tail_exponent", "flow.dt0",
      "flow.t_end",          "flow.scheme",
      "flow.snapshot_times", "norms.p_list",
      "norms.r_list",        "norms.k_orders",
      "fit.window",          "seed",
  };
  return keys;
}

const char* software_version() { return ALELAB_VERSION; }

Config Config::parse(const std::string& text) {
  static const std::set<std::string> known(known_config_keys().begin(), known_config_keys().end());
  Config c;
  std::istringstream in(text);
  std::string line;
  for (int no = 1; std::getline(in, line); ++no) {
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (!known.count(key)) throw ConfigError("config line " + std::to_string(no) + ": unknown key '" + key + "'");
    if (value.empty()) throw ConfigError("config line " + std::to_string(no) + ": empty value for " + key);
    if (!c.entries_.emplace(key, value).second) throw ConfigError("config: repeated key " + key);
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

double Config::number(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : to_number(key, it->second);
}

int Config::integer(const std::string& key, int fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const double x = to_number(key, it->second);
  if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError("config: " + key + " expects an integer");
  return static_cast<int>(x);
}

std::string Config::text(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

std::vector<double> Config::numbers(const std::string& key, const std::vector<double>& fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<double> out;
  std::istringstream in(it->second);
  for (std::string item; std::getline(in, item, ',');) {
    item = trim(item);
    if (item == "inf")
      out.push_back(INFINITY);
    else
      out.push_back(to_number(key, item));
  }
  return out;
}

std::string Config::canonical() const {
  std::string s;
  for (const auto& [k, v] : entries_) s += k + "=" + v + "\n";
  return s;
}

std::string Config::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void Config::validate() const {
  if (has("grid.r_max")) require(number("grid.r_max", 0) > 0, "grid.r_max must be positive");
  if (has("grid.n")) require(integer("grid.n", 0) >= 16, "grid.n must be at least 16");
  if (has("grid.stretch")) require(number("grid.stretch", 0) >= 1.0, "grid.stretch must be >= 1");
  if (has("grid.ghost")) require(integer("grid.ghost", 0) >= 1, "grid.ghost must be >= 1");
  if (has("background.kind")) {
    const std::string k = text("background.kind", "");
    require(k == "eh" || k == "flat", "background.kind must be eh or flat");
  }
  if (has("background.eps")) require(number("background.eps", 0) > 0, "background.eps must be positive");
  if (has("perturbation.profile")) {
    const std::string p = text("perturbation.profile", "");
    require(p == "bump" || p == "tail" || p == "kernel" || p == "conformal",
            "perturbation.profile must be bump, tail, kernel or conformal");
  }
  if (has("perturbation.amplitude")) require(number("perturbation.amplitude", 0) > 0, "perturbation.amplitude must be positive");
  if (has("perturbation.center")) require(number("perturbation.center", 0) > 0, "perturbation.center must be positive");
  if (has("perturbation.width")) require(number("perturbation.width", 0) > 0, "perturbation.width must be positive");
  if (has("perturbation.tail_exponent"))
    require(number("perturbation.tail_exponent", 0) > 0, "perturbation.tail_exponent must be positive");
  if (has("flow.dt0")) require(number("flow.dt0", 0) > 0, "flow.dt0 must be positive");
  if (has("flow.t_end")) require(number("flow.t_end", 0) > 0, "flow.t_end must be positive");
  if (has("flow.scheme")) {
    const std::string s = text("flow.scheme", "");
    require(s == "imex" || s == "implicit_euler" || s == "bdf2", "flow.scheme must be imex, implicit_euler or bdf2");
  }
  if (has("flow.snapshot_times")) {
    const auto ts = numbers("flow.snapshot_times", {});
    const double t_end = number("flow.t_end", INFINITY);
    for (double t : ts) require(t > 0 && t <= t_end, "flow.snapshot_times must lie in (0, t_end]");
  }
  for (const char* key : {"norms.p_list", "norms.r_list"})
    if (has(key))
      for (double p : numbers(key, {})) require(p >= 1.0, std::string(key) + " entries must be >= 1");
  if (has("norms.k_orders"))
    for (double k : numbers("norms.k_orders", {})) require(k >= 0 && k <= 2 && k == std::floor(k), "norms.k_orders must be 0, 1 or 2");
  if (has("fit.window")) {
    const auto w = numbers("fit.window", {});
    require(w.size() == 2 && w[0] > 0 && w[1] > w[0], "fit.window must be lo, hi with 0 < lo < hi");
  }
  if (has("seed")) require(integer("seed", 0) >= 0, "seed must be nonnegative");
}

}  // namespace alelab
