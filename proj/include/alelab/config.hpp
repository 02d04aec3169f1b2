#pragma once

#include <map>
#include <string>
#include <vector>

namespace alelab {

/// Flat experiment configuration. Grammar, one entry per line:
///   key = value        # dotted section keys, e.g. grid.n = 1000
///   key = a, b, c      # lists are comma separated
/// Blank lines and text after '#' are ignored. Keys outside known_config_keys()
/// and repeated keys are errors.
class Config {
 public:
  Config() = default;
  static Config parse(const std::string& text);
  /// Throws ConfigError when the file cannot be read.
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  double number(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }
  /// Sorted "key=value" lines.
  std::string canonical() const;
  /// FNV-1a 64 of canonical(), 16 hex digits.
  std::string hash() const;

  /// Range checks against the module preconditions; throws ConfigError.
  void validate() const;

 private:
  std::map<std::string, std::string> entries_;
};

const std::vector<std::string>& known_config_keys();

const char* software_version();

}  // namespace alelab
