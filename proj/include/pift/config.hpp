#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace pift {

/// A configuration problem, located by source line or by key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the TOML subset used by experiment configs into a JSON tree:
/// comments, [table] and [dotted.table] headers, bare or quoted keys, and
/// values that are basic strings, integers, floats, booleans or (possibly
/// multi-line, nested) arrays. Throws ConfigError naming the line.
nlohmann::json parse_toml(const std::string& text, const std::string& source = "<string>");

/// Loads a .toml or .json file.
nlohmann::json load_config_file(const std::string& path);

/// Typed access into a config tree with key-path error messages.
class ConfigView {
 public:
  ConfigView(const nlohmann::json& root, std::string path) : node_(root), path_(std::move(path)) {}

  bool has(const std::string& key) const;
  ConfigView section(const std::string& key) const;

  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  long integer(const std::string& key) const;
  long integer(const std::string& key, long fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string string(const std::string& key) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<std::string> strings(const std::string& key) const;

  const nlohmann::json& json() const { return node_; }
  std::string where(const std::string& key) const;

 private:
  const nlohmann::json& at(const std::string& key) const;

  const nlohmann::json& node_;
  std::string path_;
};

/// Sets a value at a dotted key path, creating tables as needed.
void set_path(nlohmann::json& root, const std::string& dotted, const nlohmann::json& value);
/// Reads a value at a dotted key path; null when absent.
nlohmann::json get_path(const nlohmann::json& root, const std::string& dotted);

}  // namespace pift
