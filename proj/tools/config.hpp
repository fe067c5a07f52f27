#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pin::cli {

enum class ValueType { integer, real, text, boolean, real_list, int_list };

using Value = std::variant<std::int64_t, double, std::string, bool, std::vector<double>, std::vector<std::int64_t>>;

struct KeySpec {
  std::string key;   // section.key, or a bare key for run-wide settings
  ValueType type;
  std::string fallback;                    // textual default, empty when there is none
  std::vector<std::string> required_for;   // experiments that need the key
  std::function<std::string(const Value&)> check;  // returns a message when the value is invalid
};

/// Every accepted key, in documentation order.
const std::vector<KeySpec>& config_schema();

/// sim, psi, uconv, cg-check, rege, hc, scan, smoothing, alpha-gt1.
const std::vector<std::string>& experiment_names();

struct ConfigError {
  int line = 0;  // 0 when the problem is not tied to a line
  std::string key;
  std::string message;

  std::string str() const;
};

class RunConfig {
 public:
  std::string experiment;
  std::string text;  // the source text, hashed into the manifest

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::int64_t integer(const std::string& key) const;
  double real(const std::string& key) const;
  const std::string& str(const std::string& key) const;
  bool boolean(const std::string& key) const;
  const std::vector<double>& reals(const std::string& key) const;
  std::vector<std::size_t> sizes(const std::string& key) const;
  std::optional<double> maybe_real(const std::string& key) const;

  void set(const std::string& key, Value v) { values_[key] = std::move(v); }
  /// Line of the key in the source, 0 for defaults and overrides.
  int line(const std::string& key) const;
  void set_line(const std::string& key, int line) { lines_[key] = line; }

 private:
  const Value& at(const std::string& key) const;
  std::map<std::string, Value> values_;
  std::map<std::string, int> lines_;
};

struct ParseResult {
  RunConfig config;
  std::vector<ConfigError> errors;  // all problems found, in line order
  bool ok() const { return errors.empty(); }
};

/// Line-oriented `section.key = value` text; `#` starts a comment. Lists are
/// comma separated. Defaults fill in absent optional keys.
ParseResult parse_config(std::string_view text, std::string_view experiment);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data);

}  // namespace pin::cli
