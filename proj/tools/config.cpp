#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <stdexcept>

namespace pin::cli {

namespace {

using Check = std::function<std::string(const Value&)>;

Check positive() {
  return [](const Value& v) -> std::string {
    if (auto* i = std::get_if<std::int64_t>(&v)) return *i > 0 ? "" : "must be positive";
    if (auto* d = std::get_if<double>(&v)) return *d > 0.0 ? "" : "must be positive";
    return "";
  };
}

Check at_least(std::int64_t lo) {
  return [lo](const Value& v) -> std::string {
    return std::get<std::int64_t>(v) >= lo ? "" : "must be at least " + std::to_string(lo);
  };
}

Check one_of(std::vector<std::string> options) {
  return [options](const Value& v) -> std::string {
    const auto& s = std::get<std::string>(v);
    if (std::find(options.begin(), options.end(), s) != options.end()) return "";
    std::string msg = "must be one of";
    for (const auto& o : options) msg += " " + o;
    return msg;
  };
}

Check positive_list() {
  return [](const Value& v) -> std::string {
    if (auto* d = std::get_if<std::vector<double>>(&v)) {
      for (double x : *d) {
        if (!(x > 0.0)) return "entries must be positive";
      }
    }
    if (auto* i = std::get_if<std::vector<std::int64_t>>(&v)) {
      for (auto x : *i) {
        if (x <= 0) return "entries must be positive";
      }
    }
    return "";
  };
}

std::vector<KeySpec> build_schema() {
  const std::vector<std::string> all = {"sim", "psi", "uconv", "cg-check", "rege", "hc", "scan", "smoothing",
                                        "alpha-gt1"};
  using T = ValueType;
  return {
      {"seed", T::integer, "", all, at_least(0)},
      {"budget", T::real, "1e13", {}, positive()},
      {"workers", T::integer, "0", {}, at_least(0)},

      {"law.kind", T::text, "power_law", {}, one_of({"power_law", "deterministic", "two_point"})},
      {"law.alpha", T::real, "0.75", {}, positive()},
      {"law.L", T::text, "const", {}, one_of({"const", "logpow"})},
      {"law.L_param", T::real, "1", {}, {}},
      {"law.n_max", T::integer, "0", {}, at_least(0)},

      {"disorder.kind", T::text, "gaussian", {}, one_of({"gaussian", "uniform", "rademacher", "gamma_exp"})},
      {"disorder.gamma", T::real, "1.5", {}, {}},

      {"sim.beta_hat", T::real_list, "", {"sim"}, {}},
      {"sim.h_hat", T::real_list, "", {"sim"}, {}},
      {"sim.t", T::real, "1", {}, positive()},
      {"sim.N", T::integer, "", {"sim"}, positive()},
      {"sim.replicas", T::integer, "256", {}, at_least(2)},
      {"sim.c", T::real_list, "", {}, positive_list()},

      {"psi.nu", T::real, "", {}, positive()},
      {"psi.delta_hat", T::real_list, "", {"psi"}, {}},
      {"psi.t_grid", T::real_list, "", {"psi"}, {}},
      {"psi.tol", T::real, "1e-8", {}, positive()},
      {"psi.panels", T::integer, "1024", {}, at_least(4)},

      {"uconv.delta_hat", T::real, "1", {}, {}},
      {"uconv.t_grid", T::real_list, "", {}, {}},
      {"uconv.N_list", T::int_list, "", {"uconv"}, positive_list()},
      {"uconv.intersection", T::boolean, "false", {}, {}},
      {"uconv.tol", T::real, "1e-8", {}, positive()},

      {"cg.N", T::integer, "", {"cg-check"}, positive()},
      {"cg.t", T::integer, "", {"cg-check"}, positive()},
      {"cg.beta", T::real, "0.5", {}, {}},
      {"cg.h", T::real, "0", {}, {}},
      {"cg.instances", T::integer, "10", {}, positive()},

      {"rege.alpha", T::real, "", {}, positive()},
      {"rege.samples", T::integer, "100000", {}, positive()},
      {"rege.t_max", T::integer, "20", {}, positive()},
      {"rege.gamma_grid", T::real_list, "1e-4,3e-4,1e-3,3e-3,1e-2", {}, positive_list()},
      {"rege.write_samples", T::integer, "100", {}, at_least(0)},

      {"solver.kappa", T::real, "3", {}, {}},
      {"solver.c0", T::real, "2", {}, {}},
      {"solver.tol", T::real, "1e-4", {}, positive()},
      {"solver.h_lo", T::real, "0", {}, {}},
      {"solver.h_hi", T::real, "0.1", {}, {}},

      {"hc.beta", T::real_list, "", {"hc"}, {}},
      {"hc.N", T::integer, "", {"hc"}, positive()},
      {"hc.replicas", T::integer, "256", {}, at_least(2)},

      {"scan.beta_grid", T::real_list, "", {"scan"}, positive_list()},
      {"scan.N", T::integer, "", {"scan"}, positive()},
      {"scan.replicas", T::integer, "256", {}, at_least(2)},

      {"smoothing.beta", T::real, "", {"smoothing"}, positive()},
      {"smoothing.h_offsets", T::real_list, "0.05,0.1,0.15,0.2,0.25,0.3", {}, {}},
      {"smoothing.N", T::integer, "", {"smoothing"}, positive()},
      {"smoothing.replicas", T::integer, "256", {}, at_least(8)},

      {"alpha_gt1.beta_grid", T::real_list, "", {"alpha-gt1"}, positive_list()},
      {"alpha_gt1.N", T::integer, "", {"alpha-gt1"}, positive()},
      {"alpha_gt1.replicas", T::integer, "256", {}, at_least(2)},
  };
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_int(std::string_view s, std::int64_t& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

bool parse_real(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

const char* type_name(ValueType t) {
  switch (t) {
    case ValueType::integer: return "an integer";
    case ValueType::real: return "a number";
    case ValueType::text: return "a word";
    case ValueType::boolean: return "true or false";
    case ValueType::real_list: return "a comma-separated list of numbers";
    case ValueType::int_list: return "a comma-separated list of integers";
  }
  return "a value";
}

// Parses `raw` as the key's type; returns an error message or empty.
std::string parse_value(const KeySpec& spec, std::string_view raw, Value& out) {
  const std::string mismatch = std::string("type mismatch, expected ") + type_name(spec.type);
  switch (spec.type) {
    case ValueType::integer: {
      std::int64_t v;
      if (!parse_int(raw, v)) return mismatch;
      out = v;
      break;
    }
    case ValueType::real: {
      double v;
      if (!parse_real(raw, v)) return mismatch;
      out = v;
      break;
    }
    case ValueType::text: {
      if (raw.empty() || raw.find_first_of(" \t,") != std::string_view::npos) return mismatch;
      out = std::string(raw);
      break;
    }
    case ValueType::boolean: {
      if (raw == "true") {
        out = true;
      } else if (raw == "false") {
        out = false;
      } else {
        return mismatch;
      }
      break;
    }
    case ValueType::real_list: {
      std::vector<double> v;
      for (auto item : split_list(raw)) {
        double x;
        if (!parse_real(item, x)) return mismatch;
        v.push_back(x);
      }
      if (v.empty()) return "empty list";
      out = std::move(v);
      break;
    }
    case ValueType::int_list: {
      std::vector<std::int64_t> v;
      for (auto item : split_list(raw)) {
        std::int64_t x;
        if (!parse_int(item, x)) return mismatch;
        v.push_back(x);
      }
      if (v.empty()) return "empty list";
      out = std::move(v);
      break;
    }
  }
  return spec.check ? spec.check(out) : "";
}

}  // namespace

const std::vector<KeySpec>& config_schema() {
  static const std::vector<KeySpec> schema = build_schema();
  return schema;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"sim", "psi", "uconv", "cg-check", "rege",
                                                 "hc",  "scan", "smoothing", "alpha-gt1"};
  return names;
}

std::string ConfigError::str() const {
  std::string out = line > 0 ? "line " + std::to_string(line) + ": " : "";
  if (!key.empty()) out += key + ": ";
  return out + message;
}

const Value& RunConfig::at(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::out_of_range("config key '" + key + "' is not set");
  return it->second;
}

std::int64_t RunConfig::integer(const std::string& key) const { return std::get<std::int64_t>(at(key)); }
double RunConfig::real(const std::string& key) const { return std::get<double>(at(key)); }
const std::string& RunConfig::str(const std::string& key) const { return std::get<std::string>(at(key)); }
bool RunConfig::boolean(const std::string& key) const { return std::get<bool>(at(key)); }
const std::vector<double>& RunConfig::reals(const std::string& key) const {
  return std::get<std::vector<double>>(at(key));
}

std::vector<std::size_t> RunConfig::sizes(const std::string& key) const {
  const auto& v = std::get<std::vector<std::int64_t>>(at(key));
  return {v.begin(), v.end()};
}

std::optional<double> RunConfig::maybe_real(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return real(key);
}

int RunConfig::line(const std::string& key) const {
  const auto it = lines_.find(key);
  return it == lines_.end() ? 0 : it->second;
}

ParseResult parse_config(std::string_view text, std::string_view experiment) {
  ParseResult res;
  res.config.experiment = std::string(experiment);
  res.config.text = std::string(text);
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end()) {
    res.errors.push_back({0, "", "unknown experiment '" + std::string(experiment) + "'"});
  }
  const auto& schema = config_schema();
  auto find_spec = [&](std::string_view key) -> const KeySpec* {
    for (const auto& s : schema) {
      if (s.key == key) return &s;
    }
    return nullptr;
  };

  std::vector<ConfigError> line_errors;
  std::set<std::string> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      line_errors.push_back({line_no, "", "expected 'section.key = value'"});
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const auto raw = trim(line.substr(eq + 1));
    const KeySpec* spec = find_spec(key);
    if (!spec) {
      line_errors.push_back({line_no, key, "unknown key"});
      continue;
    }
    if (seen.count(key)) {
      line_errors.push_back({line_no, key,
                             "duplicate key (lines " + std::to_string(res.config.line(key)) + " and " +
                                 std::to_string(line_no) + ")"});
      continue;
    }
    seen.insert(key);
    res.config.set_line(key, line_no);
    Value v;
    if (auto msg = parse_value(*spec, raw, v); !msg.empty()) {
      line_errors.push_back({line_no, key, msg});
      continue;
    }
    res.config.set(key, std::move(v));
  }

  std::vector<ConfigError> missing;
  for (const auto& spec : schema) {
    if (seen.count(spec.key)) continue;
    if (!spec.fallback.empty()) {
      Value v;
      parse_value(spec, spec.fallback, v);
      res.config.set(spec.key, std::move(v));
      continue;
    }
    const auto& req = spec.required_for;
    if (std::find(req.begin(), req.end(), experiment) != req.end()) {
      missing.push_back({0, spec.key, "missing required key"});
    }
  }
  res.errors.insert(res.errors.end(), line_errors.begin(), line_errors.end());
  res.errors.insert(res.errors.end(), missing.begin(), missing.end());
  return res;
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace pin::cli
