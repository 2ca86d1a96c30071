#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dampedwave/error.hpp"

namespace dampedwave {

enum class KeyType { real, count, integer, text, real_list, integer_list };

struct KeySpec {
  const char* name;
  KeyType type;
  const char* help;
};

inline const std::vector<KeySpec>& known_keys() {
  static const std::vector<KeySpec> keys = {
      {"degree", KeyType::integer, "polynomial degree k of Q_h (V_h has k+1)"},
      {"n-cells", KeyType::count, "number of mesh cells"},
      {"h", KeyType::real, "mesh size (alternative to n-cells)"},
      {"tau", KeyType::real, "time step"},
      {"theta", KeyType::real, "fixed theta"},
      {"lambda", KeyType::real, "adaptive theta = 1/2 + lambda*tau"},
      {"a-const", KeyType::real, "constant damping"},
      {"a-values", KeyType::real_list, "piecewise constant damping on equal subintervals"},
      {"t-final", KeyType::real, "final time"},
      {"n-steps", KeyType::count, "number of time steps (alternative to t-final)"},
      {"u0", KeyType::text, "initial u: mode|cos|zero|random"},
      {"p0", KeyType::text, "initial p: mode|sin|hat|zero|random"},
      {"out", KeyType::text, "CSV output path, '-' for stdout"},
      {"svg", KeyType::text, "optional SVG plot path"},
      {"seed", KeyType::count, "seed for random initial data"},
      {"report-every", KeyType::real, "time between table rows"},
      {"report-stride", KeyType::count, "steps between energy rows"},
      {"snapshot-stride", KeyType::count, "steps between snapshots, 0 for first and last only"},
      {"sweep", KeyType::text, "convergence sweep: both|h|tau"},
      {"levels", KeyType::count, "number of refinement levels"},
      {"n-cells-coarse", KeyType::count, "coarsest mesh of the h sweep"},
      {"tau-coarse", KeyType::real, "coarsest step of the tau sweep"},
      {"mesh-levels", KeyType::integer_list, "mesh sizes h = 2^-l"},
      {"fit-lo", KeyType::real, "start of the rate-fit window"},
      {"fit-hi", KeyType::real, "end of the rate-fit window"},
      {"a-exp-min", KeyType::integer, "smallest exponent j of a = 2^j"},
      {"a-exp-max", KeyType::integer, "largest exponent j of a = 2^j"},
      {"tol", KeyType::real, "power iteration tolerance"},
      {"method", KeyType::text, "linear solver: monolithic|schur"},
      {"reference", KeyType::text, "map of the exact solution into the FE spaces: projection|interpolation"},
  };
  return keys;
}

inline std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

inline const KeySpec& key_spec(const std::string& key) {
  for (const auto& k : known_keys()) {
    if (key == k.name) return k;
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a real number, got '" + v + "'");
  }
}

inline long long parse_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

}  // namespace detail

using ConfigMap = std::map<std::string, std::string>;

/// Reads `key = value` lines; '#' starts a comment.
inline ConfigMap parse_config_text(std::string_view text, const std::string& origin = "config") {
  ConfigMap out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = normalize_key(detail::trim(std::string_view(t).substr(0, eq)));
    const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key or value");
    }
    key_spec(key);
    out[key] = value;
  }
  return out;
}

inline ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"decay-table", "convergence", "cn-demo",
                                                 "arate",       "stationary",  "simulate"};
  return names;
}

/// Fully resolved configuration of one experiment: defaults merged with file
/// values and overrides, every value type-checked.
class ExperimentConfig {
 public:
  ExperimentConfig() = default;
  ExperimentConfig(std::string experiment, ConfigMap values)
      : experiment_(std::move(experiment)), values_(std::move(values)) {}

  const std::string& experiment() const noexcept { return experiment_; }
  const ConfigMap& values() const noexcept { return values_; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string& text(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing configuration key '" + key + "'");
    return it->second;
  }
  double real(const std::string& key) const { return detail::parse_real(key, text(key)); }
  long long integer(const std::string& key) const { return detail::parse_integer(key, text(key)); }
  std::size_t count(const std::string& key) const {
    const long long v = integer(key);
    if (v < 0) throw ConfigError("key '" + key + "' must be non-negative");
    return static_cast<std::size_t>(v);
  }
  std::vector<double> real_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : detail::split_list(text(key))) out.push_back(detail::parse_real(key, s));
    return out;
  }
  std::vector<long long> integer_list(const std::string& key) const {
    std::vector<long long> out;
    for (const auto& s : detail::split_list(text(key))) out.push_back(detail::parse_integer(key, s));
    return out;
  }

  std::optional<double> optional_real(const std::string& key) const {
    return has(key) ? std::optional<double>(real(key)) : std::nullopt;
  }

  /// One comment line carrying every resolved key.
  std::string header_line() const {
    std::string s = "# dampedwave " + experiment_;
    for (const auto& [k, v] : values_) s += " " + k + "=" + v;
    return s;
  }

 private:
  std::string experiment_;
  ConfigMap values_;
};

inline ConfigMap experiment_defaults(const std::string& experiment) {
  ConfigMap d{{"degree", "0"}, {"seed", "1"}, {"out", "-"}};
  auto set = [&](std::initializer_list<std::pair<const char*, const char*>> kv) {
    for (const auto& [k, v] : kv) d[k] = v;
  };
  if (experiment == "decay-table") {
    set({{"a-const", "10"}, {"n-cells", "1000"}, {"tau", "1e-3"}, {"t-final", "10"}, {"report-every", "2"},
         {"u0", "mode"}, {"p0", "mode"}});
  } else if (experiment == "convergence") {
    set({{"a-const", "10"}, {"t-final", "1"}, {"sweep", "both"}, {"levels", "4"}, {"n-cells-coarse", "2"},
         {"tau-coarse", "0.5"}, {"tau", "1e-5"}, {"n-cells", "10000"}, {"reference", "projection"}});
  } else if (experiment == "cn-demo") {
    set({{"a-const", "10"}, {"tau", "1e-2"}, {"t-final", "10"}, {"mesh-levels", "7,8,9"}, {"u0", "zero"},
         {"p0", "hat"}, {"report-stride", "10"}, {"fit-lo", "5"}, {"fit-hi", "10"}});
  } else if (experiment == "arate") {
    set({{"n-cells", "20"}, {"tau", "0.05"}, {"t-final", "10"}, {"a-exp-min", "-5"}, {"a-exp-max", "10"},
         {"tol", "1e-8"}});
  } else if (experiment == "stationary") {
    set({{"a-const", "1"}, {"n-cells", "64"}, {"method", "monolithic"}});
  } else if (experiment == "simulate") {
    set({{"a-const", "10"}, {"n-cells", "100"}, {"tau", "1e-2"}, {"t-final", "1"}, {"u0", "cos"}, {"p0", "zero"},
         {"snapshot-stride", "0"}, {"method", "monolithic"}});
  } else {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  return d;
}

namespace detail {

inline bool nearly_integer(double x) { return std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, std::abs(x)); }

inline void require_choice(const ExperimentConfig& c, const std::string& key, std::initializer_list<const char*> allowed) {
  if (!c.has(key)) return;
  const auto& v = c.text(key);
  for (const char* a : allowed) {
    if (v == a) return;
  }
  throw ConfigError("key '" + key + "': unsupported value '" + v + "'");
}

}  // namespace detail

/// Merges defaults < file < overrides and validates the result.
inline ExperimentConfig resolve_config(const std::string& experiment, const ConfigMap& file, const ConfigMap& overrides) {
  ConfigMap merged = experiment_defaults(experiment);
  const bool user_h = file.count("h") || overrides.count("h");
  const bool user_n = file.count("n-cells") || overrides.count("n-cells");
  const bool user_steps = file.count("n-steps") || overrides.count("n-steps");
  const bool user_t = file.count("t-final") || overrides.count("t-final");
  // An explicit h (or n-steps) replaces the default n-cells (or t-final) unless both are given.
  if (user_h && !user_n) merged.erase("n-cells");
  if (user_steps && !user_t) merged.erase("t-final");
  for (const auto& [k, v] : file) merged[normalize_key(k)] = v;
  for (const auto& [k, v] : overrides) merged[normalize_key(k)] = v;
  for (const auto& [k, v] : merged) key_spec(k);

  ExperimentConfig c(experiment, merged);
  for (const auto& [k, v] : merged) {
    switch (key_spec(k).type) {
      case KeyType::real: c.real(k); break;
      case KeyType::count: c.count(k); break;
      case KeyType::integer: c.integer(k); break;
      case KeyType::real_list: c.real_list(k); break;
      case KeyType::integer_list: c.integer_list(k); break;
      case KeyType::text: break;
    }
  }

  if (c.has("theta") && c.has("lambda")) throw ConfigError("set exactly one of 'theta' and 'lambda'");
  if (c.has("theta") && !(c.real("theta") >= 0.0 && c.real("theta") <= 1.0)) {
    throw ConfigError("'theta' must lie in [0,1]");
  }
  if (c.has("lambda") && c.real("lambda") < 0.0) throw ConfigError("'lambda' must be non-negative");
  if (c.has("tau") && !(c.real("tau") > 0.0)) throw ConfigError("'tau' must be positive");
  const long long k = c.integer("degree");
  if (k < 0 || k > 8) throw ConfigError("'degree' must lie in [0,8]");

  if (c.has("h")) {
    const double h = c.real("h");
    if (!(h > 0.0 && h <= 1.0)) throw ConfigError("'h' must lie in (0,1]");
    if (!detail::nearly_integer(1.0 / h)) throw ConfigError("'h' must be 1/n for an integer n");
    const auto n = static_cast<std::size_t>(std::llround(1.0 / h));
    if (c.has("n-cells") && c.count("n-cells") != n) throw ConfigError("'h' and 'n-cells' are inconsistent");
    merged["n-cells"] = std::to_string(n);
  }
  if (merged.count("n-cells") && std::stoll(merged["n-cells"]) < 1) throw ConfigError("'n-cells' must be positive");
  if (c.has("n-steps") && c.has("tau")) {
    const double t = static_cast<double>(c.count("n-steps")) * c.real("tau");
    if (c.has("t-final") && std::abs(t - c.real("t-final")) > 1e-9 * std::max(1.0, t)) {
      throw ConfigError("'n-steps', 'tau' and 't-final' are inconsistent");
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", t);
    merged["t-final"] = buf;
  }
  if (merged.count("t-final") && merged.count("tau")) {
    const double steps = detail::parse_real("t-final", merged["t-final"]) / detail::parse_real("tau", merged["tau"]);
    if (!detail::nearly_integer(steps) || steps < 0.5) {
      throw ConfigError("'t-final' must be a positive integer multiple of 'tau'");
    }
  }
  if (c.has("a-const") && c.has("a-values") && (file.count("a-values") || overrides.count("a-values"))) {
    const bool user_const = file.count("a-const") || overrides.count("a-const");
    if (user_const) throw ConfigError("set at most one of 'a-const' and 'a-values'");
    merged.erase("a-const");
  }

  ExperimentConfig out(experiment, merged);
  detail::require_choice(out, "u0", {"mode", "cos", "zero", "random"});
  detail::require_choice(out, "p0", {"mode", "sin", "hat", "zero", "random"});
  detail::require_choice(out, "sweep", {"both", "h", "tau"});
  detail::require_choice(out, "method", {"monolithic", "schur"});
  detail::require_choice(out, "reference", {"projection", "interpolation"});
  if (out.has("tol") && !(out.real("tol") > 0.0)) throw ConfigError("'tol' must be positive");
  if (out.has("levels") && out.count("levels") < 2) throw ConfigError("'levels' must be at least 2");
  if (out.has("a-values")) {
    for (double v : out.real_list("a-values")) {
      if (v < 0.0) throw ConfigError("'a-values' must be non-negative");
    }
  }
  return out;
}

}  // namespace dampedwave
