#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "s2r/core/error.hpp"

namespace s2r::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "sim2real";
inline constexpr const char* kToolVersion = "1.0.0";

enum class Kind { kString, kInt, kNumber, kBool, kStringList, kNumberList };

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::kString: return "string";
    case Kind::kInt: return "integer";
    case Kind::kNumber: return "number";
    case Kind::kBool: return "boolean";
    case Kind::kStringList: return "list of strings";
    case Kind::kNumberList: return "list of numbers";
  }
  return "?";
}

inline const char* type_label(Kind k) {
  switch (k) {
    case Kind::kString: return "TEXT";
    case Kind::kInt: return "INT";
    case Kind::kNumber: return "NUM";
    case Kind::kBool: return "BOOL";
    default: return "LIST";
  }
}

/// Checks a typed value; returns an error message or nothing.
using Check = std::function<std::optional<std::string>(const json&)>;

/// One config key. A null default means "unset" (optional key).
struct Key {
  std::string name;
  Kind kind = Kind::kString;
  json def;
  std::string help;
  Check check;
};

inline std::string default_text(const Key& k) {
  if (k.def.is_null()) return "unset";
  if (k.def.is_string()) return k.def.get<std::string>().empty() ? "\"\"" : k.def.get<std::string>();
  return k.def.dump();
}

namespace checks {

inline Check positive() {
  return [](const json& v) -> std::optional<std::string> {
    if (v.get<double>() > 0.0) return std::nullopt;
    return "must be positive";
  };
}

inline Check nonnegative() {
  return [](const json& v) -> std::optional<std::string> {
    if (v.get<double>() >= 0.0) return std::nullopt;
    return "must be nonnegative";
  };
}

inline Check range(double lo, double hi) {
  return [lo, hi](const json& v) -> std::optional<std::string> {
    const double x = v.get<double>();
    if (x >= lo && x <= hi) return std::nullopt;
    std::ostringstream os;
    os << "must be in [" << lo << ", " << hi << "]";
    return os.str();
  };
}

inline Check one_of(std::vector<std::string> options) {
  return [options](const json& v) -> std::optional<std::string> {
    const auto s = v.get<std::string>();
    for (const auto& o : options) {
      if (o == s) return std::nullopt;
    }
    std::string msg = "must be one of";
    for (const auto& o : options) msg += " " + o;
    return msg;
  };
}

inline Check nonempty() {
  return [](const json& v) -> std::optional<std::string> {
    if ((v.is_string() && !v.get<std::string>().empty()) || (v.is_array() && !v.empty())) return std::nullopt;
    return "is required";
  };
}

}  // namespace checks

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

inline std::optional<double> parse_double(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_int(const std::string& s) {
  const std::string t = trim(s);
  long long v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) out.push_back(trim(item));
  return out;
}

}  // namespace detail

/// Typed value from a command-line string.
inline std::optional<json> parse_flag(const Key& k, const std::string& text) {
  switch (k.kind) {
    case Kind::kString: return json(text);
    case Kind::kInt:
      if (auto v = detail::parse_int(text)) return json(*v);
      return std::nullopt;
    case Kind::kNumber:
      if (auto v = detail::parse_double(text)) return json(*v);
      return std::nullopt;
    case Kind::kBool:
      if (text == "true" || text == "1") return json(true);
      if (text == "false" || text == "0") return json(false);
      return std::nullopt;
    case Kind::kStringList: {
      json arr = json::array();
      for (const auto& s : detail::split_list(text)) arr.push_back(s);
      return arr;
    }
    case Kind::kNumberList: {
      json arr = json::array();
      for (const auto& s : detail::split_list(text)) {
        const auto v = detail::parse_double(s);
        if (!v) return std::nullopt;
        arr.push_back(*v);
      }
      return arr;
    }
  }
  return std::nullopt;
}

/// Type check of a value read from a config file; integers are accepted
/// where numbers are expected.
inline bool type_matches(const Key& k, const json& v) {
  switch (k.kind) {
    case Kind::kString: return v.is_string();
    case Kind::kInt: return v.is_number_integer();
    case Kind::kNumber: return v.is_number();
    case Kind::kBool: return v.is_boolean();
    case Kind::kStringList:
      if (!v.is_array()) return false;
      for (const auto& e : v) {
        if (!e.is_string()) return false;
      }
      return true;
    case Kind::kNumberList:
      if (!v.is_array()) return false;
      for (const auto& e : v) {
        if (!e.is_number()) return false;
      }
      return true;
  }
  return false;
}

/// Config errors collected across all keys, reported together.
class ConfigError : public ValidationError {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : ValidationError(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& p) {
    std::string out = "invalid configuration:";
    for (const auto& s : p) out += "\n  " + s;
    return out;
  }
  std::vector<std::string> problems_;
};

/// defaults < config file < command-line flags. Every problem is collected
/// before throwing.
inline json resolve_config(const std::vector<Key>& keys, const std::optional<std::string>& config_path,
                           const std::map<std::string, std::string>& flags) {
  std::vector<std::string> problems;
  json cfg = json::object();
  std::map<std::string, const Key*> by_name;
  for (const auto& k : keys) {
    cfg[k.name] = k.def;
    by_name[k.name] = &k;
  }
  if (config_path) {
    std::ifstream in(*config_path, std::ios::binary);
    if (!in) {
      problems.push_back("config file unreadable: " + *config_path);
    } else {
      json file;
      try {
        file = json::parse(in);
      } catch (const json::parse_error& e) {
        problems.push_back(std::string("config file is not valid JSON: ") + e.what());
      }
      if (!file.is_null() && !file.is_object()) problems.push_back("config file must hold a single object");
      if (file.is_object()) {
        for (const auto& [name, value] : file.items()) {
          const auto it = by_name.find(name);
          if (it == by_name.end()) {
            problems.push_back("unknown key '" + name + "'");
          } else if (!value.is_null() && !type_matches(*it->second, value)) {
            problems.push_back("key '" + name + "' must have type " + kind_name(it->second->kind));
          } else {
            cfg[name] = value;
          }
        }
      }
    }
  }
  for (const auto& [name, text] : flags) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) {
      problems.push_back("unknown key '" + name + "'");
      continue;
    }
    if (auto v = parse_flag(*it->second, text)) {
      cfg[name] = *v;
    } else {
      problems.push_back("flag --" + name + " expects type " + kind_name(it->second->kind) + ", got '" + text + "'");
    }
  }
  for (const auto& k : keys) {
    const json& v = cfg[k.name];
    if (k.kind == Kind::kNumber && v.is_number_integer()) cfg[k.name] = v.get<double>();
    if (k.check && !v.is_null() && type_matches(k, v)) {
      if (auto msg = k.check(v)) problems.push_back("key '" + k.name + "' " + *msg);
    }
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

/// Rounds every float to 6 significant digits so reports are stable and
/// compact.
inline void round_floats(json& j) {
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
      j = nullptr;
      return;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    j = std::strtod(buf, nullptr);
  } else if (j.is_structured()) {
    for (auto& e : j) round_floats(e);
  }
}

inline std::string format_g6(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace s2r::cli
