#pragma once

// Validator for the JSON Schema keywords the report schemas use: type,
// properties, required, additionalProperties, items, enum, const, minimum,
// maximum and pattern. Unknown keywords are rejected so a schema edit that
// needs more cannot pass silently.

#include <fstream>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace schema_check {

using nlohmann::json;

inline json load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open schema " + path);
  return json::parse(in);
}

inline bool has_type(const json& v, const std::string& t) {
  if (t == "null") return v.is_null();
  if (t == "boolean") return v.is_boolean();
  if (t == "integer") return v.is_number_integer();
  if (t == "number") return v.is_number();
  if (t == "string") return v.is_string();
  if (t == "array") return v.is_array();
  if (t == "object") return v.is_object();
  throw std::runtime_error("unknown schema type " + t);
}

inline void validate(const json& s, const json& v, const std::string& path, std::vector<std::string>& errors) {
  static const std::set<std::string> known = {"$schema", "title", "type", "properties", "required",
                                              "additionalProperties", "items", "enum", "const",
                                              "minimum", "maximum", "pattern"};
  for (const auto& [k, _] : s.items())
    if (!known.count(k)) throw std::runtime_error("unsupported schema keyword " + k);
  auto fail = [&](const std::string& msg) { errors.push_back(path + ": " + msg); };

  if (s.contains("type")) {
    const json& t = s["type"];
    bool ok = false;
    if (t.is_string()) ok = has_type(v, t.get<std::string>());
    else
      for (const auto& x : t) ok = ok || has_type(v, x.get<std::string>());
    if (!ok) return fail("expected type " + t.dump() + ", got " + v.dump());
  }
  if (s.contains("const") && v != s["const"]) fail("expected " + s["const"].dump());
  if (s.contains("enum")) {
    bool found = false;
    for (const auto& x : s["enum"]) found = found || x == v;
    if (!found) fail("value " + v.dump() + " not in enum");
  }
  if (v.is_number()) {
    if (s.contains("minimum") && v.get<double>() < s["minimum"].get<double>()) fail("below minimum");
    if (s.contains("maximum") && v.get<double>() > s["maximum"].get<double>()) fail("above maximum");
  }
  if (v.is_string() && s.contains("pattern") &&
      !std::regex_search(v.get<std::string>(), std::regex(s["pattern"].get<std::string>())))
    fail("does not match pattern");
  if (v.is_object()) {
    if (s.contains("required"))
      for (const auto& k : s["required"])
        if (!v.contains(k.get<std::string>())) fail("missing key " + k.get<std::string>());
    for (const auto& [k, x] : v.items()) {
      if (s.contains("properties") && s["properties"].contains(k)) {
        validate(s["properties"][k], x, path + "/" + k, errors);
      } else if (s.contains("additionalProperties")) {
        const json& ap = s["additionalProperties"];
        if (ap.is_boolean()) {
          if (!ap.get<bool>()) fail("unexpected key " + k);
        } else {
          validate(ap, x, path + "/" + k, errors);
        }
      }
    }
  }
  if (v.is_array() && s.contains("items"))
    for (std::size_t i = 0; i < v.size(); ++i) validate(s["items"], v[i], path + "/" + std::to_string(i), errors);
}

inline std::vector<std::string> errors(const json& schema, const json& value) {
  std::vector<std::string> out;
  validate(schema, value, "", out);
  return out;
}

}  // namespace schema_check
