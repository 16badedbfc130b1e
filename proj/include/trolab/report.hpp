#pragma once

// Machine-readable reports with a byte-stable comparable section ("results")
// and a separate timing section excluded from determinism comparisons.

#include <map>
#include <string>

#include <nlohmann/json.hpp>

namespace trolab {

struct Report {
  std::string input;  // file name or label
  std::string kind;
  nlohmann::json results = nlohmann::json::object();
  std::map<std::string, double> wall_ms;
  bool all_pass = true;

  nlohmann::json to_json() const {
    nlohmann::json j{{"input", input},
                     {"kind", kind},
                     {"all_pass", all_pass},
                     {"results", results}};
    nlohmann::json t = nlohmann::json::object();
    for (const auto& [k, v] : wall_ms) t[k] = v;
    j["wall_ms"] = t;
    return j;
  }

  static Report from_json(const nlohmann::json& j) {
    Report r;
    r.input = j.at("input").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    r.all_pass = j.at("all_pass").get<bool>();
    r.results = j.at("results");
    if (j.contains("wall_ms"))
      for (const auto& [k, v] : j["wall_ms"].items())
        r.wall_ms[k] = v.get<double>();
    return r;
  }

  /// The byte-comparable part: everything except wall times.
  std::string comparable() const {
    nlohmann::json j{{"input", input},
                     {"kind", kind},
                     {"all_pass", all_pass},
                     {"results", results}};
    return j.dump();
  }

  bool operator==(const Report& r) const {
    return input == r.input && kind == r.kind && all_pass == r.all_pass &&
           results == r.results && wall_ms == r.wall_ms;
  }
};

/// Fixed-width human-readable verdict table, one line per entry of a
/// "verdicts" object {name: {"pass": bool, "residual": x, ...}}.
inline std::string verdict_table(const nlohmann::json& results) {
  std::string out;
  auto append_section = [&](const std::string& title, const nlohmann::json& v) {
    if (!v.is_object() || v.empty()) return;
    out += title + "\n";
    for (const auto& [name, entry] : v.items()) {
      char line[160];
      if (entry.is_object() && entry.contains("pass")) {
        double res = entry.contains("residual")
                         ? entry["residual"].get<double>()
                         : 0.0;
        std::snprintf(line, sizeof(line), "  %-44s %-5s residual %.3e\n",
                      name.c_str(), entry["pass"].get<bool>() ? "pass" : "FAIL",
                      res);
        out += line;
      } else if (entry.is_number()) {
        std::snprintf(line, sizeof(line), "  %-44s %g\n", name.c_str(),
                      entry.get<double>());
        out += line;
      }
    }
  };
  if (results.contains("dimensions")) {
    out += "dimensions\n";
    for (const auto& [name, v] : results["dimensions"].items()) {
      char line[160];
      std::snprintf(line, sizeof(line), "  %-44s %lld\n", name.c_str(),
                    static_cast<long long>(v.get<long long>()));
      out += line;
    }
  }
  if (results.contains("verdicts")) append_section("verdicts", results["verdicts"]);
  if (results.contains("scalars")) {
    out += "scalars\n";
    for (const auto& [name, v] : results["scalars"].items()) {
      char line[160];
      std::snprintf(line, sizeof(line), "  %-44s %.12g\n", name.c_str(),
                    v.get<double>());
      out += line;
    }
  }
  return out;
}

}  // namespace trolab
