#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

namespace rfcusp {

/// One named inequality check. max_violation is signed: negative means the
/// inequality holds with that much margin everywhere it was sampled.
struct ReportEntry {
  std::string name;
  std::string region;
  std::vector<double> times;
  double max_violation = -std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  bool applicable = true;
  /// Location of the worst sample, for diagnostics.
  double worst_coord = std::numeric_limits<double>::quiet_NaN();
  double worst_time = std::numeric_limits<double>::quiet_NaN();

  [[nodiscard]] bool passed() const { return !applicable || max_violation <= tolerance; }

  /// Fold one sample's violation into the running maximum.
  void record(double violation, double coord, double time) {
    if (std::isnan(violation)) {
      max_violation = std::numeric_limits<double>::infinity();
      worst_coord = coord;
      worst_time = time;
      return;
    }
    if (violation > max_violation) {
      max_violation = violation;
      worst_coord = coord;
      worst_time = time;
    }
  }
};

struct VerificationReport {
  std::vector<ReportEntry> entries;
  std::string provenance;

  [[nodiscard]] bool all_passed() const {
    return !entries.empty() &&
           std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed(); });
  }

  [[nodiscard]] const ReportEntry* find(const std::string& name) const {
    for (const auto& e : entries) {
      if (e.name == name) return &e;
    }
    return nullptr;
  }

  void append(const VerificationReport& other) {
    entries.insert(entries.end(), other.entries.begin(), other.entries.end());
  }
};

namespace detail {

inline nlohmann::json finite_or_null(double x) {
  if (std::isfinite(x)) return x;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return nullptr;
}

inline double from_json_number(const nlohmann::json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_string()) {
    return j.get<std::string>() == "inf" ? std::numeric_limits<double>::infinity()
                                         : -std::numeric_limits<double>::infinity();
  }
  return j.get<double>();
}

}  // namespace detail

inline nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"name", e.name},
                       {"region", e.region},
                       {"times", e.times},
                       {"max_violation", detail::finite_or_null(e.max_violation)},
                       {"tolerance", e.tolerance},
                       {"applicable", e.applicable},
                       {"pass", e.passed()},
                       {"worst_coord", detail::finite_or_null(e.worst_coord)},
                       {"worst_time", detail::finite_or_null(e.worst_time)}});
  }
  return {{"provenance", r.provenance}, {"all_pass", r.all_passed()}, {"entries", entries}};
}

inline VerificationReport report_from_json(const nlohmann::json& j) {
  VerificationReport r;
  r.provenance = j.at("provenance").get<std::string>();
  for (const auto& e : j.at("entries")) {
    ReportEntry x;
    x.name = e.at("name").get<std::string>();
    x.region = e.at("region").get<std::string>();
    x.times = e.at("times").get<std::vector<double>>();
    x.max_violation = detail::from_json_number(e.at("max_violation"));
    x.tolerance = e.at("tolerance").get<double>();
    x.applicable = e.at("applicable").get<bool>();
    x.worst_coord = detail::from_json_number(e.at("worst_coord"));
    x.worst_time = detail::from_json_number(e.at("worst_time"));
    r.entries.push_back(std::move(x));
  }
  return r;
}

/// Fixed-width text table, one row per entry.
inline std::string render_table(const VerificationReport& r) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-28s %-6s %14s %12s  %s\n", "check", "status", "max_violation",
                "tolerance", "region");
  out += buf;
  for (const auto& e : r.entries) {
    const char* status = !e.applicable ? "n/a" : (e.passed() ? "PASS" : "FAIL");
    std::snprintf(buf, sizeof buf, "%-28s %-6s %14.6e %12.4e  %s\n", e.name.c_str(), status,
                  e.max_violation, e.tolerance, e.region.c_str());
    out += buf;
  }
  return out;
}

}  // namespace rfcusp
