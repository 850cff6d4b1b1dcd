#pragma once

// Sectioned key = value experiment files. Every value remembers its line so
// errors point at the offending text.

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "rfcusp/closed_forms.hpp"
#include "rfcusp/errors.hpp"
#include "rfcusp/initial_data.hpp"
#include "rfcusp/solver.hpp"

namespace rfcusp {

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

inline std::optional<double> to_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Parsed config file: section -> key -> (value, line).
class IniFile {
 public:
  struct Value {
    std::string text;
    int line = 0;
  };

  static IniFile parse(std::istream& is, std::string source = "<config>") {
    IniFile f;
    f.source_ = std::move(source);
    std::string line, section;
    int n = 0;
    while (std::getline(is, line)) {
      ++n;
      if (auto c = line.find_first_of("#;"); c != std::string::npos) line.erase(c);
      const auto t = detail::trim(line);
      if (t.empty()) continue;
      if (t.front() == '[') {
        if (t.back() != ']' || t.size() < 3) throw f.error(n, "malformed section header '" + t + "'");
        section = detail::trim(std::string_view(t).substr(1, t.size() - 2));
        f.sections_.insert(section);
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw f.error(n, "expected 'key = value', got '" + t + "'");
      if (section.empty()) throw f.error(n, "key outside of any [section]");
      const auto key = detail::trim(std::string_view(t).substr(0, eq));
      const auto val = detail::trim(std::string_view(t).substr(eq + 1));
      if (key.empty()) throw f.error(n, "empty key");
      auto& sec = f.values_[section];
      if (sec.count(key)) throw f.error(n, "duplicate key '" + key + "' in [" + section + "]");
      sec[key] = {val, n};
    }
    return f;
  }

  static IniFile load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(path + ": cannot open config file");
    return parse(is, path);
  }

  [[nodiscard]] bool has_section(const std::string& s) const { return sections_.count(s) > 0; }

  [[nodiscard]] const Value* find(const std::string& section, const std::string& key) const {
    auto s = values_.find(section);
    if (s == values_.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  [[nodiscard]] ConfigError error(int line, const std::string& msg) const {
    return ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
  }

  /// Reject keys (or sections) that are not in the allowed set.
  void check_keys(const std::map<std::string, std::set<std::string>>& allowed) const {
    for (const auto& [sec, keys] : values_) {
      auto a = allowed.find(sec);
      if (a == allowed.end()) {
        throw error(keys.begin()->second.line, "unknown section [" + sec + "]");
      }
      for (const auto& [k, v] : keys) {
        if (!a->second.count(k)) throw error(v.line, "unknown key '" + k + "' in [" + sec + "]");
      }
    }
  }

  [[nodiscard]] double get_double(const std::string& sec, const std::string& key, double def) const {
    const auto* v = find(sec, key);
    if (!v) return def;
    auto d = detail::to_double(v->text);
    if (!d) throw error(v->line, "'" + key + "' expects a number, got '" + v->text + "'");
    return *d;
  }

  [[nodiscard]] int get_int(const std::string& sec, const std::string& key, int def) const {
    const auto* v = find(sec, key);
    if (!v) return def;
    int x = 0;
    auto [p, ec] = std::from_chars(v->text.data(), v->text.data() + v->text.size(), x);
    if (ec != std::errc() || p != v->text.data() + v->text.size()) {
      throw error(v->line, "'" + key + "' expects an integer, got '" + v->text + "'");
    }
    return x;
  }

  [[nodiscard]] std::string get_string(const std::string& sec, const std::string& key,
                                       const std::string& def) const {
    const auto* v = find(sec, key);
    return v ? v->text : def;
  }

  [[nodiscard]] std::vector<double> get_list(const std::string& sec, const std::string& key,
                                             const std::vector<double>& def) const {
    const auto* v = find(sec, key);
    if (!v) return def;
    std::string body = v->text;
    if (!body.empty() && body.front() == '[' && body.back() == ']') body = body.substr(1, body.size() - 2);
    std::vector<double> out;
    if (detail::trim(body).empty()) return out;
    for (const auto& item : detail::split(body, ',')) {
      auto d = detail::to_double(item);
      if (!d) throw error(v->line, "'" + key + "' expects a list of numbers, got '" + item + "'");
      out.push_back(*d);
    }
    return out;
  }

  [[nodiscard]] const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::set<std::string> sections_;
  std::map<std::string, std::map<std::string, Value>> values_;
};

/// Parse "name(p1, p2, ...)" (or a bare name) into a closed-form metric:
///   poincare, hyp_punctured, hyp_annulus(eps), cigar(lambda, shift),
///   expanding_disc(rho, alpha), shifted_log(delta), flat(c),
///   scaled(<metric>) for the factor 1 + 2t, scaled(<metric>, c) for a constant.
inline ClosedFormMetric parse_metric(std::string_view text) {
  const auto t = detail::trim(text);
  const auto open = t.find('(');
  const std::string name = detail::trim(std::string_view(t).substr(0, open));
  std::string args;
  if (open != std::string::npos) {
    if (t.back() != ')') throw ConfigError("metric '" + t + "': missing ')'");
    args = t.substr(open + 1, t.size() - open - 2);
  }
  if (name == "scaled") {
    // The base may itself contain commas; split at the last top-level comma.
    int depth = 0;
    std::size_t cut = std::string::npos;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == '(') ++depth;
      if (args[i] == ')') --depth;
      if (args[i] == ',' && depth == 0) cut = i;
    }
    if (cut == std::string::npos) return make_scaled(parse_metric(args), true);
    auto c = detail::to_double(detail::trim(std::string_view(args).substr(cut + 1)));
    if (!c) throw ConfigError("metric '" + t + "': scale factor must be a number");
    return make_scaled(parse_metric(std::string_view(args).substr(0, cut)), false, *c);
  }
  std::vector<double> p;
  if (!detail::trim(args).empty()) {
    for (const auto& a : detail::split(args, ',')) {
      auto d = detail::to_double(a);
      if (!d) throw ConfigError("metric '" + t + "': parameter '" + a + "' is not a number");
      p.push_back(*d);
    }
  }
  auto need = [&](std::size_t n) {
    if (p.size() != n) {
      throw ConfigError("metric '" + name + "' takes " + std::to_string(n) + " parameter(s), got " +
                        std::to_string(p.size()));
    }
  };
  if (name == "poincare") { need(0); return metric::Poincare{}; }
  if (name == "hyp_punctured") { need(0); return metric::HyperbolicPunctured{}; }
  if (name == "hyp_annulus") { need(1); return make_annulus(p[0]); }
  if (name == "cigar") { need(2); return make_cigar(p[0], p[1]); }
  if (name == "expanding_disc") { need(2); return make_expanding_disc(p[0], p[1]); }
  if (name == "shifted_log") { need(1); return make_shifted_log(p[0]); }
  if (name == "flat") { need(1); return metric::Flat{p[0]}; }
  throw ConfigError("unknown metric '" + name +
                    "' (expected poincare, hyp_punctured, hyp_annulus, cigar, expanding_disc, "
                    "shifted_log, flat or scaled)");
}

/// Optional analytic check run alongside the sweep: the solver evolves a
/// closed form on [s_lo, s_hi] with Dirichlet data from the same closed form.
struct OracleSpec {
  std::string text;
  ClosedFormMetric metric;
  double s_lo = 0.1;
  double s_hi = 5.0;
  std::size_t cells = 400;
  double t_end = 0.1;
  double tolerance = 1e-3;
};

struct ExperimentConfig {
  std::vector<int> k_list{10};
  double t_end = 1.5;
  /// Extra snapshot times on top of {0, 1/100, 1/2, 3/4, 1, t_end}.
  std::vector<double> extra_times{0.001, 0.005, 0.05, 0.1, 0.2, 0.3, 0.4, 0.6, 0.9, 1.1, 1.2, 1.3, 1.4};
  double eps_hat = 0.2;
  std::string output_dir = "run";
  /// Worker threads; 0 means RFCUSP_JOBS or the hardware concurrency.
  int jobs = 0;
  /// Recorded for provenance; the numerics use no randomness.
  int seed = 0;
  InitialDataSpec initial;
  SolverConfig solver;
  /// Fixed origin constants; unset means fit them on the smallest k.
  std::optional<double> alpha_hat;
  std::optional<double> decay_c;
  std::optional<OracleSpec> oracle;

  [[nodiscard]] std::vector<double> snapshot_times() const { return standard_snapshot_times(t_end, extra_times); }

  [[nodiscard]] int resolved_jobs() const {
    if (jobs > 0) return jobs;
    if (const char* env = std::getenv("RFCUSP_JOBS")) {
      const int j = std::atoi(env);
      if (j > 0) return j;
    }
    return std::max(1u, std::thread::hardware_concurrency());
  }
};

inline const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"experiment", {"k_list", "t_end", "snapshot_times", "eps_hat", "output_dir", "jobs", "seed"}},
      {"initial", {"k", "blend", "s_min", "s_switch", "n_points", "ds", "grading", "cap_points"}},
      {"solver",
       {"scheme", "boundary", "dt_init", "dt_max", "dt_floor", "safety", "du_max", "newton_tol",
        "newton_max_iter"}},
      {"origin", {"alpha_hat", "c"}},
      {"oracle", {"metric", "s_lo", "s_hi", "cells", "t_end", "tolerance"}},
  };
  return s;
}

inline ExperimentConfig parse_config(const IniFile& ini) {
  ini.check_keys(config_schema());
  ExperimentConfig c;
  auto line_of = [&](const std::string& sec, const std::string& key) {
    const auto* v = ini.find(sec, key);
    return v ? v->line : 0;
  };
  auto wrap = [&](const std::string& sec, const std::string& key, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      if (std::string(e.what()).rfind(ini.source(), 0) == 0) throw;
      throw ini.error(line_of(sec, key), e.what());
    } catch (const ConstructionError& e) {
      throw ini.error(line_of(sec, key), e.what());
    }
  };

  if (ini.find("experiment", "k_list") && ini.find("initial", "k")) {
    throw ini.error(line_of("initial", "k"), "give either [experiment] k_list or [initial] k, not both");
  }
  std::vector<double> ks;
  if (ini.find("initial", "k")) ks = {static_cast<double>(ini.get_int("initial", "k", 10))};
  else ks = ini.get_list("experiment", "k_list", {10.0});
  const int k_line = ini.find("initial", "k") ? line_of("initial", "k") : line_of("experiment", "k_list");
  if (ks.empty()) throw ini.error(k_line, "k_list must not be empty");
  c.k_list.clear();
  for (double k : ks) {
    if (k != std::floor(k)) throw ini.error(k_line, "k values must be integers");
    if (k < 10) {
      throw ini.error(k_line, "k = " + std::to_string(static_cast<int>(k)) +
                                  " rejected: the initial data's Poincare lower bound requires k >= 10");
    }
    c.k_list.push_back(static_cast<int>(k));
  }
  std::sort(c.k_list.begin(), c.k_list.end());
  c.k_list.erase(std::unique(c.k_list.begin(), c.k_list.end()), c.k_list.end());

  c.t_end = ini.get_double("experiment", "t_end", c.t_end);
  if (!(c.t_end >= 0.0)) throw ini.error(line_of("experiment", "t_end"), "t_end must be >= 0");
  c.extra_times = ini.get_list("experiment", "snapshot_times", c.extra_times);
  for (double t : c.extra_times) {
    if (!(t >= 0.0)) throw ini.error(line_of("experiment", "snapshot_times"), "snapshot times must be >= 0");
  }
  c.eps_hat = ini.get_double("experiment", "eps_hat", c.eps_hat);
  if (!(c.eps_hat > 0.0 && c.eps_hat < 0.5)) {
    throw ini.error(line_of("experiment", "eps_hat"), "eps_hat must lie in (0, 1/2)");
  }
  c.output_dir = ini.get_string("experiment", "output_dir", c.output_dir);
  c.jobs = ini.get_int("experiment", "jobs", 0);
  if (c.jobs < 0) throw ini.error(line_of("experiment", "jobs"), "jobs must be >= 0");
  c.seed = ini.get_int("experiment", "seed", 0);

  auto& in = c.initial;
  wrap("initial", "blend", [&] { in.blend = parse_blend(ini.get_string("initial", "blend", "smoothstep")); });
  in.s_min = ini.get_double("initial", "s_min", in.s_min);
  in.s_switch = ini.get_double("initial", "s_switch", 0.0);
  if (ini.find("initial", "n_points") && ini.find("initial", "ds")) {
    throw ini.error(line_of("initial", "ds"), "give either n_points or ds, not both");
  }
  if (ini.find("initial", "n_points")) {
    const int n = ini.get_int("initial", "n_points", 20);
    if (n < 2) throw ini.error(line_of("initial", "n_points"), "n_points must be >= 2");
    in.ds = 1.0 / n;
  }
  in.ds = ini.get_double("initial", "ds", in.ds);
  in.grading = ini.get_double("initial", "grading", in.grading);
  in.n_cap = static_cast<std::size_t>(std::max(0, ini.get_int("initial", "cap_points", 0)));
  for (int k : c.k_list) {
    auto probe = in;
    probe.k = k;
    wrap("initial", "s_min", [&] { probe.validate(); });
  }

  auto& s = c.solver;
  s.s_min = in.s_min;
  wrap("solver", "scheme", [&] { s.scheme = parse_scheme(ini.get_string("solver", "scheme", "backward_euler")); });
  wrap("solver", "boundary",
       [&] { s.boundary = parse_boundary(ini.get_string("solver", "boundary", "dilating_hyperbolic")); });
  if (s.boundary == BoundaryKind::ClosedForm) {
    throw ini.error(line_of("solver", "boundary"), "closed_form boundaries are for [oracle] runs only");
  }
  s.dt_init = ini.get_double("solver", "dt_init", s.dt_init);
  s.dt_max = ini.get_double("solver", "dt_max", s.dt_max);
  s.dt_floor = ini.get_double("solver", "dt_floor", std::min(s.dt_floor, s.dt_init));
  s.safety = ini.get_double("solver", "safety", s.safety);
  s.du_max = ini.get_double("solver", "du_max", s.du_max);
  s.newton_tol = ini.get_double("solver", "newton_tol", s.newton_tol);
  s.newton_max_iter = ini.get_int("solver", "newton_max_iter", s.newton_max_iter);
  wrap("solver", "dt_init", [&] { s.validate(); });

  if (ini.find("origin", "alpha_hat")) {
    c.alpha_hat = ini.get_double("origin", "alpha_hat", 1.0);
    if (!(*c.alpha_hat >= 1.0)) throw ini.error(line_of("origin", "alpha_hat"), "alpha_hat must be >= 1");
  }
  if (ini.find("origin", "c")) {
    c.decay_c = ini.get_double("origin", "c", 0.0);
    if (!(*c.decay_c >= 0.0)) throw ini.error(line_of("origin", "c"), "c must be >= 0");
  }

  if (ini.has_section("oracle")) {
    OracleSpec o{.text = "", .metric = metric::HyperbolicPunctured{}};
    if (!ini.find("oracle", "metric")) throw ini.error(0, "[oracle] needs a metric");
    o.text = ini.get_string("oracle", "metric", "");
    wrap("oracle", "metric", [&] { o.metric = parse_metric(o.text); });
    o.s_lo = ini.get_double("oracle", "s_lo", o.s_lo);
    o.s_hi = ini.get_double("oracle", "s_hi", o.s_hi);
    const int cells = ini.get_int("oracle", "cells", static_cast<int>(o.cells));
    if (cells < 4) throw ini.error(line_of("oracle", "cells"), "cells must be >= 4");
    o.cells = static_cast<std::size_t>(cells);
    o.t_end = ini.get_double("oracle", "t_end", o.t_end);
    o.tolerance = ini.get_double("oracle", "tolerance", o.tolerance);
    if (!(o.s_hi > o.s_lo) || !(o.t_end > 0.0)) {
      throw ini.error(line_of("oracle", "s_hi"), "[oracle] needs s_lo < s_hi and t_end > 0");
    }
    if (chart_of(o.metric) != Chart::LogPolar) {
      throw ini.error(line_of("oracle", "metric"), "[oracle] metric must be a LogPolar closed form");
    }
    c.oracle = o;
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) { return parse_config(IniFile::load(path)); }

}  // namespace rfcusp
