#pragma once

// Sweep orchestration: per-k solves, persistence of run directories, sweep
// level tables and reports, and replay from persisted snapshots.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "rfcusp/config.hpp"
#include "rfcusp/diagnostics.hpp"
#include "rfcusp/initial_data.hpp"
#include "rfcusp/report.hpp"
#include "rfcusp/solver.hpp"
#include "rfcusp/verify.hpp"

namespace rfcusp {

namespace fs = std::filesystem;

inline constexpr int kSchemaVersion = 1;

/// Sweep-level constants pinned by the acceptance contract.
struct SweepBounds {
  /// Bound on L_k(0) - ln(2k).
  double initial_excess = 1.0;
  /// Allowed max/min ratio across k for late lengths and curvature sups.
  double uniformity_ratio = 2.0;
};

// ---- persistence helpers -----------------------------------------------------

/// 64-bit FNV-1a of a byte string, as 16 hex digits.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw IntegrityError("cannot read " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << bytes;
}

inline std::string snapshot_filename(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "t_%.6f.csv", t);
  return buf;
}

inline std::string snapshot_csv(const Snapshot& s) {
  std::ostringstream os;
  write_profile_csv(os, s.outer);
  if (s.has_cap()) write_profile_csv(os, s.cap);
  return os.str();
}

inline Snapshot parse_snapshot_csv(const std::string& text, const std::string& name) {
  std::istringstream is(text);
  std::vector<RadialProfile> blocks;
  try {
    blocks = read_profile_csv(is);
  } catch (const std::exception& e) {
    throw IntegrityError(name + ": " + e.what());
  }
  if (blocks.empty() || blocks.size() > 2 || blocks[0].chart != Chart::LogPolar ||
      (blocks.size() == 2 && blocks[1].chart != Chart::CartesianRadial)) {
    throw IntegrityError(name + ": expected a LogPolar block optionally followed by a CartesianRadial block");
  }
  Snapshot s;
  s.outer = std::move(blocks[0]);
  if (blocks.size() == 2) s.cap = std::move(blocks[1]);
  return s;
}

inline std::string k_dir(int k) { return "k" + std::to_string(k); }

// ---- verification ------------------------------------------------------------

/// Per-k report: initial-data constraints, the named inequalities and the
/// distance-distortion check on s in [1, 2] up to t = 1/2.
inline VerificationReport verify_trajectory(const FlowTrajectory& tr, int k, const OriginConstants& oc) {
  VerificationReport rep;
  rep.provenance = "k=" + std::to_string(k);
  rep.append(verify_initial_constraints(tr.snapshots.front().outer, k));
  InequalityOptions opt;
  opt.origin = oc;
  rep.append(check_named_inequalities(tr, k, opt));
  if (tr.has_time(0.5)) {
    double m_bar = 0.0;
    for (const auto& s : tr.snapshots) {
      if (s.time() > 0.5 + 1e-12) break;
      const double sup = sup_abs_curvature(s, 1.0, 2.0);
      if (!std::isnan(sup)) m_bar = std::max(m_bar, sup);
    }
    rep.entries.push_back(distance_distortion_check(tr, 0.5, 1.0, 2.0, m_bar));
  } else {
    ReportEntry e{"distance_distortion", "s in [1, 2], t0 = 1/2", {}};
    e.applicable = false;
    rep.entries.push_back(e);
  }
  return rep;
}

/// Sweep-level checks: initial length excess, late-time length and curvature
/// uniformity across k, length contrast, and small-time convergence in k.
inline VerificationReport sweep_report(const std::map<int, const FlowTrajectory*>& runs, double eps_hat,
                                       const SweepBounds& bounds = {}) {
  VerificationReport rep;
  rep.provenance = "sweep";
  const double inf = std::numeric_limits<double>::infinity();
  const auto& any = *runs.begin()->second;
  const double t_last = any.snapshots.back().time();

  ReportEntry excess{"initial_length_excess", "max_k L_k(0) - ln(2k)", {0.0}};
  excess.tolerance = bounds.initial_excess;
  for (const auto& [k, tr] : runs) {
    excess.record(cusp_length(tr->snapshots.front(), 1.0) - std::log(2.0 * k), k, 0.0);
  }

  auto ratio_entry = [&](std::string name, std::string region, std::vector<double> times, auto&& value_at) {
    ReportEntry e{std::move(name), std::move(region), {}};
    e.tolerance = bounds.uniformity_ratio;
    for (double t : times) {
      if (!any.has_time(t)) continue;
      e.times.push_back(t);
    }
    e.applicable = !e.times.empty();
    if (!e.applicable) return e;
    double lo = inf, hi = -inf;
    for (const auto& [k, tr] : runs) {
      const double v = value_at(*tr);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    e.record(lo > 0.0 ? hi / lo : (hi > 0.0 ? inf : 1.0), 0.0, e.times.back());
    return e;
  };

  std::vector<double> late;
  for (double t : {1.2, 1.5}) {
    if (t <= t_last + 1e-12) late.push_back(t);
  }
  std::vector<ReportEntry> late_entries;
  for (double t : late) {
    char name[64];
    std::snprintf(name, sizeof name, "late_length_uniformity_t%.1f", t);
    late_entries.push_back(ratio_entry(name, "max_k L_k / min_k L_k", {t},
                                       [&](const FlowTrajectory& tr) { return cusp_length(tr.at(t), 1.0); }));
  }
  if (late.empty()) {
    ReportEntry e{"late_length_uniformity", "max_k L_k / min_k L_k at t in {1.2, 1.5}", {}};
    e.applicable = false;
    late_entries.push_back(e);
  }

  ReportEntry contrast{"length_contrast", "L_k(t_end) / L_k(0) < 1", {0.0, t_last}};
  contrast.tolerance = 1.0 - 1e-9;
  contrast.applicable = t_last >= 1.0 - 1e-12;
  ReportEntry ratio_mono{"length_ratio_increasing", "L_k(0) / L_k(t_end) increasing in k", {0.0, t_last}};
  ratio_mono.tolerance = 0.0;
  ratio_mono.applicable = contrast.applicable && runs.size() >= 2;
  {
    double prev = -inf;
    for (const auto& [k, tr] : runs) {
      const double l0 = cusp_length(tr->snapshots.front(), 1.0);
      const double l1 = cusp_length(tr->snapshots.back(), 1.0);
      contrast.record(l1 / l0, k, t_last);
      const double r = l0 / l1;
      if (prev > -inf) ratio_mono.record(prev - r, k, t_last);
      prev = r;
    }
    if (runs.size() < 2) ratio_mono.max_violation = 0.0;
  }

  const double s_in = -std::log1p(-eps_hat);
  auto all_times = any.times();
  std::vector<double> positive;
  for (double t : all_times) {
    if (t > 0.0) positive.push_back(t);
  }
  auto annulus = ratio_entry("annulus_curvature_uniformity", "sup_t>0 sup|K| on the reporting annulus, max/min over k",
                             positive, [&](const FlowTrajectory& tr) {
                               double m = 0.0;
                               for (double t : positive) {
                                 const double v = sup_abs_curvature(tr.at(t), s_in, -std::log(eps_hat));
                                 if (!std::isnan(v)) m = std::max(m, v);
                               }
                               return m;
                             });
  std::vector<double> cap_times;
  for (double t : all_times) {
    if (t >= 1.0 - 1e-12) cap_times.push_back(t);
  }
  auto inner = ratio_entry("inner_curvature_uniformity", "sup_{t in [1, t_end]} sup|K| on r <= 1 - eps_hat, max/min over k",
                           cap_times, [&](const FlowTrajectory& tr) {
                             double m = 0.0;
                             for (double t : cap_times) {
                               const double v = sup_abs_curvature(tr.at(t), s_in, inf);
                               if (!std::isnan(v)) m = std::max(m, v);
                             }
                             return m;
                           });

  ReportEntry conv{"small_time_convergence", "sup_{s in [1,2]} |u_k - dilating hyperbolic| at t = 1/100 nonincreasing in k",
                   {0.01}};
  conv.tolerance = 1e-9;
  conv.applicable = any.has_time(0.01);
  if (conv.applicable) {
    double prev = inf;
    for (const auto& [k, tr] : runs) {
      const double d = hyperbolic_deviation(tr->at(0.01));
      if (prev < inf) conv.record(d - prev, k, 0.01);
      prev = d;
    }
    if (runs.size() < 2) conv.max_violation = 0.0;
  }

  rep.entries.push_back(excess);
  for (auto& e : late_entries) rep.entries.push_back(e);
  rep.entries.push_back(contrast);
  rep.entries.push_back(ratio_mono);
  rep.entries.push_back(annulus);
  rep.entries.push_back(inner);
  rep.entries.push_back(conv);
  return rep;
}

/// Evolve the oracle closed form with Dirichlet data from itself and report
/// the sup-norm error at t_end.
inline ReportEntry run_oracle(const OracleSpec& o) {
  SolverConfig cfg;
  cfg.boundary = BoundaryKind::ClosedForm;
  cfg.boundary_metric = o.metric;
  cfg.scheme = Scheme::CrankNicolson;
  cfg.s_min = o.s_lo;
  cfg.du_max = 0.01;
  cfg.dt_max = std::min(1e-2, o.t_end / 20.0);
  cfg.dt_init = std::min(1e-6, cfg.dt_max);
  cfg.dt_floor = std::min(cfg.dt_floor, cfg.dt_init);
  const auto grid = uniform_grid(o.s_lo, o.s_hi, o.cells);
  FlowState st{sample(o.metric, grid, 0.0), {}};
  const auto tr = evolve(st, cfg, o.t_end, {0.0, o.t_end});
  ReportEntry e{"oracle " + o.text, "s in [" + std::to_string(o.s_lo) + ", " + std::to_string(o.s_hi) + "]",
                {o.t_end}};
  e.tolerance = o.tolerance;
  const auto& f = tr.snapshots.back();
  for (std::size_t i = 1; i + 1 < f.outer.size(); ++i) {
    e.record(std::abs(f.outer.values[i] - eval(o.metric, f.outer.coords[i], o.t_end)), f.outer.coords[i], o.t_end);
  }
  return e;
}

// ---- run ---------------------------------------------------------------------

struct KRun {
  int k = 0;
  FlowTrajectory trajectory;
  std::size_t clipped = 0;
  std::optional<std::string> failure;
};

struct SweepResult {
  std::map<int, VerificationReport> per_k;
  VerificationReport sweep;
  OriginConstants origin;
  bool all_passed = false;
};

/// Table CSVs with one row per time and one column group per k.
inline void write_tables(const fs::path& dir, const std::map<int, const FlowTrajectory*>& runs, double eps_hat) {
  const auto& any = *runs.begin()->second;
  const auto times = any.times();
  std::map<int, std::vector<DiagnosticsRecord>> diag;
  for (const auto& [k, tr] : runs) diag[k] = diagnose(*tr, eps_hat);
  auto num = [](double x) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", x);
    return std::string(b);
  };
  {
    std::string csv = "t";
    for (const auto& [k, _] : runs) csv += ",L_k" + std::to_string(k);
    csv += "\n";
    for (std::size_t n = 0; n < times.size(); ++n) {
      csv += num(times[n]);
      for (const auto& [k, _] : runs) csv += "," + num(diag[k][n].length);
      csv += "\n";
    }
    write_file(dir / "lengths.csv", csv);
  }
  {
    const auto tab = convergence_table(runs);
    std::string csv = "t";
    for (int k : tab.ks) csv += ",hyp_dev_k" + std::to_string(k);
    for (int k : tab.ks) csv += ",pair_dev_k" + std::to_string(k);
    csv += "\n";
    for (std::size_t n = 0; n < tab.times.size(); ++n) {
      csv += num(tab.times[n]);
      for (double v : tab.hyperbolic[n]) csv += "," + num(v);
      for (double v : tab.pairwise[n]) csv += "," + num(v);
      csv += "\n";
    }
    write_file(dir / "convergence.csv", csv);
  }
  {
    std::string csv = "t";
    for (const auto& [k, _] : runs) csv += ",annulus_k" + std::to_string(k);
    for (const auto& [k, _] : runs) csv += ",inner_k" + std::to_string(k);
    csv += "\n";
    for (std::size_t n = 0; n < times.size(); ++n) {
      csv += num(times[n]);
      for (const auto& [k, _] : runs) csv += "," + num(diag[k][n].sup_k_annulus);
      for (const auto& [k, _] : runs) csv += "," + num(diag[k][n].sup_k_inner);
      csv += "\n";
    }
    write_file(dir / "curvature_sups.csv", csv);
  }
  for (const auto& [k, tr] : runs) {
    std::string csv = "t,length,cap_area,sup_k_annulus,sup_k_inner,hyp_deviation\n";
    for (const auto& d : diag[k]) {
      csv += num(d.t) + "," + num(d.length) + "," + num(d.cap_area) + "," + num(d.sup_k_annulus) + "," +
             num(d.sup_k_inner) + "," + num(d.hyp_deviation) + "\n";
    }
    write_file(dir / k_dir(k) / "diagnostics.csv", csv);
  }
}

/// Verify a set of trajectories (fitting origin constants on the smallest k
/// unless the config fixes them).
inline SweepResult verify_sweep(const std::map<int, const FlowTrajectory*>& runs, const ExperimentConfig& cfg) {
  SweepResult res;
  res.origin = fit_origin_constants(*runs.begin()->second);
  if (cfg.alpha_hat) res.origin.alpha_hat = *cfg.alpha_hat;
  if (cfg.decay_c) res.origin.c = *cfg.decay_c;
  for (const auto& [k, tr] : runs) res.per_k[k] = verify_trajectory(*tr, k, res.origin);
  res.sweep = sweep_report(runs, cfg.eps_hat);
  res.all_passed = res.sweep.all_passed();
  for (const auto& [k, r] : res.per_k) res.all_passed = res.all_passed && r.all_passed();
  return res;
}

inline std::string summary_text(const SweepResult& res, const std::map<int, const FlowTrajectory*>& runs,
                                const std::vector<std::string>& failures) {
  std::ostringstream os;
  char buf[256];
  os << "rfcusp sweep summary (schema_version " << kSchemaVersion << ")\n\n";
  std::snprintf(buf, sizeof buf, "origin constants: alpha_hat = %.6g, c = %.6g\n\n", res.origin.alpha_hat,
                res.origin.c);
  os << buf;
  os << "   k     L(0)   L(0)-ln2k   L(t_end)   onset   steps  rejected\n";
  for (const auto& [k, tr] : runs) {
    const double l0 = cusp_length(tr->snapshots.front(), 1.0);
    const double l1 = cusp_length(tr->snapshots.back(), 1.0);
    std::snprintf(buf, sizeof buf, "%4d %8.4f %11.4f %10.4f %7.3g %7lld %9lld\n", k, l0, l0 - std::log(2.0 * k), l1,
                  contraction_onset(*tr), tr->stats.steps, tr->stats.rejected_steps);
    os << buf;
  }
  for (const auto& [k, r] : res.per_k) {
    os << "\n[k = " << k << "] " << (r.all_passed() ? "all pass" : "FAILURES") << "\n" << render_table(r);
  }
  os << "\n[sweep] " << (res.sweep.all_passed() ? "all pass" : "FAILURES") << "\n" << render_table(res.sweep);
  for (const auto& f : failures) os << "\nsolver failure: " << f << "\n";
  os << "\noverall: " << (res.all_passed && failures.empty() ? "PASS" : "FAIL") << "\n";
  return os.str();
}

inline nlohmann::json stats_json(const KRun& r, const ExperimentConfig& cfg,
                                 const std::map<std::string, std::string>& checksums) {
  const auto& st = r.trajectory.stats;
  nlohmann::json bc = nlohmann::json::array();
  for (double t : r.trajectory.times()) {
    const auto b = boundary_values(cfg.solver, t);
    bc.push_back({{"t", t}, {"value", b.left}, {"uncertainty", b.uncertainty}});
  }
  return {{"schema_version", kSchemaVersion},
          {"k", r.k},
          {"status", r.failure ? "failed" : "complete"},
          {"error", r.failure ? *r.failure : ""},
          {"steps", st.steps},
          {"newton_iterations", st.newton_iterations},
          {"rejected_steps", st.rejected_steps},
          {"min_dt", st.min_dt},
          {"max_dt", st.max_dt},
          {"clipped_blend_points", r.clipped},
          {"scheme", std::string(to_string(cfg.solver.scheme))},
          {"boundary", std::string(to_string(cfg.solver.boundary))},
          {"boundary_conditions", bc},
          {"snapshots", checksums}};
}

inline KRun solve_k(int k, const ExperimentConfig& cfg) {
  KRun r;
  r.k = k;
  auto spec = cfg.initial;
  spec.k = k;
  const auto ip = build_initial_profile(spec);
  r.clipped = ip.clipped;
  auto sc = cfg.solver;
  sc.k = k;
  try {
    r.trajectory = evolve(FlowState{ip.outer, ip.cap}, sc, cfg.t_end, cfg.snapshot_times());
  } catch (const SolverFailure& e) {
    r.trajectory = e.partial();
    r.failure = e.what();
  }
  return r;
}

struct RunOutcome {
  SweepResult result;
  std::vector<std::string> failures;
  fs::path directory;
  [[nodiscard]] bool passed() const { return result.all_passed && failures.empty(); }
};

/// Solve every k of the config on up to resolved_jobs() threads; workers
/// share nothing mutable and results come back in k_list order.
inline std::vector<KRun> solve_all(const ExperimentConfig& cfg, std::ostream* log = nullptr) {
  std::vector<KRun> runs(cfg.k_list.size());
  std::vector<std::exception_ptr> errors(cfg.k_list.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < cfg.k_list.size();) {
      try {
        runs[i] = solve_k(cfg.k_list[i], cfg);
      } catch (...) {
        errors[i] = std::current_exception();
      }
      if (log) {
        std::lock_guard lk(log_mu);
        *log << "k = " << cfg.k_list[i] << ": "
             << (errors[i] ? "error" : runs[i].failure ? "solver failure" : "done") << "\n";
      }
    }
  };
  const int jobs = std::min<int>(cfg.resolved_jobs(), static_cast<int>(cfg.k_list.size()));
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return runs;
}

/// Solve every k, persist the run directory and verify.
inline RunOutcome run_experiment(const ExperimentConfig& cfg, const std::string& config_text,
                                 std::ostream* log = nullptr) {
  RunOutcome out;
  out.directory = cfg.output_dir;
  fs::create_directories(out.directory);
  write_file(out.directory / "config.ini", config_text);
  const auto runs = solve_all(cfg, log);

  std::map<int, const FlowTrajectory*> ok;
  for (const auto& r : runs) {
    const fs::path kd = out.directory / k_dir(r.k);
    fs::create_directories(kd / "snapshots");
    std::map<std::string, std::string> sums;
    for (const auto& s : r.trajectory.snapshots) {
      const auto name = snapshot_filename(s.time());
      const auto text = snapshot_csv(s);
      write_file(kd / "snapshots" / name, text);
      sums[name] = fnv1a_hex(text);
    }
    write_file(kd / "stats.json", stats_json(r, cfg, sums).dump(2) + "\n");
    if (r.failure) {
      out.failures.push_back("k = " + std::to_string(r.k) + ": " + *r.failure);
      write_file(kd / "FAILED", *r.failure + "\n");
    } else {
      ok[r.k] = &r.trajectory;
    }
  }
  if (ok.empty()) return out;

  out.result = verify_sweep(ok, cfg);
  if (cfg.oracle) {
    out.result.sweep.entries.push_back(run_oracle(*cfg.oracle));
    out.result.all_passed = out.result.all_passed && out.result.sweep.entries.back().passed();
  }
  for (const auto& [k, rep] : out.result.per_k) {
    write_file(out.directory / k_dir(k) / "verification.json", to_json(rep).dump(2) + "\n");
  }
  auto sweep_json = to_json(out.result.sweep);
  sweep_json["origin_constants"] = {{"alpha_hat", out.result.origin.alpha_hat}, {"c", out.result.origin.c}};
  write_file(out.directory / "sweep_verification.json", sweep_json.dump(2) + "\n");
  write_tables(out.directory, ok, cfg.eps_hat);
  write_file(out.directory / "summary.txt", summary_text(out.result, ok, out.failures));
  return out;
}

// ---- replay ------------------------------------------------------------------

struct ReplayOutcome {
  SweepResult result;
  /// Names of stored reports that differ from the recomputed ones.
  std::vector<std::string> mismatches;
};

/// Load a k-directory's trajectory, checking every snapshot against the
/// checksums in stats.json.
inline FlowTrajectory load_trajectory(const fs::path& kd) {
  const auto stats_path = kd / "stats.json";
  if (!fs::exists(stats_path)) throw IntegrityError("missing " + stats_path.string());
  nlohmann::json stats;
  try {
    stats = nlohmann::json::parse(read_file(stats_path));
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(stats_path.string() + ": " + e.what());
  }
  if (stats.value("schema_version", 0) != kSchemaVersion) {
    throw IntegrityError(stats_path.string() + ": unsupported schema_version");
  }
  if (stats.value("status", "") != "complete") throw IntegrityError(kd.string() + ": run did not complete");
  FlowTrajectory tr;
  const auto& sums = stats.at("snapshots");
  for (auto it = sums.begin(); it != sums.end(); ++it) {
    const auto path = kd / "snapshots" / it.key();
    if (!fs::exists(path)) throw IntegrityError("missing snapshot " + path.string());
    const auto text = read_file(path);
    if (fnv1a_hex(text) != it.value().get<std::string>()) {
      throw IntegrityError("checksum mismatch in " + path.string());
    }
    tr.snapshots.push_back(parse_snapshot_csv(text, path.string()));
  }
  std::sort(tr.snapshots.begin(), tr.snapshots.end(),
            [](const auto& a, const auto& b) { return a.time() < b.time(); });
  if (tr.snapshots.empty()) throw IntegrityError(kd.string() + ": no snapshots");
  tr.stats.steps = stats.value("steps", 0LL);
  tr.stats.newton_iterations = stats.value("newton_iterations", 0LL);
  tr.stats.rejected_steps = stats.value("rejected_steps", 0LL);
  return tr;
}

/// Recompute every report from the persisted snapshots without re-solving and
/// compare with the stored reports.
inline ReplayOutcome replay_verify(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IntegrityError(dir.string() + " is not a run directory");
  const auto cfg_path = dir / "config.ini";
  if (!fs::exists(cfg_path)) throw IntegrityError("missing " + cfg_path.string());
  ExperimentConfig cfg;
  try {
    cfg = load_config(cfg_path.string());
  } catch (const ConfigError& e) {
    throw IntegrityError(e.what());
  }
  std::map<int, FlowTrajectory> loaded;
  for (int k : cfg.k_list) loaded[k] = load_trajectory(dir / k_dir(k));
  std::map<int, const FlowTrajectory*> runs;
  for (auto& [k, tr] : loaded) runs[k] = &tr;

  ReplayOutcome out;
  out.result = verify_sweep(runs, cfg);
  if (cfg.oracle) {
    out.result.sweep.entries.push_back(run_oracle(*cfg.oracle));
    out.result.all_passed = out.result.all_passed && out.result.sweep.entries.back().passed();
  }
  auto compare = [&](const fs::path& p, const VerificationReport& r, bool sweep) {
    if (!fs::exists(p)) throw IntegrityError("missing " + p.string());
    nlohmann::json stored;
    try {
      stored = nlohmann::json::parse(read_file(p));
    } catch (const nlohmann::json::exception& e) {
      throw IntegrityError(p.string() + ": " + e.what());
    }
    auto fresh = to_json(r);
    if (sweep) {
      fresh["origin_constants"] = {{"alpha_hat", out.result.origin.alpha_hat}, {"c", out.result.origin.c}};
    }
    if (stored != fresh) out.mismatches.push_back(p.string());
  };
  for (const auto& [k, rep] : out.result.per_k) compare(dir / k_dir(k) / "verification.json", rep, false);
  compare(dir / "sweep_verification.json", out.result.sweep, true);
  return out;
}

}  // namespace rfcusp
