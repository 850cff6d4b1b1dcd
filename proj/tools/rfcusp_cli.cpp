// rfcusp: run experiment sweeps, replay their verification, print the config schema.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rfcusp/config.hpp"
#include "rfcusp/experiment.hpp"

namespace {

int cmd_run(const std::string& path, const std::string& out_override) {
  std::ifstream is(path);
  if (!is) {
    std::cerr << "error: cannot open " << path << "\n";
    return 2;
  }
  std::stringstream ss;
  ss << is.rdbuf();
  const std::string text = ss.str();
  rfcusp::ExperimentConfig cfg;
  try {
    std::istringstream in(text);
    cfg = rfcusp::parse_config(rfcusp::IniFile::parse(in, path));
  } catch (const rfcusp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (!out_override.empty()) cfg.output_dir = out_override;
  const auto out = rfcusp::run_experiment(cfg, text, &std::cerr);
  std::ifstream summary(out.directory / "summary.txt");
  if (summary) std::cout << summary.rdbuf();
  for (const auto& f : out.failures) std::cerr << "solver failure: " << f << "\n";
  std::cout << "run directory: " << out.directory.string() << "\n";
  return out.passed() ? 0 : 1;
}

int cmd_replay(const std::string& dir) {
  const auto out = rfcusp::replay_verify(dir);
  for (const auto& [k, rep] : out.result.per_k) {
    std::cout << "[k = " << k << "]\n" << rfcusp::render_table(rep);
  }
  std::cout << "[sweep]\n" << rfcusp::render_table(out.result.sweep);
  for (const auto& m : out.mismatches) std::cerr << "stored report differs from replay: " << m << "\n";
  std::cout << "replay: " << (out.result.all_passed ? "all pass" : "FAILURES")
            << (out.mismatches.empty() ? ", matches stored reports" : ", MISMATCH with stored reports") << "\n";
  return out.result.all_passed && out.mismatches.empty() ? 0 : 1;
}

void cmd_schema() {
  for (const auto& [section, keys] : rfcusp::config_schema()) {
    std::cout << "[" << section << "]\n";
    for (const auto& k : keys) std::cout << "  " << k << "\n";
  }
  std::cout << "\nstats.json schema_version " << rfcusp::kSchemaVersion << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotationally symmetric Ricci flow of contracting cusps"};
  app.require_subcommand(1);

  std::string config_path, out_dir, run_dir;
  auto* run = app.add_subcommand("run", "Solve every k in a config and write a run directory");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("-o,--output", out_dir, "Override [experiment] output_dir");

  auto* replay = app.add_subcommand("replay-verify", "Recompute all checks from a run directory's snapshots");
  replay->add_option("dir", run_dir, "Run directory")->required();

  auto* schema = app.add_subcommand("print-schema", "List config sections and keys");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, out_dir);
    if (*replay) return cmd_replay(run_dir);
    if (*schema) {
      cmd_schema();
      return 0;
    }
  } catch (const rfcusp::IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
