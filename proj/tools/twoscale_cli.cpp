// Command-line front end: simulation runs, verification studies, and
// snapshot inspection on top of the twoscale library.
//
// Exit codes: 0 success, 1 rejected input (bad config, bad arguments,
// unreadable files), 2 numerical failure or an out-of-envelope state.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "twoscale/config.hpp"
#include "twoscale/driver.hpp"
#include "twoscale/errors.hpp"
#include "twoscale/mms.hpp"
#include "twoscale/snapshot.hpp"
#include "twoscale/studies.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string snapshot_name(int step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "snapshot_%06d.csv", step);
  return buf;
}

int total_violation_count(const twoscale::Diagnostics& d) {
  int n = 0;
  for (const auto& [t, list] : d.violations) {
    n += static_cast<int>(list.size());
  }
  return n;
}

// JSON-lines: a run summary first, then one record per outer iteration, a
// per-slab digest after its iterations, and one record per bound violation.
void write_diagnostics(const twoscale::RunResult& res, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw twoscale::ValidationError("cannot write '" + path + "'");
  }
  const auto& d = res.diagnostics;
  out << json{{"record", "summary"},
              {"envelope",
               {{"M1", res.envelope.M1},
                {"M2", res.envelope.M2},
                {"M3", res.envelope.M3},
                {"M4", res.envelope.M4},
                {"M0", res.envelope.M0}}},
              {"truncation_level", res.kinetics_used.m.value_or(0.0)},
              {"slabs", d.slabs.size()},
              {"total_outer_iterations", d.total_outer_iterations},
              {"slab_restarts", d.slab_restarts},
              {"violations", total_violation_count(d)}}
             .dump()
      << '\n';
  for (const auto& slab : d.slabs) {
    for (size_t i = 0; i < slab.outer_residuals.size(); ++i) {
      out << json{{"record", "outer_iteration"},
                  {"t_start", slab.t_start},
                  {"t_end", slab.t_end},
                  {"iteration", i + 1},
                  {"residual", slab.outer_residuals[i]}}
                 .dump()
          << '\n';
    }
    out << json{{"record", "slab"},
                {"t_start", slab.t_start},
                {"t_end", slab.t_end},
                {"steps", slab.steps},
                {"outer_iterations", slab.outer_residuals.size()},
                {"outer_ratio", slab.outer_ratio},
                {"inner_ratio_first", slab.inner_ratio_first},
                {"inner_ratio_max", slab.inner_ratio_max},
                {"max_inner_iterations", slab.max_inner_iterations}}
               .dump()
        << '\n';
  }
  for (const auto& [t, list] : d.violations) {
    for (const auto& v : list) {
      out << json{{"record", "violation"},
                  {"time", t},
                  {"field", v.field},
                  {"macro_index", v.macro_index},
                  {"micro_index", v.micro_index},
                  {"value", v.value},
                  {"bound", v.bound}}
                 .dump()
          << '\n';
    }
  }
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  const twoscale::RunConfig cfg = twoscale::parse_config(config_path);
  const twoscale::RunResult res = twoscale::run(cfg);
  fs::create_directories(out_dir);
  for (size_t i = 0; i < res.snapshots.size(); ++i) {
    const fs::path p = fs::path(out_dir) / snapshot_name(res.snapshot_steps[i]);
    twoscale::write_snapshot(res.snapshots[i], p.string());
  }
  write_diagnostics(res, (fs::path(out_dir) / "diagnostics.jsonl").string());
  std::cout << "wrote " << res.snapshots.size()
            << " snapshots and diagnostics.jsonl to " << out_dir << "\n";
  const int bad = total_violation_count(res.diagnostics);
  if (bad > 0) {
    std::cerr << "solver failure: " << bad
              << " nodal values left the invariant envelope (see "
                 "diagnostics.jsonl)\n";
    return 2;
  }
  return 0;
}

int cmd_mms(const std::string& config_path, const std::string& mode,
            int levels, const std::string& out_file) {
  const twoscale::RunConfig cfg = twoscale::parse_config(config_path);
  twoscale::MMSCase c;
  twoscale::RefinementMode rm = twoscale::RefinementMode::Space;
  if (mode == "trivial") {
    c = twoscale::mms_trivial();
  } else if (mode == "time") {
    c = twoscale::mms_temporal();
    rm = twoscale::RefinementMode::Time;
  } else {
    c = twoscale::mms_spatial();
  }
  const twoscale::ConvergenceTable table =
      twoscale::run_mms_study(c, levels, rm, &cfg);
  if (out_file.empty()) {
    twoscale::write_convergence_table(table, std::cout);
  } else {
    std::ofstream out(out_file);
    if (!out) {
      throw twoscale::ValidationError("cannot write '" + out_file + "'");
    }
    twoscale::write_convergence_table(table, out);
  }
  std::cerr << "case " << c.name << ": fitted orders w1=" << table.fitted_w1
            << " w2=" << table.fitted_w2 << " w3=" << table.fitted_w3
            << " w4=" << table.fitted_w4 << "\n";
  return 0;
}

std::vector<int> parse_slab_list(const std::string& s) {
  std::vector<int> out;
  size_t pos = 0;
  while (pos <= s.size()) {
    const size_t comma = std::min(s.find(',', pos), s.size());
    const std::string tok = s.substr(pos, comma - pos);
    size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || tok.empty()) {
      throw twoscale::ValidationError("bad slab list entry '" + tok + "'");
    }
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

int cmd_contraction(const std::string& config_path, const std::string& slabs,
                    const std::string& out_file) {
  const twoscale::RunConfig cfg = twoscale::parse_config(config_path);
  const auto rows = twoscale::run_contraction_study(cfg, parse_slab_list(slabs));
  if (out_file.empty()) {
    twoscale::write_contraction_table(rows, std::cout);
  } else {
    std::ofstream out(out_file);
    if (!out) {
      throw twoscale::ValidationError("cannot write '" + out_file + "'");
    }
    twoscale::write_contraction_table(rows, out);
  }
  return 0;
}

int cmd_bounds(const std::string& snapshot_path, const std::string& config_path,
               double tol) {
  const twoscale::RunConfig cfg = twoscale::parse_config(config_path);
  const twoscale::TwoScaleState st = twoscale::read_snapshot(snapshot_path);
  const twoscale::BoundsEnvelope env = twoscale::profile_envelope(cfg);
  if (tol < 0.0) {
    tol = cfg.tol_pos;
  }
  const auto violations = twoscale::check_bounds(st, env, tol);
  std::cout << "envelope M1=" << env.M1 << " M2=" << env.M2 << " M3=" << env.M3
            << " M4=" << env.M4 << ", tolerance " << tol << "\n";
  if (violations.empty()) {
    std::cout << "no violations\n";
    return 0;
  }
  for (const auto& v : violations) {
    std::cout << v.field << " macro " << v.macro_index;
    if (v.micro_index >= 0) {
      std::cout << " micro " << v.micro_index;
    }
    std::cout << ": value " << v.value << " outside [0, " << v.bound << "]\n";
  }
  std::cout << violations.size() << " violations\n";
  return 2;
}

int cmd_stability(const std::string& config_path, double delta) {
  const twoscale::RunConfig cfg = twoscale::parse_config(config_path);
  const twoscale::StabilityReport rep = twoscale::stability_probe(cfg, delta);
  char buf[64];
  std::cout << "time,distance\n";
  for (size_t i = 0; i < rep.times.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", rep.times[i],
                  rep.distances[i]);
    std::cout << buf;
  }
  std::cerr << "initial distance " << rep.initial_distance
            << ", fitted growth rate " << rep.fitted_rate << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-scale corrosion solver and verification toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string snapshot_path;
  std::string out_dir = "out";
  std::string out_file;
  std::string mode = "space";
  std::string slabs = "8,4,2,1";
  int levels = 4;
  double tol = -1.0;
  double delta = 1e-3;

  auto* run_cmd = app.add_subcommand(
      "run", "Simulate a configuration; write snapshots and diagnostics");
  run_cmd->add_option("config", config_path, "Run configuration file")
      ->required();
  run_cmd->add_option("--out", out_dir, "Output directory (created if absent)")
      ->capture_default_str();

  auto* mms_cmd = app.add_subcommand(
      "mms", "Manufactured-solution convergence study (CSV table)");
  mms_cmd->add_option("config", config_path, "Solver settings to study under")
      ->required();
  mms_cmd
      ->add_option("--mode", mode,
                   "space (joint ladder), time (dt only), or trivial")
      ->capture_default_str()
      ->check(CLI::IsMember({"space", "time", "trivial"}));
  mms_cmd->add_option("--levels", levels, "Refinement levels (>= 3)")
      ->capture_default_str();
  mms_cmd->add_option("--out", out_file, "Write the table here, not stdout");

  auto* contraction_cmd = app.add_subcommand(
      "contraction", "Fixed-point contraction ratios per slab length (CSV)");
  contraction_cmd->add_option("config", config_path, "Run configuration file")
      ->required();
  contraction_cmd
      ->add_option("--slabs", slabs, "Comma-separated slab lengths in steps")
      ->capture_default_str();
  contraction_cmd->add_option("--out", out_file,
                              "Write the table here, not stdout");

  auto* bounds_cmd = app.add_subcommand(
      "bounds", "Check a snapshot against the config's invariant envelope");
  bounds_cmd->add_option("snapshot", snapshot_path, "Snapshot CSV file")
      ->required();
  bounds_cmd->add_option("config", config_path, "Run configuration file")
      ->required();
  bounds_cmd->add_option("--tol", tol,
                         "Violation tolerance (default: the config's tol_pos)");

  auto* stability_cmd = app.add_subcommand(
      "stability", "Distance growth between a run and a shifted twin");
  stability_cmd->add_option("config", config_path, "Run configuration file")
      ->required();
  stability_cmd->add_option("delta", delta, "Initial-data shift")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run_cmd->parsed()) {
      return cmd_run(config_path, out_dir);
    }
    if (mms_cmd->parsed()) {
      return cmd_mms(config_path, mode, levels, out_file);
    }
    if (contraction_cmd->parsed()) {
      return cmd_contraction(config_path, slabs, out_file);
    }
    if (bounds_cmd->parsed()) {
      return cmd_bounds(snapshot_path, config_path, tol);
    }
    if (stability_cmd->parsed()) {
      return cmd_stability(config_path, delta);
    }
  } catch (const twoscale::ConfigError& e) {
    std::cerr << "error: " << e.what();
    if (e.line > 0) {
      std::cerr << " (line " << e.line << ")";
    }
    std::cerr << "\n";
    return 1;
  } catch (const twoscale::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const twoscale::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
