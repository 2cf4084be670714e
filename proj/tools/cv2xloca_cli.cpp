// Command-line harness around the localization library: seeded experiment
// runs, parameter sweeps, solver benchmarking, and grid-oracle comparisons.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "cv2xloca/config.hpp"
#include "cv2xloca/dataproc.hpp"
#include "cv2xloca/plecal.hpp"
#include "cv2xloca/random.hpp"
#include "cv2xloca/runner.hpp"

namespace fs = std::filesystem;
using namespace cv2xloca;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::string methods;
  long seed = -1;
  long runs = -1;
  bool serial = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Experiment config file")->required();
  cmd->add_option("--out", args.out_dir, "Output directory");
  cmd->add_option("--seed", args.seed, "Override the config seed");
  cmd->add_option("--runs", args.runs, "Override the run count");
  cmd->add_option("--methods", args.methods, "Comma-separated method override");
  cmd->add_flag("--serial", args.serial, "Use the serial reference path instead of OpenMP");
}

runner::ExperimentConfig load_config(const CommonArgs& args) {
  auto cfg = config::load_file(args.config_path);
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  if (args.runs > 0) cfg.runs = static_cast<int>(args.runs);
  if (!args.methods.empty()) {
    cfg.methods.clear();
    std::string tok;
    for (char c : args.methods + ",") {
      if (c == ',' || c == ' ') {
        if (!tok.empty()) cfg.methods.push_back(runner::method_from_name(tok));
        tok.clear();
      } else {
        tok += c;
      }
    }
  }
  return cfg;
}

void write_outputs(const CommonArgs& args, const runner::ExperimentResult& result) {
  fs::create_directories(args.out_dir);
  {
    std::ofstream out(fs::path(args.out_dir) / "report.csv");
    runner::write_report_csv(out, result);
  }
  {
    std::ofstream out(fs::path(args.out_dir) / "summary.csv");
    runner::write_summary_csv(out, result);
  }
  std::cout << "reports written to " << args.out_dir << "\n";
}

void print_summaries(const runner::ExperimentResult& result) {
  std::printf("%-12s %-12s %-10s %8s %8s %8s\n", "method", "sweep", "value", "n", "ale",
              "p90_long");
  for (const auto& s : result.summaries) {
    if (s.aggregate.n == 0) {
      std::printf("%-12s %-12s %-10s %8s %8s %8s\n", runner::method_name(s.method),
                  s.sweep_parameter.c_str(), s.sweep_value.c_str(), "-", "-", "-");
      continue;
    }
    std::printf("%-12s %-12s %-10s %8zu %8.3f %8.3f\n", runner::method_name(s.method),
                s.sweep_parameter.c_str(), s.sweep_value.c_str(), s.aggregate.n, s.aggregate.ale,
                metrics::percentile(s.aggregate.longitudinal_errors, 0.9));
  }
  std::printf("wall time: %.2f s; coarse solves: %ld (mean %.3f ms)\n", result.wall_seconds,
              result.diagnostics.coarse_solves,
              result.diagnostics.coarse_solves
                  ? 1e3 * result.diagnostics.coarse_solve_seconds / result.diagnostics.coarse_solves
                  : 0.0);
}

int cmd_run(const CommonArgs& args, bool need_sweep) {
  auto cfg = load_config(args);
  if (need_sweep && !cfg.sweep)
    throw ConfigError("sweep: config has no [sweep] section");
  if (!need_sweep) cfg.sweep.reset();
  const auto result = runner::run_experiment(
      cfg, args.serial ? runner::ExecMode::serial : runner::ExecMode::parallel);
  print_summaries(result);
  write_outputs(args, result);
  return 0;
}

// Times the per-epoch coarse solve and compares the serial reference
// experiment path against the OpenMP path on the same seeds.
int cmd_bench(const CommonArgs& args, int solve_epochs) {
  auto cfg = load_config(args);
  cfg.sweep.reset();

  // Per-epoch solve timing over synthetic epochs of the configured scenario.
  const auto rsus = scenario::deploy_rsus(cfg.road, cfg.layout);
  RandomStream rng(derive_seed(cfg.seed, 9001));
  const double y_mid = cfg.road.dr3 / 4.0;
  long solved = 0;
  double total_s = 0.0;
  for (int i = 0; i < solve_epochs; ++i) {
    const Vec2 pos(rng.uniform(0.0, cfg.road.segment_length), y_mid);
    auto recs =
        channel::simulate_epoch(rsus, pos, channel::kDefaultMac, 0.0, cfg.channel, rng, nullptr);
    auto epochs = dataproc::match_epochs(std::move(recs), rsus, cfg.min_rsus, cfg.trajectory.dt);
    if (epochs.empty()) continue;
    coarse::EstimatorInputs in;
    in.epoch = epochs.front();
    in.p0 = cfg.channel.p0;
    in.d0 = cfg.channel.d0;
    in.gamma_per_rsu.assign(in.epoch.entries.size(), cfg.channel.gamma);
    const auto t0 = std::chrono::steady_clock::now();
    (void)coarse::coarse_fix(in, cfg.sdp_tol, cfg.sdp_max_iter);
    total_s += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ++solved;
  }
  std::printf("coarse solve: %ld epochs, mean %.3f ms\n", solved,
              solved ? 1e3 * total_s / solved : 0.0);

  const auto t_serial = std::chrono::steady_clock::now();
  const auto serial = runner::run_experiment(cfg, runner::ExecMode::serial);
  const double serial_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_serial).count();
  const auto t_par = std::chrono::steady_clock::now();
  const auto parallel = runner::run_experiment(cfg, runner::ExecMode::parallel);
  const double par_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_par).count();

  std::ostringstream a, b;
  runner::write_report_csv(a, serial);
  runner::write_report_csv(b, parallel);
  std::printf("experiment: serial %.2f s, openmp %.2f s, speedup %.2fx, outputs %s\n", serial_s,
              par_s, par_s > 0 ? serial_s / par_s : 0.0,
              a.str() == b.str() ? "identical" : "DIFFER");
  return a.str() == b.str() ? 0 : 1;
}

// Compares the relaxed solve against the exhaustive grid oracle on random
// epochs of the configured scenario.
int cmd_oracle(const CommonArgs& args, int epochs_n, double step) {
  auto cfg = load_config(args);
  const auto rsus = scenario::deploy_rsus(cfg.road, cfg.layout);
  RandomStream rng(derive_seed(cfg.seed, 417));

  fs::create_directories(args.out_dir);
  std::ofstream csv(fs::path(args.out_dir) / "oracle.csv");
  csv << "epoch,sdp_objective,oracle_objective,bound_ok,theta_dist\n";

  int violations = 0, made = 0;
  for (int i = 0; i < epochs_n; ++i) {
    const Vec2 pos(rng.uniform(0.0, cfg.road.segment_length),
                   rng.uniform(0.0, cfg.road.dr3 / 2.0));
    auto recs =
        channel::simulate_epoch(rsus, pos, channel::kDefaultMac, 0.0, cfg.channel, rng, nullptr);
    auto matched = dataproc::match_epochs(std::move(recs), rsus, cfg.min_rsus, cfg.trajectory.dt);
    if (matched.empty()) continue;
    coarse::EstimatorInputs in;
    in.epoch = matched.front();
    in.p0 = cfg.channel.p0;
    in.d0 = cfg.channel.d0;
    in.gamma_per_rsu.assign(in.epoch.entries.size(), cfg.channel.gamma);

    const auto fix = coarse::coarse_fix(in, cfg.sdp_tol, cfg.sdp_max_iter);
    double lo_x = pos.x(), hi_x = pos.x(), lo_y = 0.0, hi_y = cfg.road.dr3;
    for (const auto& [rsu, power] : in.epoch.entries) {
      lo_x = std::min(lo_x, rsu.position.x() - 20.0);
      hi_x = std::max(hi_x, rsu.position.x() + 20.0);
    }
    const coarse::Box2 bounds{Vec2(std::max(0.0, lo_x), lo_y),
                              Vec2(std::min(cfg.road.segment_length, hi_x), hi_y)};
    const Vec2 oracle_pt = coarse::grid_oracle(in, bounds, step);
    const double oracle_obj = coarse::nonconvex_objective(oracle_pt, in);
    const bool ok = fix.objective <= oracle_obj + 1e-5;
    if (!ok) ++violations;
    ++made;
    char buf[192];
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%d,%.6f\n", i, fix.objective, oracle_obj,
                  ok ? 1 : 0, (fix.theta_hat - oracle_pt).norm());
    csv << buf;
  }
  std::printf("oracle comparison: %d epochs, %d lower-bound violations\n", made, violations);
  return violations == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RSS cooperative localization experiment harness"};
  app.require_subcommand(1);

  CommonArgs run_args, sweep_args, bench_args, oracle_args;
  int bench_epochs = 100;
  int oracle_epochs = 20;
  double oracle_step = 0.5;

  auto* run = app.add_subcommand("run", "Run a single experiment config");
  add_common(run, run_args);
  auto* sweep = app.add_subcommand("sweep", "Run the config's parameter sweep");
  add_common(sweep, sweep_args);
  auto* bench = app.add_subcommand("bench", "Time the coarse solve and the serial/OpenMP paths");
  add_common(bench, bench_args);
  bench->add_option("--epochs", bench_epochs, "Epoch count for solve timing");
  auto* oracle = app.add_subcommand("oracle", "Compare the relaxation against the grid oracle");
  add_common(oracle, oracle_args);
  oracle->add_option("--epochs", oracle_epochs, "Number of random epochs");
  oracle->add_option("--step", oracle_step, "Oracle grid step, m");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_args, false);
    if (sweep->parsed()) return cmd_run(sweep_args, true);
    if (bench->parsed()) return cmd_bench(bench_args, bench_epochs);
    if (oracle->parsed()) return cmd_oracle(oracle_args, oracle_epochs, oracle_step);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
