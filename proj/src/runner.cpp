#include "cv2xloca/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <unordered_map>

#include "cv2xloca/dataproc.hpp"
#include "cv2xloca/errors.hpp"
#include "cv2xloca/plecal.hpp"
#include "cv2xloca/random.hpp"

namespace cv2xloca::runner {

const char* method_name(Method m) {
  switch (m) {
    case Method::cv2x_loca: return "cv2x_loca";
    case Method::coarse_only: return "coarse_only";
    case Method::ml_true: return "ml_true";
    case Method::wcl: return "wcl";
    case Method::lls: return "lls";
    case Method::wlls: return "wlls";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  for (Method m : {Method::cv2x_loca, Method::coarse_only, Method::ml_true, Method::wcl,
                   Method::lls, Method::wlls})
    if (name == method_name(m)) return m;
  throw ConfigError("unknown method: " + name);
}

void ExperimentConfig::validate() const {
  if (!geometry) road.validate();
  channel.validate();
  if (assumed_gamma && !(*assumed_gamma >= 2.0 && *assumed_gamma <= 6.0))
    throw ConfigError("experiment: assumed_gamma must be in [2, 6]");
  if (runs < 1) throw ConfigError("experiment: runs must be >= 1");
  if (min_rsus < 3) throw ConfigError("experiment: min_rsus must be >= 3");
  if (methods.empty()) throw ConfigError("experiment: at least one method required");
  if (!(sdp_tol > 0.0)) throw ConfigError("experiment: sdp_tol must be > 0");
  if (correction.enabled && correction.anchors < 1)
    throw ConfigError("experiment: anchors must be >= 1");
}

bool point_in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  const auto side = [](const Vec2& p1, const Vec2& p2, const Vec2& p3) {
    return (p1.x() - p3.x()) * (p2.y() - p3.y()) - (p2.x() - p3.x()) * (p1.y() - p3.y());
  };
  const double d1 = side(p, a, b), d2 = side(p, b, c), d3 = side(p, c, a);
  const bool has_neg = d1 < 0 || d2 < 0 || d3 < 0;
  const bool has_pos = d1 > 0 || d2 > 0 || d3 > 0;
  return !(has_neg && has_pos);
}

GeometryScenario geometry_case(GeometryLayout layout, double speed_mps, double dt) {
  GeometryScenario g;
  g.road = scenario::make_road(200.0, 3.5, 2, 60.0, 1.0);
  g.rsus = {{0, Vec2(0.0, -1.0), scenario::RsuSide::near},
            {1, Vec2(60.0, 15.0), scenario::RsuSide::far},
            {2, Vec2(120.0, -1.0), scenario::RsuSide::near}};

  double x_lo = 0.0;
  switch (layout) {
    case GeometryLayout::centroid:
      g.anchor = (g.rsus[0].position + g.rsus[1].position + g.rsus[2].position) / 3.0;
      x_lo = g.anchor.x() - 10.0;
      break;
    case GeometryLayout::near_one:
      g.anchor = Vec2(10.0, 1.0);
      x_lo = 0.0;
      break;
    case GeometryLayout::outside_hull:
      g.anchor = Vec2(150.0, 7.0);
      x_lo = 140.0;
      break;
  }

  g.trajectory.kind = scenario::TrajectoryKind::straight;
  g.trajectory.speed = speed_mps;
  g.trajectory.dt = dt;
  for (long k = 0;; ++k) {
    const double t = k * dt;
    const double x = x_lo + speed_mps * t;
    if (x > x_lo + 20.0 + 1e-9) break;
    g.trajectory.samples.push_back({t, Vec2(x, g.anchor.y()), Vec2(speed_mps, 0.0)});
  }
  return g;
}

namespace {

struct RunOutput {
  std::vector<MethodRunReport> per_method;  // aligned with config.methods
  RunDiagnostics diag;
};

struct EpochFix {
  long k = -1;
  coarse::PositionFix fix;
};

// One seeded Monte Carlo run through the whole pipeline.
RunOutput execute_run(const ExperimentConfig& cfg, std::uint64_t run_seed) {
  using scenario::RsuNode;

  const bool geo = cfg.geometry.has_value();
  const scenario::RoadConfig& road = geo ? cfg.geometry->road : cfg.road;
  const std::vector<RsuNode> rsus =
      geo ? cfg.geometry->rsus : scenario::deploy_rsus(road, cfg.layout);
  const scenario::Trajectory traj =
      geo ? cfg.geometry->trajectory
          : scenario::generate_trajectory(cfg.trajectory.kind, cfg.trajectory.speed_mps,
                                          cfg.trajectory.dt, road, cfg.trajectory.window);
  const double dt = traj.dt;
  const auto& ch = cfg.channel;

  std::unordered_map<int, int> rsu_index;
  for (std::size_t i = 0; i < rsus.size(); ++i) rsu_index[rsus[i].id] = static_cast<int>(i);

  // Per-RSU anchor lists: the L nearest in-range peers, fixed by geometry.
  std::vector<std::vector<int>> anchor_idx(rsus.size());
  if (cfg.correction.enabled) {
    for (std::size_t i = 0; i < rsus.size(); ++i) {
      std::vector<std::pair<double, int>> cand;
      for (std::size_t l = 0; l < rsus.size(); ++l) {
        if (l == i) continue;
        const double d = (rsus[i].position - rsus[l].position).norm();
        if (d <= cfg.correction.anchor_range) cand.push_back({d, static_cast<int>(l)});
      }
      std::sort(cand.begin(), cand.end());
      for (int a = 0; a < std::min<int>(cfg.correction.anchors, cand.size()); ++a)
        anchor_idx[i].push_back(cand[a].second);
    }
  }

  RandomStream rng(run_seed);
  RunOutput out;
  out.per_method.resize(cfg.methods.size());

  const double nominal_gamma = cfg.assumed_gamma.value_or(ch.gamma);
  const double anchor_sigma = cfg.correction.anchor_sigma.value_or(ch.sigma);
  const auto est_power = [&](double p) {
    return ch.negate_path_loss ? channel::to_internal_convention(p, ch.p0) : p;
  };

  // Simulate every epoch; correct gamma per heard RSU from fresh anchor draws.
  std::vector<channel::RssMeasurement> records;
  std::unordered_map<long long, double> gamma_at;  // key: k * 1000 + rsu index
  channel::EpochDiagnostics ediag;
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const auto& sample = traj.samples[k];
    auto recs = channel::simulate_epoch(rsus, sample.position, channel::kDefaultMac, sample.t, ch,
                                        rng, &ediag);
    if (cfg.correction.enabled) {
      for (const auto& rec : recs) {
        const int i = rsu_index.at(rec.rsu_id);
        std::vector<plecal::AnchorObservation> obs;
        for (int l : anchor_idx[i]) {
          const double d = (rsus[i].position - rsus[l].position).norm();
          bool clamped = false;
          const double power = channel::rss_mean(ch, d, &clamped) + anchor_sigma * rng.gaussian();
          obs.push_back({rsus[i].id, rsus[l].id, est_power(power), rsus[l].position});
        }
        const auto est =
            plecal::estimate_gamma(rsus[i].id, obs, ch.p0, ch.d0, rsus[i].position);
        gamma_at[static_cast<long long>(k) * 1000 + i] = est ? est->gamma_hat : nominal_gamma;
      }
    }
    for (auto& r : recs) records.push_back(std::move(r));
  }

  dataproc::MatchDiagnostics mdiag;
  const auto epochs = dataproc::match_epochs(std::move(records), rsus, cfg.min_rsus, dt, &mdiag);
  out.diag.epochs = mdiag.epochs_out;
  out.diag.dropped_groups = mdiag.dropped_groups;

  const auto k_of = [&](double t) { return std::llround(t / dt); };
  const auto gamma_list = [&](const dataproc::MatchedEpoch& e, bool corrected) {
    std::vector<double> g;
    g.reserve(e.entries.size());
    const long long k = k_of(e.t);
    for (const auto& [rsu, power] : e.entries) {
      if (corrected && cfg.correction.enabled) {
        const auto it = gamma_at.find(k * 1000 + rsu_index.at(rsu.id));
        g.push_back(it != gamma_at.end() ? it->second : nominal_gamma);
      } else {
        g.push_back(nominal_gamma);
      }
    }
    return g;
  };
  const auto make_inputs = [&](const dataproc::MatchedEpoch& e, bool corrected) {
    coarse::EstimatorInputs in;
    in.epoch = e;
    for (auto& [rsu, power] : in.epoch.entries) power = est_power(power);
    in.p0 = ch.p0;
    in.d0 = ch.d0;
    in.gamma_per_rsu = gamma_list(e, corrected);
    return in;
  };

  const bool want_coarse =
      std::any_of(cfg.methods.begin(), cfg.methods.end(),
                  [](Method m) { return m == Method::cv2x_loca || m == Method::coarse_only; });

  std::vector<EpochFix> coarse_fixes;
  if (want_coarse) {
    coarse_fixes.reserve(epochs.size());
    for (const auto& e : epochs) {
      const auto inputs = make_inputs(e, /*corrected=*/true);
      const auto t0 = std::chrono::steady_clock::now();
      const auto fix = coarse::coarse_fix(inputs, cfg.sdp_tol, cfg.sdp_max_iter);
      out.diag.coarse_solve_seconds +=
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      out.diag.coarse_solves++;
      switch (fix.status) {
        case coarse::SdpStatus::optimal: out.diag.coarse_optimal++; break;
        case coarse::SdpStatus::max_iter: out.diag.coarse_max_iter++; break;
        case coarse::SdpStatus::infeasible: out.diag.coarse_infeasible++; break;
      }
      coarse_fixes.push_back({k_of(e.t), fix});
    }
  }

  const auto truth_at = [&](long k) { return traj.samples[static_cast<std::size_t>(k)].position; };

  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    const Method method = cfg.methods[mi];
    std::vector<Vec2> est, truth;

    if (method == Method::coarse_only) {
      for (const auto& ef : coarse_fixes) {
        if (ef.fix.status == coarse::SdpStatus::infeasible) continue;
        est.push_back(ef.fix.theta_hat);
        truth.push_back(truth_at(ef.k));
      }
    } else if (method == Method::cv2x_loca) {
      std::unordered_map<long, const coarse::PositionFix*> fix_at;
      for (const auto& ef : coarse_fixes)
        if (ef.fix.status != coarse::SdpStatus::infeasible) fix_at[ef.k] = &ef.fix;
      std::optional<tracking::TrackState> track;
      for (long k = 0; k < static_cast<long>(traj.samples.size()); ++k) {
        const auto it = fix_at.find(k);
        const coarse::PositionFix* fix = it == fix_at.end() ? nullptr : it->second;
        if (!track) {
          if (fix) {
            track = tracking::ukf_init(fix->theta_hat, cfg.ukf.z0, cfg.ukf);
            track->t = k * dt;
            est.push_back(tracking::filtered_position(*track));
            truth.push_back(truth_at(k));
          }
          continue;
        }
        if (fix && track->consecutive_missing >= cfg.ukf.reset_after_missing)
          out.diag.track_resets++;
        std::optional<coarse::PositionFix> opt_fix;
        if (fix) opt_fix = *fix;
        track = tracking::ukf_step(*track, opt_fix, dt);
        est.push_back(tracking::filtered_position(*track));
        truth.push_back(truth_at(k));
      }
    } else {
      for (const auto& e : epochs) {
        const auto inputs = make_inputs(e, /*corrected=*/false);
        baselines::BaselineFix bf;
        switch (method) {
          case Method::ml_true:
            bf = baselines::ml_true(inputs, truth_at(k_of(e.t)));
            break;
          case Method::wcl: bf = baselines::wcl(inputs); break;
          case Method::lls: bf = baselines::lls(inputs); break;
          case Method::wlls: bf = baselines::wlls_crlb(inputs, ch.sigma); break;
          default: break;
        }
        if (!bf.converged) {
          out.diag.baseline_failures++;
          continue;
        }
        est.push_back(bf.theta_hat);
        truth.push_back(truth_at(k_of(e.t)));
      }
    }

    if (!est.empty()) out.per_method[mi].report = metrics::compute_report(est, truth);
  }
  return out;
}

void accumulate(RunDiagnostics& total, const RunDiagnostics& d) {
  total.epochs += d.epochs;
  total.dropped_groups += d.dropped_groups;
  total.coarse_solves += d.coarse_solves;
  total.coarse_optimal += d.coarse_optimal;
  total.coarse_max_iter += d.coarse_max_iter;
  total.coarse_infeasible += d.coarse_infeasible;
  total.baseline_failures += d.baseline_failures;
  total.track_resets += d.track_resets;
  total.coarse_solve_seconds += d.coarse_solve_seconds;
}

std::string render_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct SweepEntry {
  std::string parameter, value;
  ExperimentConfig config;
};

ExperimentConfig apply_sweep(const ExperimentConfig& base, const std::string& param,
                             double value, const std::string& label) {
  ExperimentConfig cfg = base;
  cfg.sweep.reset();
  if (param == "speed_kmh") {
    cfg.trajectory.speed_mps = value / 3.6;
  } else if (param == "sigma") {
    cfg.channel.sigma = value;
  } else if (param == "comm_range") {
    cfg.channel.comm_range = value;
  } else if (param == "dr1") {
    cfg.road.dr1 = value;
  } else if (param == "layout") {
    GeometryLayout layout;
    if (label == "centroid") layout = GeometryLayout::centroid;
    else if (label == "near_one") layout = GeometryLayout::near_one;
    else if (label == "outside_hull") layout = GeometryLayout::outside_hull;
    else throw ConfigError("sweep: unknown layout: " + label);
    cfg.geometry = geometry_case(layout, cfg.trajectory.speed_mps, cfg.trajectory.dt);
    cfg.channel.comm_range = std::max(cfg.channel.comm_range, 250.0);
  } else if (param == "trajectory") {
    if (label == "straight") cfg.trajectory.kind = scenario::TrajectoryKind::straight;
    else if (label == "right_to_left")
      cfg.trajectory.kind = scenario::TrajectoryKind::lane_change_right_to_left;
    else if (label == "left_to_right")
      cfg.trajectory.kind = scenario::TrajectoryKind::lane_change_left_to_right;
    else throw ConfigError("sweep: unknown trajectory kind: " + label);
  } else {
    throw ConfigError("sweep: unknown parameter: " + param);
  }
  return cfg;
}

std::vector<SweepEntry> expand_sweep(const ExperimentConfig& cfg) {
  std::vector<SweepEntry> entries;
  if (!cfg.sweep) {
    entries.push_back({"", "", cfg});
    entries.back().config.sweep.reset();
    return entries;
  }
  const auto& sw = *cfg.sweep;
  if (!sw.labels.empty()) {
    for (const auto& label : sw.labels)
      entries.push_back({sw.parameter, label, apply_sweep(cfg, sw.parameter, 0.0, label)});
  } else {
    if (sw.values.empty()) throw ConfigError("sweep: no values given");
    for (double v : sw.values)
      entries.push_back({sw.parameter, render_value(v), apply_sweep(cfg, sw.parameter, v, "")});
  }
  return entries;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, ExecMode mode) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();
  const auto entries = expand_sweep(config);

  ExperimentResult result;
  // method-major, sweep-value-minor layout
  for (Method m : config.methods) {
    for (const auto& e : entries) {
      MethodSummary s;
      s.method = m;
      s.scenario = config.name;
      s.sweep_parameter = e.parameter;
      s.sweep_value = e.value;
      s.per_run.resize(config.runs);
      result.summaries.push_back(std::move(s));
    }
  }

  std::string first_error;
  for (std::size_t ei = 0; ei < entries.size(); ++ei) {
    const ExperimentConfig& cfg = entries[ei].config;
    std::vector<RunOutput> outputs(config.runs);

    if (mode == ExecMode::parallel) {
#pragma omp parallel for schedule(dynamic)
      for (int r = 0; r < config.runs; ++r) {
        try {
          outputs[r] = execute_run(cfg, derive_seed(config.seed, r));
        } catch (const std::exception& ex) {
#pragma omp critical
          if (first_error.empty())
            first_error = std::string(ex.what()) + " [scenario " + config.name + ", sweep " +
                          entries[ei].value + ", run " + std::to_string(r) + "]";
        }
      }
    } else {
      for (int r = 0; r < config.runs; ++r) {
        try {
          outputs[r] = execute_run(cfg, derive_seed(config.seed, r));
        } catch (const std::exception& ex) {
          if (first_error.empty())
            first_error = std::string(ex.what()) + " [scenario " + config.name + ", sweep " +
                          entries[ei].value + ", run " + std::to_string(r) + "]";
        }
      }
    }
    if (!first_error.empty()) throw std::runtime_error("run_experiment: " + first_error);

    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
      MethodSummary& summary = result.summaries[mi * entries.size() + ei];
      std::vector<metrics::ErrorReport> nonempty;
      for (int r = 0; r < config.runs; ++r) {
        summary.per_run[r] = outputs[r].per_method[mi];
        if (summary.per_run[r].report.n > 0) {
          nonempty.push_back(summary.per_run[r].report);
          summary.runs_with_data++;
        }
      }
      if (!nonempty.empty()) summary.aggregate = metrics::merge_reports(nonempty);
    }
    for (const auto& o : outputs) accumulate(result.diagnostics, o.diag);
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

namespace {

void write_row(std::ostream& out, const MethodSummary& s, long run,
               const metrics::ErrorReport& r) {
  char buf[384];
  const double p50 = metrics::percentile(r.longitudinal_errors, 0.5);
  const double p90 = metrics::percentile(r.longitudinal_errors, 0.9);
  std::snprintf(buf, sizeof buf, "%s,%s,%s,%s,%ld,%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                method_name(s.method), s.scenario.c_str(), s.sweep_parameter.c_str(),
                s.sweep_value.c_str(), run, r.n, r.ale, r.rmse, r.mae, r.mape, p50, p90);
  out << buf;
}

}  // namespace

void write_report_csv(std::ostream& out, const ExperimentResult& result) {
  out << "method,scenario,sweep_parameter,sweep_value,run,n,ale,rmse,mae,mape,p50_long,p90_long\n";
  for (const auto& s : result.summaries)
    for (std::size_t r = 0; r < s.per_run.size(); ++r)
      if (s.per_run[r].report.n > 0) write_row(out, s, static_cast<long>(r), s.per_run[r].report);
}

void write_summary_csv(std::ostream& out, const ExperimentResult& result) {
  out << "method,scenario,sweep_parameter,sweep_value,runs,runs_with_data,n,ale,rmse,mae,mape,"
         "p50_long,p90_long\n";
  char buf[384];
  for (const auto& s : result.summaries) {
    if (s.aggregate.n == 0) continue;
    const auto& r = s.aggregate;
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%s,%zu,%ld,%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  method_name(s.method), s.scenario.c_str(), s.sweep_parameter.c_str(),
                  s.sweep_value.c_str(), s.per_run.size(), s.runs_with_data, r.n, r.ale, r.rmse,
                  r.mae, r.mape, metrics::percentile(r.longitudinal_errors, 0.5),
                  metrics::percentile(r.longitudinal_errors, 0.9));
    out << buf;
  }
}

}  // namespace cv2xloca::runner
