#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cv2xloca/baselines.hpp"
#include "cv2xloca/channel.hpp"
#include "cv2xloca/metrics.hpp"
#include "cv2xloca/scenario.hpp"
#include "cv2xloca/tracking.hpp"

namespace cv2xloca::runner {

enum class Method { cv2x_loca, coarse_only, ml_true, wcl, lls, wlls };

const char* method_name(Method m);
Method method_from_name(const std::string& name);

struct TrajectorySpec {
  scenario::TrajectoryKind kind = scenario::TrajectoryKind::straight;
  double speed_mps = 25.0 / 3.6;
  double dt = 0.1;
  std::pair<double, double> window{400.0, 580.0};
};

struct CorrectionConfig {
  bool enabled = true;
  int anchors = 4;                    // L nearest in-range anchors per RSU
  double anchor_range = 250.0;        // RSU-to-RSU link range
  std::optional<double> anchor_sigma; // defaults to the channel sigma
};

struct SweepSpec {
  std::string parameter;            // speed_kmh | sigma | comm_range | dr1 | layout | trajectory
  std::vector<double> values;       // numeric sweeps
  std::vector<std::string> labels;  // enum sweeps (layout, trajectory)
};

// A fully specified scenario override used by the RSU-geometry study: fixed
// RSU triangle plus a short hand-built trajectory through the study point.
struct GeometryScenario {
  scenario::RoadConfig road;
  std::vector<scenario::RsuNode> rsus;
  scenario::Trajectory trajectory;
  Vec2 anchor{0.0, 0.0};  // the canonical vehicle location of the case
};

enum class GeometryLayout { centroid, near_one, outside_hull };

// The three canonical vehicle-vs-RSU layouts: at the RSU triangle centroid,
// near one RSU and far from the others, and outside the RSU convex hull.
GeometryScenario geometry_case(GeometryLayout layout, double speed_mps = 25.0 / 3.6,
                               double dt = 0.1);

bool point_in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c);

struct ExperimentConfig {
  std::string name = "default";
  scenario::RoadConfig road{};
  scenario::RsuLayout layout = scenario::RsuLayout::alternating;
  channel::ChannelParams channel{};
  // Exponent the estimators assume when correction is off (baselines always
  // use it). Defaults to the channel's true gamma; setting it differently
  // models a miscalibrated environment, the case correction exists for.
  std::optional<double> assumed_gamma;
  TrajectorySpec trajectory{};
  CorrectionConfig correction{};
  tracking::UkfConfig ukf{};
  std::vector<Method> methods{Method::cv2x_loca};
  int runs = 100;
  std::uint64_t seed = 1;
  int min_rsus = 3;
  double sdp_tol = 1e-7;
  int sdp_max_iter = 100;
  std::optional<SweepSpec> sweep;
  std::optional<GeometryScenario> geometry;  // overrides road/rsus/trajectory

  void validate() const;
};

struct RunDiagnostics {
  long epochs = 0;
  long dropped_groups = 0;
  long coarse_solves = 0;
  long coarse_optimal = 0;
  long coarse_max_iter = 0;
  long coarse_infeasible = 0;
  long baseline_failures = 0;
  long track_resets = 0;
  double coarse_solve_seconds = 0.0;
};

struct MethodRunReport {
  metrics::ErrorReport report;  // n == 0 when the run produced no estimates
};

struct MethodSummary {
  Method method = Method::cv2x_loca;
  std::string scenario;
  std::string sweep_parameter;  // empty when not sweeping
  std::string sweep_value;      // rendered value or label
  metrics::ErrorReport aggregate;  // pooled over all runs
  std::vector<MethodRunReport> per_run;
  long runs_with_data = 0;
};

struct ExperimentResult {
  std::vector<MethodSummary> summaries;  // method-major, sweep-value-minor
  RunDiagnostics diagnostics;            // totals over all runs and sweep values
  double wall_seconds = 0.0;
};

enum class ExecMode { serial, parallel };

// Runs the full experiment: per run, simulate the trajectory's epochs, match
// them, correct the path-loss exponents, solve every requested method, filter,
// and score against truth. Run r always draws from the stream derived from
// (seed, r), so results are identical between the serial reference path and
// the OpenMP path and across repeats.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                ExecMode mode = ExecMode::parallel);

// One row per (method, sweep value, run).
void write_report_csv(std::ostream& out, const ExperimentResult& result);
// One row per (method, sweep value), pooled over runs.
void write_summary_csv(std::ostream& out, const ExperimentResult& result);

}  // namespace cv2xloca::runner
