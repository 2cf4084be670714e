#include "cv2xloca/scenario.hpp"

#include <cmath>

namespace cv2xloca::scenario {

void RoadConfig::validate() const {
  if (!(segment_length > 0.0)) throw ConfigError("road: segment_length must be > 0");
  if (!(lane_width > 0.0)) throw ConfigError("road: lane_width must be > 0");
  if (lanes_per_direction < 1) throw ConfigError("road: lanes_per_direction must be >= 1");
  if (!(dr1 >= 1.0)) throw ConfigError("road: dr1 must be >= 1");
  if (!(dr2 > 0.0)) throw ConfigError("road: dr2 must be > 0");
  if (!(dr3 > 0.0)) throw ConfigError("road: dr3 must be > 0");
  const double expected = 2.0 * lanes_per_direction * lane_width;
  if (std::abs(dr3 - expected) > 1e-9)
    throw ConfigError("road: dr3 must equal 2 * lanes_per_direction * lane_width");
}

std::vector<RsuNode> deploy_rsus(const RoadConfig& config, RsuLayout layout) {
  config.validate();
  std::vector<RsuNode> nodes;
  const double y_near = -config.dr2;
  const double y_far = config.dr3 + config.dr2;
  int id = 0;
  for (int j = 0;; ++j) {
    const double x = j * config.dr1;
    if (x > config.segment_length + 1e-9) break;
    if (layout == RsuLayout::alternating) {
      const bool near = (j % 2 == 0);
      nodes.push_back({id++, Vec2(x, near ? y_near : y_far), near ? RsuSide::near : RsuSide::far});
    } else {
      nodes.push_back({id++, Vec2(x, y_near), RsuSide::near});
      nodes.push_back({id++, Vec2(x, y_far), RsuSide::far});
    }
  }
  return nodes;
}

double lane_center(const RoadConfig& config, int lane_index) {
  return (lane_index - 0.5) * config.lane_width;
}

namespace {

// Cubic smoothstep on [0, 1]: s(0)=0, s(1)=1, s'(0)=s'(1)=0, monotone.
double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }
double smoothstep_deriv(double u) { return 6.0 * u * (1.0 - u); }

}  // namespace

Trajectory generate_trajectory(TrajectoryKind kind, double speed_mps, double dt,
                               const RoadConfig& config,
                               std::pair<double, double> maneuver_window) {
  config.validate();
  if (!(speed_mps > 0.0)) throw ConfigError("trajectory: speed must be > 0");
  if (!(dt > 0.0)) throw ConfigError("trajectory: dt must be > 0");

  const double x0 = maneuver_window.first;
  const double x1 = maneuver_window.second;
  if (kind != TrajectoryKind::straight) {
    if (!(x0 >= 0.0 && x1 <= config.segment_length && x1 > x0))
      throw ConfigError("trajectory: maneuver window must lie inside the segment");
  }

  const double right = lane_center(config, 1);
  const double left = lane_center(config, config.lanes_per_direction);

  double y_from = right, y_to = right;
  if (kind == TrajectoryKind::lane_change_right_to_left) {
    y_from = right;
    y_to = left;
  } else if (kind == TrajectoryKind::lane_change_left_to_right) {
    y_from = left;
    y_to = right;
  }

  Trajectory traj;
  traj.kind = kind;
  traj.speed = speed_mps;
  traj.dt = dt;
  for (long k = 0;; ++k) {
    const double t = k * dt;
    const double x = speed_mps * t;
    if (x > config.segment_length + 1e-9) break;
    double y = y_from;
    double vy = 0.0;
    if (kind != TrajectoryKind::straight && x > x0) {
      if (x >= x1) {
        y = y_to;
      } else {
        const double u = (x - x0) / (x1 - x0);
        y = y_from + (y_to - y_from) * smoothstep(u);
        vy = (y_to - y_from) * smoothstep_deriv(u) * speed_mps / (x1 - x0);
      }
    }
    traj.samples.push_back({t, Vec2(x, y), Vec2(speed_mps, vy)});
  }
  return traj;
}

}  // namespace cv2xloca::scenario
