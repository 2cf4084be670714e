#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "cv2xloca/errors.hpp"

namespace cv2xloca {

using Vec2 = Eigen::Vector2d;

namespace scenario {

// Road frame: X runs longitudinally along the lanes, Y laterally across them,
// origin at the corner of the segment. The road occupies y in [0, dr3]; the
// simulated direction of travel uses the half adjacent to y = 0 and moves
// toward +X.
struct RoadConfig {
  double segment_length = 2000.0;
  double lane_width = 3.5;
  int lanes_per_direction = 2;
  double dr1 = 60.0;  // RSU deployment spacing along the road
  double dr2 = 1.0;   // RSU lateral offset outside the road edge
  double dr3 = 14.0;  // full road width, = 2 * lanes_per_direction * lane_width

  void validate() const;
};

inline RoadConfig make_road(double segment_length, double lane_width, int lanes_per_direction,
                            double dr1, double dr2) {
  RoadConfig r;
  r.segment_length = segment_length;
  r.lane_width = lane_width;
  r.lanes_per_direction = lanes_per_direction;
  r.dr1 = dr1;
  r.dr2 = dr2;
  r.dr3 = 2.0 * lanes_per_direction * lane_width;
  r.validate();
  return r;
}

enum class RsuSide { near, far };  // near: y = -dr2 edge, far: y = dr3 + dr2

enum class RsuLayout {
  alternating,  // one RSU per dr1 multiple, sides alternate
  paired,       // one RSU on each side at every dr1 multiple
};

struct RsuNode {
  int id = 0;
  Vec2 position{0.0, 0.0};
  RsuSide side = RsuSide::near;
};

// Places RSUs at longitudinal multiples of dr1, offset dr2 outside the road
// edges. Alternating layout yields floor(segment_length / dr1) + 1 nodes with
// adjacent nodes on opposite sides (same-side neighbours are 2 * dr1 apart);
// paired layout puts a node on both sides at every multiple.
std::vector<RsuNode> deploy_rsus(const RoadConfig& config,
                                 RsuLayout layout = RsuLayout::alternating);

enum class TrajectoryKind { straight, lane_change_right_to_left, lane_change_left_to_right };

struct TrajectorySample {
  double t = 0.0;
  Vec2 position{0.0, 0.0};
  Vec2 velocity{0.0, 0.0};
};

struct Trajectory {
  TrajectoryKind kind = TrajectoryKind::straight;
  double speed = 0.0;  // longitudinal, m/s, constant
  double dt = 0.1;
  std::vector<TrajectorySample> samples;
};

// Constant-speed trajectory along the simulated carriageway. The straight
// kind holds the right-lane centre; lane-change kinds blend laterally by one
// lane width across the maneuver window (cubic smoothstep: continuous
// position and lateral velocity, monotone in between). "Right" is the lane
// nearest y = 0.
Trajectory generate_trajectory(TrajectoryKind kind, double speed_mps, double dt,
                               const RoadConfig& config,
                               std::pair<double, double> maneuver_window = {400.0, 580.0});

// Lane centre of 1-based lane index for the simulated direction.
double lane_center(const RoadConfig& config, int lane_index);

}  // namespace scenario
}  // namespace cv2xloca
