#pragma once

#include <Eigen/Dense>
#include <optional>

#include "cv2xloca/coarse.hpp"

namespace cv2xloca::tracking {

using Vec2 = Eigen::Vector2d;

// Constant-velocity lane-changing state. Component order matches the fix
// vector: state <- (fix[0], 0, fix[1], 0); position observation reads
// components 0 and 2.
struct CvlcState {
  double x = 0.0;
  double vx = 0.0;
  double y = 0.0;
  double vy = 0.0;

  Eigen::Vector4d vec() const { return {x, vx, y, vy}; }
  static CvlcState from(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }
};

CvlcState cvlc_predict(const CvlcState& state, double dt);

struct UkfConfig {
  Eigen::Matrix4d q = Eigen::Matrix4d::Identity();  // process noise per step
  Eigen::Vector4d r_diag{2.2, 1.2, 0.9, 0.5};       // leading 2x2 observes position
  Eigen::Matrix4d z0 =
      Eigen::Vector4d(0.25, 0.4, 0.2, 0.01).asDiagonal();  // initial covariance
  // Sigma-point spread (Van der Merwe parametrization). Unit spread keeps the
  // sigma sums exact for linear models; small alpha values are supported but
  // trade away ~6 digits to weight cancellation.
  double alpha = 1.0;
  double beta = 2.0;
  double kappa = 0.0;
  double low_confidence_inflation = 10.0;  // variance multiplier
  double rank1_gap_threshold = 200.0;      // m^2; larger gaps flag the fix
  int reset_after_missing = 10;
  double speed_cap = 70.0;  // m/s, physical sanity bound
};

struct TrackState {
  CvlcState mean;
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();
  double t = 0.0;
  Eigen::Matrix4d q = Eigen::Matrix4d::Identity();
  Eigen::Matrix2d r_meas = Eigen::Matrix2d::Zero();
  double low_confidence_inflation = 10.0;
  UkfConfig config{};
  int consecutive_missing = 0;
  long speed_clamps = 0;
};

// Starts a track at a first coarse fix with zero velocities and covariance z0.
TrackState ukf_init(const Vec2& first_fix, const Eigen::Matrix4d& z0,
                    const UkfConfig& config = {});

// One filter step of length dt: unscented predict through the CVLC dynamics,
// then a position-only update when a fix is present. Fixes flagged
// low-confidence (solver hit max_iter, or the rank-1 gap exceeds the
// threshold) update with inflated measurement covariance. A missing fix is a
// predict-only step; after reset_after_missing consecutive misses the track
// re-initializes on the next fix.
TrackState ukf_step(const TrackState& track, const std::optional<coarse::PositionFix>& fix,
                    double dt);

inline Vec2 filtered_position(const TrackState& track) { return {track.mean.x, track.mean.y}; }

}  // namespace cv2xloca::tracking
