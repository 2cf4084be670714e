#pragma once

#include <cmath>
#include <vector>

#include "cv2xloca/coarse.hpp"
#include "cv2xloca/random.hpp"
#include "cv2xloca/scenario.hpp"

namespace test_helpers {

using cv2xloca::RandomStream;
using cv2xloca::Vec2;
using cv2xloca::scenario::RsuNode;
using cv2xloca::scenario::RsuSide;

inline std::vector<RsuNode> triangle_rsus() {
  return {{0, Vec2(0.0, -1.0), RsuSide::near},
          {1, Vec2(60.0, 15.0), RsuSide::far},
          {2, Vec2(120.0, -1.0), RsuSide::near}};
}

// Epoch with powers drawn from the log-distance model at the given truth.
inline cv2xloca::coarse::EstimatorInputs make_epoch(const std::vector<RsuNode>& rsus,
                                                    const Vec2& truth, double gamma, double sigma,
                                                    RandomStream* rng, double p0 = -30.0,
                                                    double d0 = 1.0) {
  cv2xloca::coarse::EstimatorInputs in;
  in.p0 = p0;
  in.d0 = d0;
  in.epoch.mac = "test";
  in.epoch.t = 0.0;
  for (const auto& rsu : rsus) {
    const double d = std::max((truth - rsu.position).norm(), d0);
    double power = p0 + 10.0 * gamma * std::log10(d / d0);
    if (rng && sigma > 0.0) power += sigma * rng->gaussian();
    in.epoch.entries.emplace_back(rsu, power);
    in.gamma_per_rsu.push_back(gamma);
  }
  return in;
}

// Log-form objective (the pre-manipulation shape of the estimator): the worst
// absolute log-residual over RSUs. Used as the independent route in the
// monotone-equivalence checks.
inline double log_form_objective(const Vec2& theta,
                                 const cv2xloca::coarse::EstimatorInputs& in) {
  double worst = 0.0;
  for (std::size_t i = 0; i < in.epoch.entries.size(); ++i) {
    const auto& [rsu, power] = in.epoch.entries[i];
    const double d = (theta - rsu.position).norm();
    const double r =
        10.0 * in.gamma_per_rsu[i] * std::log10(d / in.d0) - (power - in.p0);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

}  // namespace test_helpers
