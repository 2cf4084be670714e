#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cv2xloca/scenario.hpp"

namespace cv2xloca::plecal {

// One inter-RSU (anchor) power reading: receiver i heard transmitter l.
struct AnchorObservation {
  int rsu_id = 0;     // receiver
  int anchor_id = 0;  // transmitter
  double power = 0.0;
  Vec2 anchor_pos{0.0, 0.0};
};

struct GammaEstimate {
  int rsu_id = 0;
  double gamma_hat = 0.0;  // mean of per_anchor, clipped to [2, 6]
  std::vector<double> per_anchor;
  int n_anchors = 0;
  bool clipped = false;
};

double anchor_distance(const Vec2& phi_i, const Vec2& phi_l);

// Path-loss exponent from one anchor link, using the known geometric
// distance:  gamma = (P - p0) / (10 log10(d / d0)).
// Links with d within +-0.01 decades of d0 are excluded (the log10 divisor
// would vanish); exclusion is reported as nullopt.
std::optional<double> estimate_gamma_pair(const AnchorObservation& obs, double p0, double d0,
                                          const Vec2& phi_i);

// Mean of the usable pair estimates, clipped to the physical [2, 6] range.
// Returns nullopt when no anchor link survives the guards; the caller falls
// back to its configured exponent.
std::optional<GammaEstimate> estimate_gamma(int rsu_id,
                                            std::span<const AnchorObservation> observations,
                                            double p0, double d0, const Vec2& phi_i);

// Lower bound on the variance of any unbiased RSS distance estimator:
//   (sigma * d * ln 10 / (10 gamma))^2
double crlb_distance_variance(double sigma, double d, double gamma);

// Range inverted from one power reading: d0 * 10^((power - p0) / (10 gamma)).
// With exp_bias_correction the estimate is additionally multiplied by
// exp(-10 gamma / (sigma ln 10)); this variant is off by default and unused
// by the pipeline.
double biased_distance_estimate(double power, double p0, double d0, double gamma,
                                bool exp_bias_correction = false, double sigma = 0.0);

}  // namespace cv2xloca::plecal
