#pragma once

#include <span>

#include "cv2xloca/coarse.hpp"

namespace cv2xloca::baselines {

using Vec2 = Eigen::Vector2d;
using coarse::EstimatorInputs;

enum class Method { ml_true, wcl, lls, wlls };

struct BaselineFix {
  Method method = Method::ml_true;
  Vec2 theta_hat{0.0, 0.0};
  int iterations = 0;
  bool converged = false;
};

// Gauss-Newton on the squared log-model residuals. The experimental
// convention initializes at the true position (oracle-initialized); callers
// pass whatever init they want. Backtracking keeps every accepted step a
// descent step; singular normal equations end the iteration with
// converged = false.
BaselineFix ml_true(const EstimatorInputs& inputs, const Vec2& init, int max_iter = 50,
                    double tol = 1e-10);

// Weighted centroid with weights 1 / estimated range.
BaselineFix wcl(const EstimatorInputs& inputs);

// Linearized range positioning: subtract the strongest-power anchor's circle
// equation, solve the resulting linear system. Collinear anchors are flagged
// via the condition of the coefficient matrix.
BaselineFix lls(const EstimatorInputs& inputs);

// Same linearization with per-row weights (wlls_crlb weights rows by the
// inverse distance-estimator variance bound at the estimated ranges).
BaselineFix wlls(const EstimatorInputs& inputs, std::span<const double> weights);
BaselineFix wlls_crlb(const EstimatorInputs& inputs, double sigma);

}  // namespace cv2xloca::baselines
