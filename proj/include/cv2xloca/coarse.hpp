#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cv2xloca/conic.hpp"
#include "cv2xloca/dataproc.hpp"

namespace cv2xloca::coarse {

using Vec2 = Eigen::Vector2d;

// Convex penalty applied to the per-RSU residual vector. Chebyshev (max) is
// the default and the only penalty with full pipeline support; lp with p = 1
// (plain sum) is provided as the extension hook.
enum class PenaltyKind { chebyshev, lp };

struct Penalty {
  PenaltyKind kind = PenaltyKind::chebyshev;
  double p = 1.0;
};

struct EstimatorInputs {
  dataproc::MatchedEpoch epoch;
  double p0 = -30.0;
  double d0 = 1.0;
  std::vector<double> gamma_per_rsu;  // aligned with epoch.entries
  Penalty penalty{};

  void validate() const;
};

// Squared range proxy recovered from one power reading:
//   beta^2 = d0^2 * 10^((power - p0) / (5 gamma))
// Noise-free readings give beta^2 equal to the true squared distance.
double beta_squared(double power_dbm, double p0, double gamma, double d0);

// max(||theta - phi||^2 / beta^2, beta^2 / ||theta - phi||^2); >= 1 with
// equality exactly when beta^2 matches the squared distance.
double residual_tilde(const Vec2& theta, const Vec2& phi, double beta2);

// Penalty over the residual vector (Chebyshev: worst residual ratio).
double nonconvex_objective(const Vec2& theta, const EstimatorInputs& inputs);

// Relaxed problem over (theta, X, mu):
//   minimize f(mu)
//   s.t.  tr(X) - 2 phi_i' theta + k_i <= beta_i^2 mu_i          (N affine)
//         [[tr(X) - 2 phi_i' theta + k_i, beta_i], [beta_i, mu_i]] >= 0
//                                                                (N 2x2 LMIs)
//         [[X, theta], [theta', 1]] >= 0                         (one 3x3 LMI)
// with k_i = ||phi_i||^2. Internally the data is translated to the RSU
// centroid and scaled by a typical range so the solver sees O(1) entries; the
// transform is recorded and solutions are mapped back to the road frame.
struct SdpProblem {
  conic::Problem problem;  // normalized frame
  Vec2 shift{0.0, 0.0};
  double scale = 1.0;
  int n_rsus = 0;
  Penalty penalty{};
  std::vector<Vec2> phi;       // road frame
  std::vector<double> beta2;   // road frame
  int n_affine = 0, n_lmi2 = 0, n_lmi3 = 0;

  int theta_index() const { return 0; }
  int x_index() const { return 2; }           // X11, X21, X22
  int mu_index() const { return 5; }
  int epigraph_index() const { return 5 + n_rsus; }  // chebyshev only
};

SdpProblem build_sdp(const EstimatorInputs& inputs);

enum class SdpStatus { optimal, max_iter, infeasible };

struct SdpSolution {
  Vec2 theta_hat{0.0, 0.0};
  Eigen::Matrix2d x_hat = Eigen::Matrix2d::Zero();
  Eigen::VectorXd mu_hat;
  double objective = 0.0;  // f(mu_hat)
  double rank1_gap = 0.0;  // ||X_hat - theta_hat theta_hat'||_F
  SdpStatus status = SdpStatus::infeasible;
  int iterations = 0;
  double solver_gap = 0.0;
};

SdpSolution solve_sdp(const SdpProblem& problem, double tol = 1e-7, int max_iter = 100,
                      const conic::Backend* backend = nullptr);

// Worst constraint violation of a road-frame point (theta, X, mu) against the
// problem, measured in the normalized frame (negative margins clipped to 0).
double feasibility_violation(const SdpProblem& problem, const Vec2& theta,
                             const Eigen::Matrix2d& x, const Eigen::VectorXd& mu);

struct PositionFix {
  Vec2 theta_hat{0.0, 0.0};
  double objective = 0.0;
  double rank1_gap = 0.0;
  SdpStatus status = SdpStatus::infeasible;
  double geometry_svmin = 0.0;  // smallest singular value of centered RSU coordinates
};

// build_sdp + solve_sdp. theta_hat is returned as-is even when the rank-1 gap
// is large; the gap and the RSU-geometry conditioning are reported alongside.
PositionFix coarse_fix(const EstimatorInputs& inputs, double tol = 1e-7, int max_iter = 100,
                       const conic::Backend* backend = nullptr);

struct Box2 {
  Vec2 lo{0.0, 0.0};
  Vec2 hi{0.0, 0.0};
};

// Exhaustive argmin of nonconvex_objective over a regular grid. Grid points
// coinciding with an RSU are skipped; ties break toward the smallest x, then
// smallest y. Scan order is fixed, so the result is deterministic in both the
// serial and the OpenMP path.
Vec2 grid_oracle(const EstimatorInputs& inputs, const Box2& bounds, double step);

}  // namespace cv2xloca::coarse
