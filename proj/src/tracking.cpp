#include "cv2xloca/tracking.hpp"

#include <cmath>

#include "cv2xloca/errors.hpp"

namespace cv2xloca::tracking {

CvlcState cvlc_predict(const CvlcState& state, double dt) {
  if (!(dt > 0.0)) throw SequencingError("cvlc_predict: dt must be > 0");
  CvlcState out = state;
  out.x += state.vx * dt;
  out.y += state.vy * dt;
  return out;
}

namespace {

Eigen::Matrix4d transition(double dt) {
  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 1) = dt;
  f(2, 3) = dt;
  return f;
}

// Symmetric PSD square root; tiny negative eigenvalues from roundoff clip to
// zero so rank-deficient covariances (e.g. exactly observed positions) still
// yield a valid sigma spread.
Eigen::Matrix4d psd_sqrt(const Eigen::Matrix4d& p) {
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(p);
  Eigen::Vector4d d = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * d.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
}

struct SigmaSet {
  static constexpr int kCount = 9;  // 2n + 1, n = 4
  Eigen::Matrix<double, 4, kCount> points;
  double wm0, wc0, wi;
};

SigmaSet make_sigma(const Eigen::Vector4d& mean, const Eigen::Matrix4d& cov,
                    const UkfConfig& cfg) {
  constexpr int n = 4;
  const double lambda = cfg.alpha * cfg.alpha * (n + cfg.kappa) - n;
  SigmaSet s;
  s.wm0 = lambda / (n + lambda);
  s.wc0 = s.wm0 + 1.0 - cfg.alpha * cfg.alpha + cfg.beta;
  s.wi = 0.5 / (n + lambda);
  const Eigen::Matrix4d spread = std::sqrt(n + lambda) * psd_sqrt(cov);
  s.points.col(0) = mean;
  for (int i = 0; i < n; ++i) {
    s.points.col(1 + i) = mean + spread.col(i);
    s.points.col(1 + n + i) = mean - spread.col(i);
  }
  return s;
}

// Weighted sigma mean, anchored at the centre point: the mean weights sum to
// one, so mean = p0 + sum_i w_i (p_i - p0). The anchored form avoids the
// catastrophic cancellation of the raw weighted sum when the centre weight is
// large and negative (small alpha).
template <typename Derived>
Eigen::VectorXd sigma_mean(const Eigen::MatrixBase<Derived>& pts, double /*wm0*/, double wi) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(pts.rows());
  for (int i = 1; i < pts.cols(); ++i) m += wi * (pts.col(i) - pts.col(0));
  return pts.col(0) + m;
}

}  // namespace

TrackState ukf_init(const Vec2& first_fix, const Eigen::Matrix4d& z0, const UkfConfig& config) {
  if ((z0 - z0.transpose()).norm() > 1e-9) throw ConfigError("ukf_init: z0 must be symmetric");
  const Eigen::LLT<Eigen::Matrix4d> llt(z0);
  if (llt.info() != Eigen::Success)
    throw ConfigError("ukf_init: z0 must be positive-definite");

  TrackState track;
  track.mean = {first_fix.x(), 0.0, first_fix.y(), 0.0};
  track.covariance = z0;
  track.t = 0.0;
  track.q = config.q;
  track.r_meas = config.r_diag.head<2>().asDiagonal();
  track.low_confidence_inflation = config.low_confidence_inflation;
  track.config = config;
  return track;
}

TrackState ukf_step(const TrackState& track, const std::optional<coarse::PositionFix>& fix,
                    double dt) {
  if (!(dt > 0.0)) throw SequencingError("ukf_step: non-monotone timestamps (dt <= 0)");

  const UkfConfig& cfg = track.config;
  TrackState out = track;
  out.t = track.t + dt;

  // Track loss: enough consecutive misses, then a fix, restarts the track.
  if (fix && track.consecutive_missing >= cfg.reset_after_missing) {
    TrackState fresh = ukf_init(fix->theta_hat, cfg.z0, cfg);
    fresh.t = out.t;
    fresh.speed_clamps = track.speed_clamps;
    return fresh;
  }

  // Unscented predict through the (linear) CVLC dynamics.
  const Eigen::Matrix4d f = transition(dt);
  SigmaSet sig = make_sigma(track.mean.vec(), track.covariance, cfg);
  Eigen::Matrix<double, 4, SigmaSet::kCount> prop;
  for (int i = 0; i < SigmaSet::kCount; ++i) prop.col(i) = f * sig.points.col(i);
  const Eigen::Vector4d mean_pred = sigma_mean(prop, sig.wm0, sig.wi);
  Eigen::Matrix4d cov_pred = track.q;
  for (int i = 0; i < SigmaSet::kCount; ++i) {
    const Eigen::Vector4d d = prop.col(i) - mean_pred;
    cov_pred += (i == 0 ? sig.wc0 : sig.wi) * d * d.transpose();
  }
  cov_pred = 0.5 * (cov_pred + cov_pred.transpose()).eval();

  if (!fix) {
    out.mean = CvlcState::from(mean_pred);
    out.covariance = cov_pred;
    out.consecutive_missing = track.consecutive_missing + 1;
    return out;
  }

  // Position-only unscented update.
  const bool low_confidence = fix->status == coarse::SdpStatus::max_iter ||
                              fix->rank1_gap > cfg.rank1_gap_threshold;
  Eigen::Matrix2d r = track.r_meas;
  if (low_confidence) r *= track.low_confidence_inflation;

  const SigmaSet upd = make_sigma(mean_pred, cov_pred, cfg);
  Eigen::Matrix<double, 2, SigmaSet::kCount> zpts;
  for (int i = 0; i < SigmaSet::kCount; ++i)
    zpts.col(i) = Vec2(upd.points(0, i), upd.points(2, i));
  const Eigen::Vector2d z_pred = sigma_mean(zpts, upd.wm0, upd.wi);

  Eigen::Matrix2d s = r;
  Eigen::Matrix<double, 4, 2> cross = Eigen::Matrix<double, 4, 2>::Zero();
  for (int i = 0; i < SigmaSet::kCount; ++i) {
    const double w = (i == 0) ? upd.wc0 : upd.wi;
    const Eigen::Vector2d dz = zpts.col(i) - z_pred;
    s += w * dz * dz.transpose();
    cross += w * (upd.points.col(i) - mean_pred) * dz.transpose();
  }
  s = 0.5 * (s + s.transpose()).eval();
  // Keep the innovation solve well posed when both R and the position
  // covariance collapse (exactly consistent data).
  s += 1e-12 * std::max(1.0, s.trace()) * Eigen::Matrix2d::Identity();

  const Eigen::Matrix<double, 4, 2> gain = s.ldlt().solve(cross.transpose()).transpose();
  Eigen::Vector4d mean_new = mean_pred + gain * (fix->theta_hat - z_pred);
  Eigen::Matrix4d cov_new = cov_pred - gain * s * gain.transpose();
  cov_new = 0.5 * (cov_new + cov_new.transpose()).eval();

  for (int vi : {1, 3}) {
    if (std::abs(mean_new[vi]) > cfg.speed_cap) {
      mean_new[vi] = std::copysign(cfg.speed_cap, mean_new[vi]);
      out.speed_clamps++;
    }
  }
  if (!mean_new.allFinite()) throw DomainError("ukf_step: non-finite state");

  out.mean = CvlcState::from(mean_new);
  out.covariance = cov_new;
  out.consecutive_missing = 0;
  return out;
}

}  // namespace cv2xloca::tracking
