#include "cv2xloca/plecal.hpp"

#include <algorithm>
#include <cmath>

#include "cv2xloca/errors.hpp"

namespace cv2xloca::plecal {

double anchor_distance(const Vec2& phi_i, const Vec2& phi_l) {
  const double d = (phi_i - phi_l).norm();
  if (d == 0.0) throw DomainError("anchor_distance: identical RSU positions");
  return d;
}

std::optional<double> estimate_gamma_pair(const AnchorObservation& obs, double p0, double d0,
                                          const Vec2& phi_i) {
  if (!(d0 > 0.0)) throw DomainError("estimate_gamma_pair: d0 must be > 0");
  const double d = anchor_distance(phi_i, obs.anchor_pos);
  const double decades = std::log10(d / d0);
  if (std::abs(decades) < 0.01) return std::nullopt;  // division-by-near-zero guard
  return (obs.power - p0) / (10.0 * decades);
}

std::optional<GammaEstimate> estimate_gamma(int rsu_id,
                                            std::span<const AnchorObservation> observations,
                                            double p0, double d0, const Vec2& phi_i) {
  GammaEstimate est;
  est.rsu_id = rsu_id;
  for (const auto& obs : observations) {
    if (const auto g = estimate_gamma_pair(obs, p0, d0, phi_i)) est.per_anchor.push_back(*g);
  }
  if (est.per_anchor.empty()) return std::nullopt;
  est.n_anchors = static_cast<int>(est.per_anchor.size());
  double mean = 0.0;
  for (double g : est.per_anchor) mean += g;
  mean /= est.n_anchors;
  est.gamma_hat = std::clamp(mean, 2.0, 6.0);
  est.clipped = est.gamma_hat != mean;
  return est;
}

double crlb_distance_variance(double sigma, double d, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("crlb_distance_variance: gamma must be > 0");
  const double root = sigma * d * std::log(10.0) / (10.0 * gamma);
  return root * root;
}

double biased_distance_estimate(double power, double p0, double d0, double gamma,
                                bool exp_bias_correction, double sigma) {
  if (!(gamma > 0.0)) throw DomainError("biased_distance_estimate: gamma must be > 0");
  if (!(d0 > 0.0)) throw DomainError("biased_distance_estimate: d0 must be > 0");
  double d = d0 * std::pow(10.0, (power - p0) / (10.0 * gamma));
  if (exp_bias_correction) {
    if (!(sigma > 0.0))
      throw DomainError("biased_distance_estimate: correction needs sigma > 0");
    d *= std::exp(-10.0 * gamma / (sigma * std::log(10.0)));
  }
  return d;
}

}  // namespace cv2xloca::plecal
