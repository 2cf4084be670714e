#include "cv2xloca/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cv2xloca/errors.hpp"
#include "cv2xloca/plecal.hpp"

namespace cv2xloca::baselines {

namespace {

struct Ranges {
  std::vector<Vec2> phi;
  std::vector<double> d_hat;   // estimated ranges
  std::vector<double> gamma;
  std::vector<double> power;
};

Ranges unpack(const EstimatorInputs& in, std::size_t min_entries) {
  if (in.epoch.entries.size() < min_entries)
    throw DomainError("baseline: too few RSUs in the epoch");
  if (in.gamma_per_rsu.size() != in.epoch.entries.size())
    throw ConfigError("baseline: gamma_per_rsu must align with epoch entries");
  Ranges r;
  for (std::size_t i = 0; i < in.epoch.entries.size(); ++i) {
    r.phi.push_back(in.epoch.entries[i].first.position);
    r.power.push_back(in.epoch.entries[i].second);
    r.gamma.push_back(in.gamma_per_rsu[i]);
    r.d_hat.push_back(
        plecal::biased_distance_estimate(r.power.back(), in.p0, in.d0, r.gamma.back()));
  }
  return r;
}

double log_model_objective(const Vec2& theta, const Ranges& r, const EstimatorInputs& in) {
  double obj = 0.0;
  for (std::size_t i = 0; i < r.phi.size(); ++i) {
    const double d = (theta - r.phi[i]).norm();
    const double resid =
        10.0 * r.gamma[i] * std::log10(std::max(d, 1e-12) / in.d0) - (r.power[i] - in.p0);
    obj += resid * resid;
  }
  return obj;
}

BaselineFix linearized_ls(const EstimatorInputs& in, std::span<const double> weights,
                          Method method) {
  const Ranges r = unpack(in, 3);
  const int n = static_cast<int>(r.phi.size());
  if (!weights.empty() && static_cast<int>(weights.size()) != n)
    throw ConfigError("baseline: weight count must match epoch entries");

  // Reference anchor: strongest power (most reliable range).
  int ref = 0;
  for (int i = 1; i < n; ++i)
    if (r.power[i] > r.power[ref]) ref = i;

  Eigen::MatrixXd a(n - 1, 2);
  Eigen::VectorXd b(n - 1);
  int row = 0;
  const double k_ref = r.phi[ref].squaredNorm();
  const double d2_ref = r.d_hat[ref] * r.d_hat[ref];
  for (int i = 0; i < n; ++i) {
    if (i == ref) continue;
    const double w = weights.empty() ? 1.0 : std::sqrt(std::max(weights[i], 0.0));
    a.row(row) = w * 2.0 * (r.phi[i] - r.phi[ref]).transpose();
    b[row] = w * (r.phi[i].squaredNorm() - k_ref - r.d_hat[i] * r.d_hat[i] + d2_ref);
    ++row;
  }

  BaselineFix fix;
  fix.method = method;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() < 2 || sv[1] <= 1e-9 * sv[0]) {
    fix.converged = false;  // collinear anchors
    return fix;
  }
  fix.theta_hat = svd.solve(b);
  fix.converged = fix.theta_hat.allFinite();
  return fix;
}

}  // namespace

BaselineFix ml_true(const EstimatorInputs& in, const Vec2& init, int max_iter, double tol) {
  const Ranges r = unpack(in, 1);
  const int n = static_cast<int>(r.phi.size());

  BaselineFix fix;
  fix.method = Method::ml_true;
  Vec2 theta = init;
  double obj = log_model_objective(theta, r, in);
  constexpr double kLog10 = 2.302585092994046;

  for (int it = 0; it < max_iter; ++it) {
    Eigen::MatrixXd jac(n, 2);
    Eigen::VectorXd resid(n);
    for (int i = 0; i < n; ++i) {
      const Vec2 diff = theta - r.phi[i];
      const double d2 = std::max(diff.squaredNorm(), 1e-24);
      resid[i] = 10.0 * r.gamma[i] * std::log10(std::sqrt(d2) / in.d0) - (r.power[i] - in.p0);
      jac.row(i) = (10.0 * r.gamma[i] / (kLog10 * d2)) * diff.transpose();
    }
    const Eigen::Vector2d grad = jac.transpose() * resid;
    if (grad.norm() < tol) break;
    const Eigen::Matrix2d jtj = jac.transpose() * jac;
    if (std::abs(jtj.determinant()) < 1e-14 * std::max(1.0, jtj.trace() * jtj.trace())) {
      fix.converged = false;
      fix.theta_hat = theta;
      return fix;
    }
    Vec2 step = -jtj.ldlt().solve(grad);
    double t = 1.0;
    double next = log_model_objective(theta + t * step, r, in);
    int backtracks = 0;
    while (next > obj && backtracks < 30) {
      t *= 0.5;
      next = log_model_objective(theta + t * step, r, in);
      ++backtracks;
    }
    if (next > obj) break;  // no descent left
    theta += t * step;
    const double drop = obj - next;
    obj = next;
    fix.iterations = it + 1;
    if (drop < tol * std::max(1.0, obj) && t * step.norm() < 1e-9) break;
  }
  fix.theta_hat = theta;
  fix.converged = theta.allFinite();
  return fix;
}

BaselineFix wcl(const EstimatorInputs& in) {
  const Ranges r = unpack(in, 1);
  BaselineFix fix;
  fix.method = Method::wcl;
  double wsum = 0.0;
  Vec2 acc = Vec2::Zero();
  for (std::size_t i = 0; i < r.phi.size(); ++i) {
    const double w = 1.0 / std::max(r.d_hat[i], 1e-9);
    acc += w * r.phi[i];
    wsum += w;
  }
  fix.theta_hat = acc / wsum;
  fix.converged = true;
  return fix;
}

BaselineFix lls(const EstimatorInputs& in) { return linearized_ls(in, {}, Method::lls); }

BaselineFix wlls(const EstimatorInputs& in, std::span<const double> weights) {
  return linearized_ls(in, weights, Method::wlls);
}

BaselineFix wlls_crlb(const EstimatorInputs& in, double sigma) {
  const Ranges r = unpack(in, 3);
  std::vector<double> weights(r.phi.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double var = plecal::crlb_distance_variance(sigma, std::max(r.d_hat[i], in.d0),
                                                      r.gamma[i]);
    weights[i] = 1.0 / std::max(var, 1e-12);
  }
  return wlls(in, weights);
}

}  // namespace cv2xloca::baselines
