#include "cv2xloca/coarse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cv2xloca/errors.hpp"

namespace cv2xloca::coarse {

void EstimatorInputs::validate() const {
  if (epoch.entries.size() < 3)
    throw DomainError("estimator: epoch must cover at least 3 RSUs");
  if (gamma_per_rsu.size() != epoch.entries.size())
    throw ConfigError("estimator: gamma_per_rsu must align with epoch entries");
  for (double g : gamma_per_rsu)
    if (!(g >= 2.0 && g <= 6.0)) throw ConfigError("estimator: gamma outside [2, 6]");
  if (!(d0 > 0.0)) throw ConfigError("estimator: d0 must be > 0");
  if (penalty.kind == PenaltyKind::lp && penalty.p != 1.0)
    throw ConfigError("estimator: only p = 1 is supported for the lp penalty");
}

double beta_squared(double power_dbm, double p0, double gamma, double d0) {
  if (!(gamma > 0.0)) throw DomainError("beta_squared: gamma must be > 0");
  if (!(d0 > 0.0)) throw DomainError("beta_squared: d0 must be > 0");
  return d0 * d0 * std::pow(10.0, (power_dbm - p0) / (5.0 * gamma));
}

double residual_tilde(const Vec2& theta, const Vec2& phi, double beta2) {
  if (!(beta2 > 0.0)) throw DomainError("residual_tilde: beta^2 must be > 0");
  const double d2 = (theta - phi).squaredNorm();
  if (d2 == 0.0) throw DomainError("residual_tilde: theta coincides with the RSU");
  return std::max(d2 / beta2, beta2 / d2);
}

namespace {

std::vector<double> beta2_of(const EstimatorInputs& in) {
  std::vector<double> b(in.epoch.entries.size());
  for (std::size_t i = 0; i < b.size(); ++i)
    b[i] = beta_squared(in.epoch.entries[i].second, in.p0, in.gamma_per_rsu[i], in.d0);
  return b;
}

double penalty_of(const Penalty& pen, const Eigen::VectorXd& r) {
  if (pen.kind == PenaltyKind::chebyshev) return r.maxCoeff();
  return r.sum();  // lp, p = 1
}

}  // namespace

double nonconvex_objective(const Vec2& theta, const EstimatorInputs& inputs) {
  const auto beta2 = beta2_of(inputs);
  Eigen::VectorXd r(static_cast<Eigen::Index>(beta2.size()));
  for (std::size_t i = 0; i < beta2.size(); ++i)
    r[static_cast<Eigen::Index>(i)] =
        residual_tilde(theta, inputs.epoch.entries[i].first.position, beta2[i]);
  return penalty_of(inputs.penalty, r);
}

SdpProblem build_sdp(const EstimatorInputs& inputs) {
  inputs.validate();
  const int n_rsus = static_cast<int>(inputs.epoch.entries.size());

  SdpProblem sp;
  sp.n_rsus = n_rsus;
  sp.penalty = inputs.penalty;
  sp.beta2 = beta2_of(inputs);
  sp.phi.reserve(n_rsus);
  for (const auto& [rsu, power] : inputs.epoch.entries) sp.phi.push_back(rsu.position);

  sp.shift.setZero();
  for (const auto& p : sp.phi) sp.shift += p;
  sp.shift /= n_rsus;
  double mean_b2 = 0.0;
  for (double b : sp.beta2) mean_b2 += b;
  mean_b2 /= n_rsus;
  sp.scale = std::clamp(std::sqrt(mean_b2), 1e-3, 1e9);

  const bool cheb = inputs.penalty.kind == PenaltyKind::chebyshev;
  const int n_vars = 5 + n_rsus + (cheb ? 1 : 0);
  const int lp_dim = cheb ? 2 * n_rsus : n_rsus;
  const int k = lp_dim + 3 * n_rsus + 6;

  auto& prob = sp.problem;
  prob.cone.nonneg = lp_dim;
  prob.cone.psd.assign(n_rsus, 2);
  prob.cone.psd.push_back(3);
  prob.c = Eigen::VectorXd::Zero(n_vars);
  prob.G = Eigen::MatrixXd::Zero(k, n_vars);
  prob.h = Eigen::VectorXd::Zero(k);

  const int i_theta = sp.theta_index();
  const int i_x = sp.x_index();
  const int i_mu = sp.mu_index();

  if (cheb) {
    prob.c[sp.epigraph_index()] = 1.0;
  } else {
    for (int i = 0; i < n_rsus; ++i) prob.c[i_mu + i] = 1.0;
  }

  for (int i = 0; i < n_rsus; ++i) {
    const Vec2 phi = (sp.phi[i] - sp.shift) / sp.scale;
    const double b2 = sp.beta2[i] / (sp.scale * sp.scale);
    const double ki = phi.squaredNorm();

    // affine: tr(X) - 2 phi' theta + k_i <= beta_i^2 mu_i
    prob.h[i] = -ki;
    prob.G(i, i_theta) = -2.0 * phi.x();
    prob.G(i, i_theta + 1) = -2.0 * phi.y();
    prob.G(i, i_x) = 1.0;
    prob.G(i, i_x + 2) = 1.0;
    prob.G(i, i_mu + i) = -b2;

    if (cheb) {  // epigraph: mu_i <= t
      prob.G(n_rsus + i, i_mu + i) = 1.0;
      prob.G(n_rsus + i, sp.epigraph_index()) = -1.0;
    }

    // 2x2 LMI: [[tr(X) - 2 phi' theta + k_i, beta_i], [beta_i, mu_i]] >= 0
    const int r0 = lp_dim + 3 * i;
    prob.h[r0] = ki;
    prob.G(r0, i_theta) = 2.0 * phi.x();
    prob.G(r0, i_theta + 1) = 2.0 * phi.y();
    prob.G(r0, i_x) = -1.0;
    prob.G(r0, i_x + 2) = -1.0;
    prob.h[r0 + 1] = M_SQRT2 * std::sqrt(b2);
    prob.G(r0 + 2, i_mu + i) = -1.0;
  }

  // 3x3 LMI: [[X, theta], [theta', 1]] >= 0
  const int r3 = lp_dim + 3 * n_rsus;
  prob.G(r3 + 0, i_x) = -1.0;
  prob.G(r3 + 1, i_x + 1) = -M_SQRT2;
  prob.G(r3 + 2, i_theta) = -M_SQRT2;
  prob.G(r3 + 3, i_x + 2) = -1.0;
  prob.G(r3 + 4, i_theta + 1) = -M_SQRT2;
  prob.h[r3 + 5] = 1.0;

  sp.n_affine = n_rsus;
  sp.n_lmi2 = n_rsus;
  sp.n_lmi3 = 1;
  return sp;
}

SdpSolution solve_sdp(const SdpProblem& sp, double tol, int max_iter,
                      const conic::Backend* backend) {
  conic::Options opt;
  opt.tol = tol;
  opt.max_iter = max_iter;
  const conic::InteriorPointSolver fallback;
  const conic::Backend& solver = backend ? *backend : fallback;
  const conic::Result res = solver.solve(sp.problem, opt);

  SdpSolution sol;
  sol.iterations = res.iterations;
  sol.solver_gap = res.gap;
  switch (res.status) {
    case conic::Status::optimal:
      sol.status = SdpStatus::optimal;
      break;
    case conic::Status::max_iter:
      sol.status = SdpStatus::max_iter;
      break;
    default:
      sol.status = SdpStatus::infeasible;
      break;
  }

  const int n = sp.n_rsus;
  const Eigen::VectorXd& x = res.x;
  if (x.size() < 5 + n) return sol;

  const Vec2 theta_n(x[sp.theta_index()], x[sp.theta_index() + 1]);
  Eigen::Matrix2d x_n;
  x_n << x[sp.x_index()], x[sp.x_index() + 1], x[sp.x_index() + 1], x[sp.x_index() + 2];

  sol.theta_hat = sp.scale * theta_n + sp.shift;
  sol.x_hat = sp.scale * sp.scale * x_n +
              sp.scale * (theta_n * sp.shift.transpose() + sp.shift * theta_n.transpose()) +
              sp.shift * sp.shift.transpose();
  sol.mu_hat = x.segment(sp.mu_index(), n);
  sol.objective = penalty_of(sp.penalty, sol.mu_hat);
  sol.rank1_gap = (sol.x_hat - sol.theta_hat * sol.theta_hat.transpose()).norm();
  return sol;
}

double feasibility_violation(const SdpProblem& sp, const Vec2& theta, const Eigen::Matrix2d& x,
                             const Eigen::VectorXd& mu) {
  const Vec2 tn = (theta - sp.shift) / sp.scale;
  const Eigen::Matrix2d xn =
      (x - theta * sp.shift.transpose() - sp.shift * theta.transpose() +
       sp.shift * sp.shift.transpose()) /
      (sp.scale * sp.scale);

  double worst = 0.0;
  for (int i = 0; i < sp.n_rsus; ++i) {
    const Vec2 phi = (sp.phi[i] - sp.shift) / sp.scale;
    const double b2 = sp.beta2[i] / (sp.scale * sp.scale);
    const double q = xn.trace() - 2.0 * phi.dot(tn) + phi.squaredNorm();
    worst = std::max(worst, q - b2 * mu[i]);
    Eigen::Matrix2d m;
    m << q, std::sqrt(b2), std::sqrt(b2), mu[i];
    worst = std::max(worst, -Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(m)
                                 .eigenvalues()
                                 .minCoeff());
  }
  Eigen::Matrix3d big;
  big << xn(0, 0), xn(0, 1), tn.x(), xn(1, 0), xn(1, 1), tn.y(), tn.x(), tn.y(), 1.0;
  worst = std::max(worst, -Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(big)
                               .eigenvalues()
                               .minCoeff());
  return worst;
}

PositionFix coarse_fix(const EstimatorInputs& inputs, double tol, int max_iter,
                       const conic::Backend* backend) {
  const SdpProblem sp = build_sdp(inputs);
  const SdpSolution sol = solve_sdp(sp, tol, max_iter, backend);

  Eigen::MatrixXd centered(sp.n_rsus, 2);
  Vec2 mean = Vec2::Zero();
  for (const auto& p : sp.phi) mean += p;
  mean /= sp.n_rsus;
  for (int i = 0; i < sp.n_rsus; ++i) centered.row(i) = (sp.phi[i] - mean).transpose();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);

  PositionFix fix;
  fix.theta_hat = sol.theta_hat;
  fix.objective = sol.objective;
  fix.rank1_gap = sol.rank1_gap;
  fix.status = sol.status;
  fix.geometry_svmin = svd.singularValues().minCoeff();
  return fix;
}

Vec2 grid_oracle(const EstimatorInputs& inputs, const Box2& bounds, double step) {
  inputs.validate();
  if (!(step > 0.0)) throw DomainError("grid_oracle: step must be > 0");
  const long nx = static_cast<long>(std::floor((bounds.hi.x() - bounds.lo.x()) / step + 1e-12)) + 1;
  const long ny = static_cast<long>(std::floor((bounds.hi.y() - bounds.lo.y()) / step + 1e-12)) + 1;
  if (nx < 1 || ny < 1) throw DomainError("grid_oracle: empty grid");

  const int n = static_cast<int>(inputs.epoch.entries.size());
  const auto beta2 = beta2_of(inputs);
  std::vector<Vec2> phi(n);
  for (int i = 0; i < n; ++i) phi[i] = inputs.epoch.entries[i].first.position;
  const bool cheb = inputs.penalty.kind == PenaltyKind::chebyshev;

  struct Best {
    double obj = std::numeric_limits<double>::infinity();
    long ix = -1, iy = -1;
  };
  const auto better = [](const Best& a, const Best& b) {
    if (a.obj != b.obj) return a.obj < b.obj;
    if (a.ix != b.ix) return a.ix < b.ix;
    return a.iy < b.iy;
  };

  Best global;
#pragma omp parallel
  {
    Best local;
#pragma omp for schedule(static) nowait
    for (long ix = 0; ix < nx; ++ix) {
      const double gx = bounds.lo.x() + ix * step;
      for (long iy = 0; iy < ny; ++iy) {
        const Vec2 gp(gx, bounds.lo.y() + iy * step);
        double obj = 0.0;
        bool skip = false;
        for (int i = 0; i < n; ++i) {
          const double d2 = (gp - phi[i]).squaredNorm();
          if (d2 == 0.0) {
            skip = true;
            break;
          }
          const double r = std::max(d2 / beta2[i], beta2[i] / d2);
          if (cheb) {
            obj = std::max(obj, r);
            if (obj >= local.obj) {
              skip = true;  // cannot beat the incumbent
              break;
            }
          } else {
            obj += r;
          }
        }
        if (skip) continue;
        const Best cand{obj, ix, iy};
        if (better(cand, local)) local = cand;
      }
    }
#pragma omp critical
    {
      if (better(local, global)) global = local;
    }
  }
  if (global.ix < 0) throw DomainError("grid_oracle: no evaluable grid point");
  return Vec2(bounds.lo.x() + global.ix * step, bounds.lo.y() + global.iy * step);
}

}  // namespace cv2xloca::coarse
