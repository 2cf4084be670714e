#include "cv2xloca/conic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "cv2xloca/errors.hpp"

namespace cv2xloca::conic {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxPsdOrder = 8;  // dense desk-scale blocks

// Stack-backed block matrix: the per-iteration block algebra must not touch
// the heap (it dominates the solve time at these sizes).
using BlockMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxPsdOrder,
                               kMaxPsdOrder>;
}  // namespace

int svec_dim(int order) { return order * (order + 1) / 2; }

int svec_order(int dim) {
  int p = static_cast<int>(std::round((std::sqrt(8.0 * dim + 1.0) - 1.0) / 2.0));
  if (svec_dim(p) != dim) throw DomainError("svec_order: not a triangular dimension");
  return p;
}

namespace {

void smat_into(const double* v, int p, BlockMat& out) {
  out.resize(p, p);
  int idx = 0;
  for (int j = 0; j < p; ++j)
    for (int i = j; i < p; ++i) {
      const double x = (i == j) ? v[idx] : v[idx] * (1.0 / M_SQRT2);
      out(i, j) = x;
      out(j, i) = x;
      ++idx;
    }
}

void svec_into(const BlockMat& m, double* out) {
  const int p = static_cast<int>(m.rows());
  int idx = 0;
  for (int j = 0; j < p; ++j)
    for (int i = j; i < p; ++i) out[idx++] = (i == j) ? m(i, j) : M_SQRT2 * m(i, j);
}

}  // namespace

Eigen::VectorXd svec(const Eigen::MatrixXd& a) {
  const int p = static_cast<int>(a.rows());
  Eigen::VectorXd v(svec_dim(p));
  int idx = 0;
  for (int j = 0; j < p; ++j)
    for (int i = j; i < p; ++i) v[idx++] = (i == j) ? a(i, j) : M_SQRT2 * a(i, j);
  return v;
}

Eigen::MatrixXd smat(const Eigen::VectorXd& v) {
  const int p = svec_order(static_cast<int>(v.size()));
  Eigen::MatrixXd a(p, p);
  int idx = 0;
  for (int j = 0; j < p; ++j)
    for (int i = j; i < p; ++i) {
      const double x = (i == j) ? v[idx] : v[idx] / M_SQRT2;
      a(i, j) = x;
      a(j, i) = x;
      ++idx;
    }
  return a;
}

int ConeSpec::dim() const {
  int d = nonneg;
  for (int p : psd) d += svec_dim(p);
  return d;
}

double ConeSpec::degree() const {
  double d = nonneg;
  for (int p : psd) d += p;
  return d;
}

namespace {

struct Block {
  bool is_psd;
  int offset;
  int order;  // LP: entry count
  int size;   // svec length (== order for LP)
};

std::vector<Block> layout(const ConeSpec& cone) {
  std::vector<Block> blocks;
  int off = 0;
  if (cone.nonneg > 0) {
    blocks.push_back({false, off, cone.nonneg, cone.nonneg});
    off += cone.nonneg;
  }
  for (int p : cone.psd) {
    if (p < 1 || p > kMaxPsdOrder) throw DomainError("conic: PSD order outside supported range");
    blocks.push_back({true, off, p, svec_dim(p)});
    off += svec_dim(p);
  }
  return blocks;
}

Eigen::VectorXd cone_identity(const std::vector<Block>& blocks, int dim) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
  for (const auto& b : blocks) {
    if (!b.is_psd) {
      e.segment(b.offset, b.size).setOnes();
    } else {
      int idx = b.offset;
      for (int j = 0; j < b.order; ++j) {
        e[idx] = 1.0;
        idx += b.order - j;
      }
    }
  }
  return e;
}

// Nesterov-Todd scaling point. For each PSD block the factor T satisfies
// T' Z T = inv(T) S inv(T)' = diag(lambda); for the orthant w = sqrt(s/z).
// The Cholesky factors of S and Z are kept for the line search.
struct Scaling {
  Eigen::ArrayXd w;
  std::vector<BlockMat> t, t_inv, chol_s, chol_z;
  Eigen::VectorXd lambda;

  bool compute(const std::vector<Block>& blocks, const Eigen::VectorXd& s,
               const Eigen::VectorXd& z) {
    lambda.resize(s.size());
    t.clear();
    t_inv.clear();
    chol_s.clear();
    chol_z.clear();
    for (const auto& b : blocks) {
      if (!b.is_psd) {
        w.resize(b.size);
        for (int i = 0; i < b.size; ++i) {
          const double si = s[b.offset + i], zi = z[b.offset + i];
          if (!(si > 0.0) || !(zi > 0.0)) return false;
          w[i] = std::sqrt(si / zi);
          lambda[b.offset + i] = std::sqrt(si * zi);
        }
      } else {
        BlockMat sm, zm;
        smat_into(s.data() + b.offset, b.order, sm);
        smat_into(z.data() + b.offset, b.order, zm);
        Eigen::LLT<BlockMat> ls(sm), lz(zm);
        if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
        const BlockMat lsm = ls.matrixL();
        const BlockMat lzm = lz.matrixL();
        const BlockMat prod = lzm.transpose() * lsm;
        Eigen::JacobiSVD<BlockMat> svd(prod, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto& sig = svd.singularValues();
        if (!(sig.minCoeff() > 0.0) || !sig.allFinite()) return false;
        const auto sig_isqrt = sig.array().sqrt().inverse().matrix();
        t.emplace_back(lsm * svd.matrixV() * sig_isqrt.asDiagonal());
        t_inv.emplace_back(sig_isqrt.asDiagonal() * svd.matrixU().transpose() * lzm.transpose());
        chol_s.push_back(lsm);
        chol_z.push_back(lzm);
        Eigen::Map<Eigen::VectorXd> lam(lambda.data() + b.offset, b.size);
        lam.setZero();
        int idx = 0;
        for (int j = 0; j < b.order; ++j) {
          lam[idx] = sig[j];
          idx += b.order - j;
        }
      }
    }
    return lambda.allFinite();
  }
};

class Ops {
 public:
  Ops(const std::vector<Block>& blocks, const Scaling& sc) : blocks_(blocks), sc_(sc) {}

  enum class Kind { w, wt, wt_inv, w_inv };

  // W z = T' Z T;  W' v = T V T';  inv(W') s = Tinv S Tinv';  inv(W) v =
  // Tinv' V Tinv. On the orthant all four are diagonal (multiply or divide
  // by w).
  void apply(Kind kind, const Eigen::VectorXd& v, Eigen::Ref<Eigen::VectorXd> out) const {
    int psd_idx = 0;
    BlockMat m, r;
    for (const auto& b : blocks_) {
      if (!b.is_psd) {
        const auto seg = v.segment(b.offset, b.size).array();
        if (kind == Kind::w || kind == Kind::wt)
          out.segment(b.offset, b.size) = (seg * sc_.w).matrix();
        else
          out.segment(b.offset, b.size) = (seg / sc_.w).matrix();
      } else {
        const BlockMat& f = (kind == Kind::w || kind == Kind::wt) ? sc_.t[psd_idx]
                                                                  : sc_.t_inv[psd_idx];
        smat_into(v.data() + b.offset, b.order, m);
        switch (kind) {
          case Kind::w: r = f.transpose() * m * f; break;
          case Kind::wt: r = f * m * f.transpose(); break;
          case Kind::wt_inv: r = f * m * f.transpose(); break;
          case Kind::w_inv: r = f.transpose() * m * f; break;
        }
        svec_into(r, out.data() + b.offset);
        ++psd_idx;
      }
    }
  }

  Eigen::VectorXd apply(Kind kind, const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(v.size());
    apply(kind, v, out);
    return out;
  }

  // Jordan product in the scaled space.
  Eigen::VectorXd circ(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    Eigen::VectorXd out(a.size());
    BlockMat am, bm, r;
    for (const auto& blk : blocks_) {
      if (!blk.is_psd) {
        out.segment(blk.offset, blk.size) = (a.segment(blk.offset, blk.size).array() *
                                             b.segment(blk.offset, blk.size).array())
                                                .matrix();
      } else {
        smat_into(a.data() + blk.offset, blk.order, am);
        smat_into(b.data() + blk.offset, blk.order, bm);
        r = 0.5 * (am * bm + bm * am);
        svec_into(r, out.data() + blk.offset);
      }
    }
    return out;
  }

  // Solves lambda o u = d for u, with lambda the (diagonal) scaled point.
  Eigen::VectorXd lambda_circ_solve(const Eigen::VectorXd& d) const {
    Eigen::VectorXd out(d.size());
    BlockMat dm;
    for (const auto& b : blocks_) {
      if (!b.is_psd) {
        out.segment(b.offset, b.size) = (d.segment(b.offset, b.size).array() /
                                         sc_.lambda.segment(b.offset, b.size).array())
                                            .matrix();
      } else {
        smat_into(d.data() + b.offset, b.order, dm);
        Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxPsdOrder, 1> diag(b.order);
        int idx = b.offset;
        for (int j = 0; j < b.order; ++j) {
          diag[j] = sc_.lambda[idx];
          idx += b.order - j;
        }
        for (int i = 0; i < b.order; ++i)
          for (int j = 0; j < b.order; ++j) dm(i, j) /= 0.5 * (diag[i] + diag[j]);
        svec_into(dm, out.data() + b.offset);
      }
    }
    return out;
  }

  // Largest alpha >= 0 with u + alpha du still in the cone (inf if
  // unbounded). `which` reuses the Cholesky factor cached by the scaling.
  enum class Var { s, z };
  double max_step(Var which, const Eigen::VectorXd& u, const Eigen::VectorXd& du) const {
    double alpha = kInf;
    BlockMat dum;
    int psd_idx = 0;
    for (const auto& b : blocks_) {
      if (!b.is_psd) {
        for (int i = 0; i < b.size; ++i) {
          const double d = du[b.offset + i];
          if (d < 0.0) alpha = std::min(alpha, -u[b.offset + i] / d);
        }
      } else {
        smat_into(du.data() + b.offset, b.order, dum);
        const BlockMat& l = (which == Var::s) ? sc_.chol_s[psd_idx] : sc_.chol_z[psd_idx];
        BlockMat m = l.triangularView<Eigen::Lower>().solve(dum);
        BlockMat mt = m.transpose();
        m = l.triangularView<Eigen::Lower>().solve(mt);
        const BlockMat sym = 0.5 * (m + m.transpose());
        const double lo = min_eigenvalue(sym);
        if (lo < 0.0) alpha = std::min(alpha, -1.0 / lo);
        ++psd_idx;
      }
    }
    return alpha;
  }

 private:
  static double min_eigenvalue(const BlockMat& sym) {
    if (sym.rows() == 2) {
      const double mean = 0.5 * (sym(0, 0) + sym(1, 1));
      const double diff = 0.5 * (sym(0, 0) - sym(1, 1));
      return mean - std::sqrt(diff * diff + sym(0, 1) * sym(0, 1));
    }
    Eigen::SelfAdjointEigenSolver<BlockMat> eig(sym, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
  }

 public:

 private:
  const std::vector<Block>& blocks_;
  const Scaling& sc_;
};

double step_pos(double u, double du) { return du < 0.0 ? -u / du : kInf; }

}  // namespace

Result InteriorPointSolver::solve(const Problem& prob, const Options& opt) const {
  const int n = static_cast<int>(prob.c.size());
  const int k = prob.cone.dim();
  if (prob.G.rows() != k || prob.G.cols() != n || prob.h.size() != k || n < 1 || k < 1)
    throw DomainError("conic: inconsistent problem dimensions");

  const auto blocks = layout(prob.cone);
  const Eigen::VectorXd e = cone_identity(blocks, k);
  const double nu = prob.cone.degree();

  const Eigen::MatrixXd& G = prob.G;
  const Eigen::VectorXd& c = prob.c;
  const Eigen::VectorXd& h = prob.h;
  const double hnorm = std::max(1.0, h.norm());
  const double cnorm = std::max(1.0, c.norm());
  const double gnorm = std::max(1.0, G.norm());

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd s = e, z = e;
  double tau = 1.0, kappa = 1.0;

  // Best (by worst convergence measure) scaled iterate seen so far; a final
  // step at the numerical floor must not degrade what is returned.
  Eigen::VectorXd best_x = x, best_s = s, best_z = z;
  double best_tau = tau, best_measure = std::numeric_limits<double>::infinity();

  Result res;
  const auto snapshot = [&](Status status, int iter) {
    res.status = status;
    res.iterations = iter;
    const double t = std::max(best_tau, 1e-300);
    res.x = best_x / t;
    res.s = best_s / t;
    res.z = best_z / t;
    res.primal_obj = c.dot(res.x);
    res.dual_obj = -h.dot(res.z);
    res.gap = res.s.dot(res.z);
    res.primal_res = (G * res.x + res.s - h).norm() / hnorm;
    res.dual_res = (G.transpose() * res.z + c).norm() / cnorm;
    return res;
  };

  Scaling sc;
  Eigen::MatrixXd Gs(k, n);
  for (int iter = 0; iter <= opt.max_iter; ++iter) {
    const Eigen::VectorXd rx = G.transpose() * z + c * tau;
    const Eigen::VectorXd rz = s + G * x - h * tau;
    const double rtau = kappa + c.dot(x) + h.dot(z);
    const double mu = (s.dot(z) + tau * kappa) / (nu + 1.0);
    if (!std::isfinite(mu) || tau <= 0.0 || kappa < 0.0) return snapshot(Status::failed, iter);

    {  // convergence of the scaled iterate: rz/tau and rx/tau ARE its residuals
      const double pobj = c.dot(x) / tau;
      const double dobj = -h.dot(z) / tau;
      const double gap = s.dot(z) / (tau * tau);
      const double pres = rz.norm() / (tau * hnorm);
      const double dres = rx.norm() / (tau * cnorm);
      const double relgap = gap / std::max({1.0, std::abs(pobj), std::abs(dobj)});
      const double measure = std::max({pres, dres, relgap});
      if (measure < best_measure) {
        best_measure = measure;
        best_x = x;
        best_s = s;
        best_z = z;
        best_tau = tau;
      }
#ifdef CONIC_TRACE
      std::printf("it %2d mu=%9.2e pres=%9.2e dres=%9.2e gap=%9.2e tau=%9.2e kappa=%9.2e\n",
                  iter, mu, pres, dres, relgap, tau, kappa);
#endif
      if (best_measure <= opt.tol) return snapshot(Status::optimal, iter);
    }

    {  // infeasibility certificates
      const double hz = h.dot(z);
      const double cx = c.dot(x);
      if (hz < 0.0 && (G.transpose() * z).norm() * hnorm <= -hz * opt.tol * gnorm) {
        res = snapshot(Status::primal_infeasible, iter);
        res.z = z / (-hz);  // Farkas certificate: G'z ~ 0, h'z = -1, z in K
        return res;
      }
      if (cx < 0.0 && (G * x + s).norm() * cnorm <= -cx * opt.tol * gnorm) {
        res = snapshot(Status::dual_infeasible, iter);
        res.x = x / (-cx);  // unboundedness certificate: Gx + s ~ 0, c'x = -1
        res.s = s / (-cx);
        return res;
      }
    }

    if (iter == opt.max_iter) break;

    if (!sc.compute(blocks, s, z)) return snapshot(Status::max_iter, iter);
    const Ops ops(blocks, sc);

    // Half-scaled KKT reduction: with Gs = inv(W') G the Schur complement is
    // the Gram matrix Gs' Gs, and every solve applies only single scaling
    // factors (condition sqrt of the full NT metric's).
    for (int j = 0; j < n; ++j) ops.apply(Ops::Kind::wt_inv, G.col(j), Gs.col(j));
    Eigen::MatrixXd M = Gs.transpose() * Gs;
    M = 0.5 * (M + M.transpose()).eval();
    Eigen::LLT<Eigen::MatrixXd> llt;
    for (double r : {0.0, 1e-12, 1e-9, 1e-6}) {
      llt.compute(M + (r * std::max(1.0, M.trace() / n)) * Eigen::MatrixXd::Identity(n, n));
      if (llt.info() == Eigen::Success) break;
    }
    if (llt.info() != Eigen::Success) return snapshot(Status::max_iter, iter);

    // Refinement matters only once the NT metric is strongly ill-conditioned;
    // early centering steps are fine with a single pass.
    const bool refine = mu < 1e-4;

    // Solves  G'z = a,  Gx - W'Wz = b.
    const auto kkt_solve = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                               Eigen::VectorXd& xo, Eigen::VectorXd& zo) {
      const auto pass = [&](const Eigen::VectorXd& ra, const Eigen::VectorXd& rb,
                            Eigen::VectorXd& dx, Eigen::VectorXd& dz) {
        const Eigen::VectorXd wb = ops.apply(Ops::Kind::wt_inv, rb);
        dx = llt.solve(ra + Gs.transpose() * wb);
        dz = ops.apply(Ops::Kind::w_inv, Gs * dx - wb);
      };
      pass(a, b, xo, zo);
      if (!refine) return;
      const Eigen::VectorXd ra = a - G.transpose() * zo;
      const Eigen::VectorXd rb =
          b - (G * xo - ops.apply(Ops::Kind::wt, ops.apply(Ops::Kind::w, zo)));
      Eigen::VectorXd dx, dz;
      pass(ra, rb, dx, dz);
      xo += dx;
      zo += dz;
    };

    Eigen::VectorXd x1(n), z1(k), x2(n), z2(k);
    kkt_solve(-c, h, x1, z1);
    const double den = c.dot(x1) + h.dot(z1) - kappa / tau;  // = -||W z1||^2 - kappa/tau
    if (!std::isfinite(den) || den >= 0.0) return snapshot(Status::max_iter, iter);

    // Predictor: full residual reduction, zero centering.
    kkt_solve(-rx, -rz + s, x2, z2);  // -rz - W'(-lambda) since W'lambda = s
    const double dtau_aff = (-rtau + kappa - c.dot(x2) - h.dot(z2)) / den;
    const Eigen::VectorXd dx_aff = x2 + dtau_aff * x1;
    const Eigen::VectorXd dz_aff = z2 + dtau_aff * z1;
    const Eigen::VectorXd ds_aff =
        -s - ops.apply(Ops::Kind::wt, ops.apply(Ops::Kind::w, dz_aff));
    const double dkappa_aff = -kappa - (kappa / tau) * dtau_aff;

    const double alpha_aff =
        std::min({1.0, ops.max_step(Ops::Var::s, s, ds_aff), ops.max_step(Ops::Var::z, z, dz_aff),
                  step_pos(tau, dtau_aff), step_pos(kappa, dkappa_aff)});
    const double mu_aff = ((s + alpha_aff * ds_aff).dot(z + alpha_aff * dz_aff) +
                           (tau + alpha_aff * dtau_aff) * (kappa + alpha_aff * dkappa_aff)) /
                          (nu + 1.0);
    const double sigma = std::clamp(std::pow(std::max(0.0, mu_aff / mu), 3.0), 0.0, 1.0);

    // Combined direction with Mehrotra second-order correction.
    const Eigen::VectorXd corr =
        ops.circ(ops.apply(Ops::Kind::wt_inv, ds_aff), ops.apply(Ops::Kind::w, dz_aff));
    const Eigen::VectorXd d_lambda = sigma * mu * e - ops.circ(sc.lambda, sc.lambda) - corr;
    const Eigen::VectorXd ds_scaled = ops.lambda_circ_solve(d_lambda);
    const double dkap_rhs = sigma * mu - tau * kappa - dtau_aff * dkappa_aff;

    kkt_solve(-(1.0 - sigma) * rx,
              -(1.0 - sigma) * rz - ops.apply(Ops::Kind::wt, ds_scaled), x2, z2);
    const double dtau = (-(1.0 - sigma) * rtau - dkap_rhs / tau - c.dot(x2) - h.dot(z2)) / den;
    const Eigen::VectorXd dx = x2 + dtau * x1;
    const Eigen::VectorXd dz = z2 + dtau * z1;
    const Eigen::VectorXd ds =
        ops.apply(Ops::Kind::wt, ds_scaled - ops.apply(Ops::Kind::w, dz));
    const double dkappa = (dkap_rhs - kappa * dtau) / tau;

    const double bound =
        std::min({ops.max_step(Ops::Var::s, s, ds), ops.max_step(Ops::Var::z, z, dz),
                  step_pos(tau, dtau), step_pos(kappa, dkappa)});
    const double alpha = std::min(1.0, opt.step_scale * bound);
    if (!(alpha > 1e-13)) return snapshot(Status::max_iter, iter);

    x += alpha * dx;
    s += alpha * ds;
    z += alpha * dz;
    tau += alpha * dtau;
    kappa += alpha * dkappa;
  }
  return snapshot(Status::max_iter, opt.max_iter);
}

Result solve(const Problem& problem, const Options& options) {
  return InteriorPointSolver{}.solve(problem, options);
}

}  // namespace cv2xloca::conic
