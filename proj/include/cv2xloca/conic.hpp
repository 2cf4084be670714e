#pragma once

#include <Eigen/Dense>
#include <vector>

namespace cv2xloca::conic {

// Packed symmetric vectorization: lower triangle, column major, off-diagonal
// entries scaled by sqrt(2) so that dot(svec(A), svec(B)) == <A, B>_F.
int svec_dim(int order);
int svec_order(int dim);
Eigen::VectorXd svec(const Eigen::MatrixXd& a);
Eigen::MatrixXd smat(const Eigen::VectorXd& v);

// Product of a nonnegative orthant and dense PSD blocks, in that order.
struct ConeSpec {
  int nonneg = 0;
  std::vector<int> psd;  // block orders

  int dim() const;
  double degree() const;  // barrier degree: nonneg + sum of psd orders
};

// Cone program in inequality form:
//   minimize    c'x
//   subject to  h - G x in K
// with x free. PSD slices of G rows / h are svec-packed.
struct Problem {
  Eigen::VectorXd c;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  ConeSpec cone;
};

enum class Status { optimal, max_iter, primal_infeasible, dual_infeasible, failed };

struct Options {
  double tol = 1e-7;
  int max_iter = 100;
  double step_scale = 0.99;
};

struct Result {
  Status status = Status::failed;
  Eigen::VectorXd x, s, z;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;         // s'z of the returned (scaled) iterate
  double primal_res = 0.0;  // ||Gx + s - h|| / max(1, ||h||)
  double dual_res = 0.0;    // ||G'z + c|| / max(1, ||c||)
  int iterations = 0;
};

// Conic solver interface; alternates can be plugged in behind it.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual Result solve(const Problem& problem, const Options& options) const = 0;
};

// Dense primal-dual interior-point method on the homogeneous self-dual
// embedding: Nesterov-Todd scaling, Mehrotra predictor-corrector, direct
// solves of the Schur complement. Sized for small mixed cones (a handful of
// variables, low-order PSD blocks); everything is dense.
class InteriorPointSolver final : public Backend {
 public:
  Result solve(const Problem& problem, const Options& options) const override;
};

Result solve(const Problem& problem, const Options& options = {});

}  // namespace cv2xloca::conic
