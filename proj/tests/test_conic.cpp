#include <doctest.h>

#include <Eigen/Dense>

#include "cv2xloca/conic.hpp"
#include "cv2xloca/errors.hpp"
#include "cv2xloca/random.hpp"

using namespace cv2xloca;
using conic::Problem;
using conic::Status;

TEST_CASE("svec round-trips and preserves inner products") {
  RandomStream rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 2 + trial % 3;
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(p, p, [&] { return rng.gaussian(); });
    a = (a + a.transpose()).eval();
    Eigen::MatrixXd b = Eigen::MatrixXd::NullaryExpr(p, p, [&] { return rng.gaussian(); });
    b = (b + b.transpose()).eval();
    CHECK((conic::smat(conic::svec(a)) - a).norm() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(conic::svec(a).dot(conic::svec(b)) ==
          doctest::Approx((a.transpose() * b).trace()).epsilon(1e-12));
  }
}

TEST_CASE("bounded LP solves to the known vertex") {
  // min -x - y  s.t.  x <= 1, y <= 2, x >= 0, y >= 0
  Problem prob;
  prob.c = Eigen::Vector2d(-1.0, -1.0);
  prob.G = Eigen::MatrixXd(4, 2);
  prob.G << 1, 0, 0, 1, -1, 0, 0, -1;
  prob.h = Eigen::Vector4d(1.0, 2.0, 0.0, 0.0);
  prob.cone.nonneg = 4;

  const auto res = conic::solve(prob);
  REQUIRE(res.status == Status::optimal);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.x[1] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(res.primal_obj == doctest::Approx(-3.0).epsilon(1e-6));
  CHECK(std::abs(res.primal_obj - res.dual_obj) < 1e-5);
}

TEST_CASE("smallest-t SDP with closed form") {
  // min t  s.t.  [[t, 1], [1, t]] >= 0   ->  t = 1
  Problem prob;
  prob.c = Eigen::VectorXd::Ones(1);
  prob.G = Eigen::MatrixXd(3, 1);
  prob.G << -1.0, 0.0, -1.0;
  prob.h = Eigen::Vector3d(0.0, M_SQRT2, 0.0);
  prob.cone.psd = {2};

  const auto res = conic::solve(prob);
  REQUIRE(res.status == Status::optimal);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("largest-eigenvalue SDP matches the dense eigensolver") {
  RandomStream rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = 3;
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(p, p, [&] { return rng.gaussian(); });
    a = (0.5 * (a + a.transpose())).eval();

    // min t  s.t.  t I - A >= 0
    Problem prob;
    prob.c = Eigen::VectorXd::Ones(1);
    prob.G = -conic::svec(Eigen::MatrixXd::Identity(p, p));
    prob.h = -conic::svec(a);
    prob.cone.psd = {p};

    const auto res = conic::solve(prob);
    REQUIRE(res.status == Status::optimal);
    const double lmax =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues().maxCoeff();
    CHECK(res.x[0] == doctest::Approx(lmax).epsilon(1e-6));
  }
}

TEST_CASE("mixed orthant and PSD blocks") {
  // min t  s.t.  t I - A >= 0,  t >= lmax + 1
  RandomStream rng(5);
  Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(3, 3, [&] { return rng.gaussian(); });
  a = (0.5 * (a + a.transpose())).eval();
  const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues().maxCoeff();
  const double lb = lmax + 1.0;

  Problem prob;
  prob.c = Eigen::VectorXd::Ones(1);
  prob.G = Eigen::MatrixXd(7, 1);
  prob.G(0, 0) = -1.0;
  prob.G.block(1, 0, 6, 1) = -conic::svec(Eigen::MatrixXd::Identity(3, 3));
  prob.h = Eigen::VectorXd(7);
  prob.h[0] = -lb;
  prob.h.segment(1, 6) = -conic::svec(a);
  prob.cone.nonneg = 1;
  prob.cone.psd = {3};

  const auto res = conic::solve(prob);
  REQUIRE(res.status == Status::optimal);
  CHECK(res.x[0] == doctest::Approx(lb).epsilon(1e-6));
}

TEST_CASE("contradictory linear constraints report primal infeasibility") {
  // x >= 1 and x <= 0
  Problem prob;
  prob.c = Eigen::VectorXd::Ones(1);
  prob.G = Eigen::MatrixXd(2, 1);
  prob.G << -1.0, 1.0;
  prob.h = Eigen::Vector2d(-1.0, 0.0);
  prob.cone.nonneg = 2;

  const auto res = conic::solve(prob);
  CHECK(res.status == Status::primal_infeasible);
}

TEST_CASE("unbounded objective reports dual infeasibility") {
  // min -x  s.t.  x >= 0
  Problem prob;
  prob.c = -Eigen::VectorXd::Ones(1);
  prob.G = Eigen::MatrixXd(1, 1);
  prob.G << -1.0;
  prob.h = Eigen::VectorXd::Zero(1);
  prob.cone.nonneg = 1;

  const auto res = conic::solve(prob);
  CHECK(res.status == Status::dual_infeasible);
}

TEST_CASE("identical inputs give bit-identical iterates") {
  Problem prob;
  prob.c = Eigen::VectorXd::Ones(1);
  prob.G = Eigen::MatrixXd(3, 1);
  prob.G << -1.0, 0.0, -1.0;
  prob.h = Eigen::Vector3d(0.3, M_SQRT2, -0.2);
  prob.cone.psd = {2};

  const auto a = conic::solve(prob);
  const auto b = conic::solve(prob);
  REQUIRE(a.status == b.status);
  CHECK(a.x[0] == b.x[0]);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("higher-order PSD blocks agree with the eigensolver") {
  RandomStream rng(61);
  for (int p : {4, 5, 6}) {
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(p, p, [&] { return rng.gaussian(); });
    a = (0.5 * (a + a.transpose())).eval();
    Problem prob;
    prob.c = Eigen::VectorXd::Ones(1);
    prob.G = -conic::svec(Eigen::MatrixXd::Identity(p, p));
    prob.h = -conic::svec(a);
    prob.cone.psd = {p};
    const auto res = conic::solve(prob);
    REQUIRE(res.status == Status::optimal);
    const double lmax =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues().maxCoeff();
    CHECK(res.x[0] == doctest::Approx(lmax).epsilon(1e-6));
  }
  Problem prob;
  prob.c = Eigen::VectorXd::Ones(1);
  prob.G = -conic::svec(Eigen::MatrixXd::Identity(9, 9));
  prob.h = conic::svec(Eigen::MatrixXd::Identity(9, 9));
  prob.cone.psd = {9};  // beyond the supported dense block order
  CHECK_THROWS_AS(conic::solve(prob), DomainError);
}

TEST_CASE("iteration budget of zero returns max_iter with the start iterate") {
  Problem prob;
  prob.c = Eigen::VectorXd::Ones(1);
  prob.G = Eigen::MatrixXd(1, 1);
  prob.G << -1.0;
  prob.h = Eigen::VectorXd::Zero(1);
  prob.cone.nonneg = 1;
  conic::Options opt;
  opt.max_iter = 0;
  const auto res = conic::solve(prob, opt);
  CHECK(res.status == Status::max_iter);
  CHECK(res.iterations == 0);
}
