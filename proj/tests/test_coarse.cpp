#include <doctest.h>

#include <cmath>

#include "cv2xloca/coarse.hpp"
#include "cv2xloca/errors.hpp"
#include "test_helpers.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace cv2xloca;
using coarse::EstimatorInputs;
using coarse::SdpStatus;
using test_helpers::make_epoch;
using test_helpers::triangle_rsus;

TEST_CASE("beta_squared inverts the power model") {
  CHECK(coarse::beta_squared(-30.0, -30.0, 2.5, 1.0) == doctest::Approx(1.0));
  CHECK(coarse::beta_squared(-30.0 + 5.0 * 3.0, -30.0, 3.0, 1.0) == doctest::Approx(10.0));
  // noise-free power generated at distance d recovers d^2 exactly
  for (double d : {2.0, 17.0, 93.5}) {
    const double power = -30.0 + 10.0 * 2.7 * std::log10(d / 1.0);
    CHECK(coarse::beta_squared(power, -30.0, 2.7, 1.0) ==
          doctest::Approx(d * d).epsilon(1e-12));
  }
  CHECK_THROWS_AS(coarse::beta_squared(-50.0, -30.0, 0.0, 1.0), DomainError);
}

TEST_CASE("residual_tilde is the symmetric squared-range ratio") {
  const Vec2 phi(0.0, 0.0);
  CHECK(coarse::residual_tilde(Vec2(2.0, 0.0), phi, 4.0) == doctest::Approx(1.0));
  CHECK(coarse::residual_tilde(Vec2(2.0, 0.0), phi, 1.0) == doctest::Approx(4.0));
  CHECK(coarse::residual_tilde(Vec2(1.0, 0.0), phi, 4.0) == doctest::Approx(4.0));
  CHECK_THROWS_AS(coarse::residual_tilde(phi, phi, 1.0), DomainError);

  RandomStream rng(3);
  for (int i = 0; i < 200; ++i) {
    const Vec2 theta(rng.uniform(-50, 50), rng.uniform(-50, 50));
    const double beta2 = std::exp(rng.uniform(-2, 8));
    if ((theta - phi).squaredNorm() == 0.0) continue;
    const double r = coarse::residual_tilde(theta, phi, beta2);
    CHECK(r >= 1.0);
    // |log10(d^2/beta^2)| equals log10 of the symmetric ratio
    const double lhs = std::log10(r);
    const double rhs = std::abs(std::log10((theta - phi).squaredNorm() / beta2));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("nonconvex objective attains 1 at the noise-free truth") {
  const auto rsus = triangle_rsus();
  const Vec2 truth(47.0, 5.0);
  const auto in = make_epoch(rsus, truth, 3.0, 0.0, nullptr);
  CHECK(coarse::nonconvex_objective(truth, in) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(coarse::nonconvex_objective(truth + Vec2(40.0, 0.0), in) > 1.0);
}

TEST_CASE("build_sdp lays out the documented constraint structure") {
  const auto rsus = triangle_rsus();
  const auto in = make_epoch(rsus, Vec2(50.0, 4.0), 3.0, 0.0, nullptr);
  const auto sp = coarse::build_sdp(in);
  CHECK(sp.n_affine == 3);
  CHECK(sp.n_lmi2 == 3);
  CHECK(sp.n_lmi3 == 1);
  CHECK(sp.problem.cone.nonneg == 6);  // 3 affine + 3 epigraph rows
  REQUIRE(sp.problem.cone.psd.size() == 4);
  CHECK(sp.problem.cone.psd[0] == 2);
  CHECK(sp.problem.cone.psd[3] == 3);
  CHECK(sp.problem.c.size() == 9);  // theta(2) + X(3) + mu(3) + epigraph

  auto four = rsus;
  four.push_back({3, Vec2(180.0, 15.0), scenario::RsuSide::far});
  const auto sp4 = coarse::build_sdp(make_epoch(four, Vec2(90.0, 4.0), 3.0, 0.0, nullptr));
  CHECK(sp4.n_affine == 4);
  CHECK(sp4.n_lmi2 == 4);
  CHECK(sp4.n_lmi3 == 1);

  auto two = triangle_rsus();
  two.pop_back();
  CHECK_THROWS_AS(coarse::build_sdp(make_epoch(two, Vec2(30.0, 4.0), 3.0, 0.0, nullptr)),
                  DomainError);
}

TEST_CASE("noise-free truth point is feasible with unit residuals") {
  const auto rsus = triangle_rsus();
  const Vec2 truth(35.0, 6.0);
  const auto sp = coarse::build_sdp(make_epoch(rsus, truth, 2.5, 0.0, nullptr));
  const Eigen::Matrix2d xx = truth * truth.transpose();
  const Eigen::VectorXd mu = Eigen::VectorXd::Ones(3);
  CHECK(coarse::feasibility_violation(sp, truth, xx, mu) < 1e-9);
}

TEST_CASE("noise-free solve recovers the truth with a vanishing rank-1 gap") {
  const auto rsus = triangle_rsus();
  RandomStream rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec2 truth(rng.uniform(0.0, 120.0), rng.uniform(0.0, 14.0));
    const auto in = make_epoch(rsus, truth, 3.0, 0.0, nullptr);
    const auto sp = coarse::build_sdp(in);
    const auto sol = coarse::solve_sdp(sp);
    REQUIRE(sol.status == SdpStatus::optimal);
    CHECK((sol.theta_hat - truth).norm() < 1e-2);
    CHECK(sol.rank1_gap <= 1e-4 * std::max(1.0, truth.squaredNorm()));
    CHECK(sol.mu_hat.minCoeff() >= 1.0 - 1e-6);
    CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-5));
  }
}

TEST_CASE("returned solutions satisfy the relaxed constraints") {
  const auto rsus = triangle_rsus();
  RandomStream rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec2 truth(rng.uniform(0.0, 120.0), rng.uniform(0.0, 14.0));
    const auto in = make_epoch(rsus, truth, 2.8, 2.0, &rng);
    const auto sp = coarse::build_sdp(in);
    const auto sol = coarse::solve_sdp(sp, 1e-7);
    REQUIRE(sol.status == SdpStatus::optimal);
    CHECK(coarse::feasibility_violation(sp, sol.theta_hat, sol.x_hat, sol.mu_hat) <= 1e-6);
    CHECK(sol.mu_hat.minCoeff() >= 1.0 - 1e-6);
  }
}

TEST_CASE("relaxation lower-bounds the grid oracle on noisy epochs") {
  const auto rsus = triangle_rsus();
  RandomStream rng(13);
  const coarse::Box2 bounds{Vec2(0.0, 0.0), Vec2(120.0, 14.0)};
  for (int trial = 0; trial < 20; ++trial) {
    const Vec2 truth(rng.uniform(5.0, 115.0), rng.uniform(0.0, 14.0));
    const auto in = make_epoch(rsus, truth, 3.0, 2.0, &rng);
    const auto sol = coarse::solve_sdp(coarse::build_sdp(in));
    REQUIRE(sol.status == SdpStatus::optimal);
    const Vec2 oracle = coarse::grid_oracle(in, bounds, 0.5);
    CHECK(sol.objective <= coarse::nonconvex_objective(oracle, in) + 1e-5);
  }
}

TEST_CASE("sum penalty variant solves and lower-bounds its own oracle") {
  const auto rsus = triangle_rsus();
  RandomStream rng(29);
  const Vec2 truth(58.0, 4.0);
  auto in = make_epoch(rsus, truth, 3.0, 0.0, nullptr);
  in.penalty = {coarse::PenaltyKind::lp, 1.0};

  CHECK(coarse::nonconvex_objective(truth, in) == doctest::Approx(3.0).epsilon(1e-10));
  const auto sp = coarse::build_sdp(in);
  CHECK(sp.problem.cone.nonneg == 3);  // no epigraph rows
  const auto sol = coarse::solve_sdp(sp);
  REQUIRE(sol.status == SdpStatus::optimal);
  CHECK((sol.theta_hat - truth).norm() < 1e-2);
  CHECK(sol.objective == doctest::Approx(3.0).epsilon(1e-5));

  auto noisy = make_epoch(rsus, truth, 3.0, 2.0, &rng);
  noisy.penalty = {coarse::PenaltyKind::lp, 1.0};
  const auto nsol = coarse::solve_sdp(coarse::build_sdp(noisy));
  const coarse::Box2 bounds{Vec2(0.0, 0.0), Vec2(120.0, 14.0)};
  const Vec2 om = coarse::grid_oracle(noisy, bounds, 0.5);
  CHECK(nsol.objective <= coarse::nonconvex_objective(om, noisy) + 1e-5);

  auto unsupported = in;
  unsupported.penalty = {coarse::PenaltyKind::lp, 2.0};
  CHECK_THROWS_AS(coarse::build_sdp(unsupported), ConfigError);
}

TEST_CASE("hand-built contradictory constraints yield infeasible status") {
  const auto rsus = triangle_rsus();
  auto sp = coarse::build_sdp(make_epoch(rsus, Vec2(40.0, 3.0), 3.0, 0.0, nullptr));
  // Overwrite the first affine row with: epigraph <= -1. The epigraph
  // dominates every mu_i, each of which the 2x2 blocks keep nonnegative.
  sp.problem.G.row(0).setZero();
  sp.problem.G(0, sp.epigraph_index()) = 1.0;
  sp.problem.h[0] = -1.0;
  const auto sol = coarse::solve_sdp(sp);
  CHECK(sol.status == SdpStatus::infeasible);
}

TEST_CASE("coarse_fix respects mirror symmetry") {
  // Two RSUs mirror-symmetric about x = 50, third on the axis; equal powers
  // from the two symmetric RSUs pin the estimate to the bisector.
  std::vector<scenario::RsuNode> rsus = {{0, Vec2(0.0, -1.0), scenario::RsuSide::near},
                                         {1, Vec2(50.0, 15.0), scenario::RsuSide::far},
                                         {2, Vec2(100.0, -1.0), scenario::RsuSide::near}};
  const Vec2 truth(50.0, 3.0);
  const auto fix = coarse::coarse_fix(make_epoch(rsus, truth, 3.0, 0.0, nullptr));
  REQUIRE(fix.status == SdpStatus::optimal);
  CHECK(std::abs(fix.theta_hat.x() - 50.0) < 1e-2);
  CHECK(fix.geometry_svmin > 1.0);
}

TEST_CASE("coarse_fix error magnitude at reference noise") {
  const auto rsus = triangle_rsus();
  RandomStream rng(17);
  double total = 0.0;
  const int n = 100;
  for (int i = 0; i < n; ++i) {
    const Vec2 truth(rng.uniform(0.0, 120.0), rng.uniform(0.0, 14.0));
    const auto fix = coarse::coarse_fix(make_epoch(rsus, truth, 3.0, 2.0, &rng));
    REQUIRE(fix.status != SdpStatus::infeasible);
    total += (fix.theta_hat - truth).norm();
  }
  const double mean_err = total / n;
  // order-of-magnitude band: single-epoch ranging noise at sigma = 2 dBm and
  // gamma = 3 is ~15% of range, so meters to low tens of meters
  CHECK(mean_err > 1.0);
  CHECK(mean_err < 15.0);
}

TEST_CASE("grid oracle finds the basin and beats random probes") {
  const auto rsus = triangle_rsus();
  RandomStream rng(19);
  const coarse::Box2 bounds{Vec2(0.0, 0.0), Vec2(120.0, 14.0)};

  const Vec2 truth(61.0, 8.0);
  const auto clean = make_epoch(rsus, truth, 3.0, 0.0, nullptr);
  const Vec2 at = coarse::grid_oracle(clean, bounds, 0.25);
  CHECK((at - truth).cwiseAbs().maxCoeff() <= 0.25 + 1e-12);

  const auto noisy = make_epoch(rsus, truth, 3.0, 2.0, &rng);
  const Vec2 om = coarse::grid_oracle(noisy, bounds, 0.5);
  const double best = coarse::nonconvex_objective(om, noisy);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 probe(rng.uniform(0.0, 120.0), rng.uniform(0.0, 14.0));
    CHECK(best <= coarse::nonconvex_objective(probe, noisy) + 1e-12);
  }
  CHECK_THROWS_AS(coarse::grid_oracle(noisy, bounds, 0.0), DomainError);
}

TEST_CASE("log-form and ratio-form objectives share grid argmins") {
  const auto rsus = triangle_rsus();
  RandomStream rng(23);
  const coarse::Box2 bounds{Vec2(0.0, 0.0), Vec2(120.0, 14.0)};
  for (int trial = 0; trial < 5; ++trial) {
    const Vec2 truth(rng.uniform(5.0, 115.0), rng.uniform(0.0, 14.0));
    const auto in = make_epoch(rsus, truth, 3.0, 2.0, &rng);

    const Vec2 ratio_best = coarse::grid_oracle(in, bounds, 1.0);
    Vec2 log_best;
    double log_obj = std::numeric_limits<double>::infinity();
    for (double gx = 0.0; gx <= 120.0 + 1e-9; gx += 1.0)
      for (double gy = 0.0; gy <= 14.0 + 1e-9; gy += 1.0) {
        const double o = test_helpers::log_form_objective(Vec2(gx, gy), in);
        if (o < log_obj) {
          log_obj = o;
          log_best = Vec2(gx, gy);
        }
      }
    CHECK((ratio_best - log_best).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("grid oracle is invariant to the worker count") {
  const auto rsus = triangle_rsus();
  RandomStream rng(37);
  const coarse::Box2 bounds{Vec2(0.0, 0.0), Vec2(120.0, 14.0)};
  const auto in = make_epoch(rsus, Vec2(63.0, 9.0), 3.0, 2.0, &rng);
#ifdef _OPENMP
  const int before = omp_get_max_threads();
  omp_set_num_threads(1);
  const Vec2 serial = coarse::grid_oracle(in, bounds, 0.5);
  omp_set_num_threads(before);
#else
  const Vec2 serial = coarse::grid_oracle(in, bounds, 0.5);
#endif
  const Vec2 parallel = coarse::grid_oracle(in, bounds, 0.5);
  CHECK(serial.x() == parallel.x());
  CHECK(serial.y() == parallel.y());
}

TEST_CASE("pair constraints admit exactly the residual ratio as smallest auxiliary") {
  // For any theta, the auxiliary value mu satisfies both
  //   d^2 <= beta^2 mu   and   d^2 >= beta^2 / mu
  // precisely when mu >= the symmetric ratio residual, so minimizing over mu
  // reproduces residual_tilde.
  RandomStream rng(53);
  const Vec2 phi(10.0, -2.0);
  const auto feasible = [&](double d2, double b2, double mu) {
    return d2 <= b2 * mu && d2 >= b2 / mu;
  };
  for (int i = 0; i < 300; ++i) {
    const Vec2 theta(rng.uniform(-80, 80), rng.uniform(-80, 80));
    const double d2 = (theta - phi).squaredNorm();
    if (d2 == 0.0) continue;
    const double b2 = std::exp(rng.uniform(-1, 9));
    const double r = coarse::residual_tilde(theta, phi, b2);
    CHECK(feasible(d2, b2, r * (1.0 + 1e-12)));
    CHECK(!feasible(d2, b2, r * (1.0 - 1e-9)));
    CHECK(r >= 1.0);
  }
}
