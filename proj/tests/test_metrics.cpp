#include <doctest.h>

#include <vector>

#include "cv2xloca/errors.hpp"
#include "cv2xloca/metrics.hpp"
#include "cv2xloca/random.hpp"

using namespace cv2xloca;
using metrics::compute_report;
using metrics::percentile;

TEST_CASE("report arithmetic on tiny samples") {
  {
    const std::vector<Vec2> est = {{1.0, 2.0}, {3.0, 4.0}};
    const auto rep = compute_report(est, est);
    CHECK(rep.ale == 0.0);
    CHECK(rep.rmse == 0.0);
    CHECK(rep.mae == 0.0);
    CHECK(rep.mape == 0.0);
  }
  {
    const std::vector<Vec2> est = {{3.0, 4.0}};
    const std::vector<Vec2> truth = {{0.0, 0.0}};
    CHECK_THROWS_AS(compute_report(est, {}), DomainError);
    const auto rep = compute_report(est, truth);
    CHECK(rep.ale == doctest::Approx(5.0));
    CHECK(rep.rmse == doctest::Approx(5.0));
    CHECK(rep.mae == doctest::Approx(5.0));
    CHECK(rep.mape_excluded == 1);  // truth at the origin leaves no MAPE sample
  }
  {
    const std::vector<Vec2> est = {{1.0, 0.0}, {7.0, 0.0}};
    const std::vector<Vec2> truth = {{0.0, 10.0}, {0.0, 10.0}};
    auto e2 = est;
    for (std::size_t i = 0; i < e2.size(); ++i) e2[i] = truth[i] + Vec2(est[i].x(), 0.0);
    const auto rep = compute_report(e2, truth);
    CHECK(rep.ale == doctest::Approx(4.0));
    CHECK(rep.mae == doctest::Approx(4.0));
    CHECK(rep.rmse == doctest::Approx(5.0));
    CHECK(rep.longitudinal_errors[0] == doctest::Approx(1.0));
    CHECK(rep.longitudinal_errors[1] == doctest::Approx(7.0));
  }
}

TEST_CASE("rmse dominates mae on random samples") {
  RandomStream rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec2> est, truth;
    const int n = 2 + static_cast<int>(rng.uniform01() * 40);
    for (int i = 0; i < n; ++i) {
      truth.push_back(Vec2(rng.uniform(-100, 100), rng.uniform(-100, 100)));
      est.push_back(truth.back() + Vec2(rng.gaussian(), rng.gaussian()));
    }
    const auto rep = compute_report(est, truth);
    CHECK(rep.rmse >= rep.mae);
    CHECK(rep.mae >= 0.0);
  }
}

TEST_CASE("metrics ignore rigid translations of the frame") {
  RandomStream rng(5);
  std::vector<Vec2> est, truth;
  for (int i = 0; i < 30; ++i) {
    truth.push_back(Vec2(rng.uniform(1, 100), rng.uniform(1, 100)));
    est.push_back(truth.back() + Vec2(rng.gaussian(), rng.gaussian()));
  }
  const auto base = compute_report(est, truth);
  const Vec2 delta(42.0, -17.0);
  std::vector<Vec2> est2 = est, truth2 = truth;
  for (auto& v : est2) v += delta;
  for (auto& v : truth2) v += delta;
  const auto moved = compute_report(est2, truth2);
  CHECK(moved.ale == doctest::Approx(base.ale).epsilon(1e-12));
  CHECK(moved.rmse == doctest::Approx(base.rmse).epsilon(1e-12));
  // MAPE is position-referenced, so it does change; the error stats must not.
}

TEST_CASE("percentile follows the linear-interpolation convention") {
  std::vector<double> v = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(percentile(v, 0.9) == doctest::Approx(9.1));
  CHECK(percentile(v, 0.5) == doctest::Approx(5.5));

  const std::vector<double> single = {7.25};
  CHECK(percentile(single, 0.1) == 7.25);
  CHECK(percentile(single, 0.99) == 7.25);

  CHECK(metrics::empirical_cdf(v, 10.0) == 1.0);
  CHECK(metrics::empirical_cdf(v, 4.5) == doctest::Approx(0.4));
  CHECK_THROWS_AS(percentile({}, 0.5), DomainError);
  CHECK_THROWS_AS(percentile(v, 0.0), DomainError);
}

TEST_CASE("merging reports pools the samples") {
  std::vector<Vec2> t1 = {{10, 0}, {20, 0}}, e1 = {{11, 0}, {21, 0}};
  std::vector<Vec2> t2 = {{30, 0}}, e2 = {{33, 0}};
  const std::vector<metrics::ErrorReport> parts = {compute_report(e1, t1),
                                                   compute_report(e2, t2)};
  const auto merged = metrics::merge_reports(parts);
  CHECK(merged.n == 3);
  CHECK(merged.ale == doctest::Approx((1.0 + 1.0 + 3.0) / 3.0));
  CHECK(merged.longitudinal_errors.size() == 3);
  CHECK(merged.longitudinal_errors.back() == doctest::Approx(3.0));
}
