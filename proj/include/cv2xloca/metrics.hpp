#pragma once

#include <span>
#include <vector>

#include "cv2xloca/scenario.hpp"

namespace cv2xloca::metrics {

struct ErrorReport {
  double ale = 0.0;   // mean 2D Euclidean error
  double rmse = 0.0;
  double mae = 0.0;
  double mape = 0.0;  // mean ||error|| / ||truth||, origin samples excluded
  std::vector<double> longitudinal_errors;  // |error along the road axis|, sorted
  std::size_t n = 0;
  std::size_t mape_excluded = 0;
};

// Error statistics over paired estimate/truth positions. The road axis is the
// first coordinate.
ErrorReport compute_report(std::span<const Vec2> estimates, std::span<const Vec2> truths);

// Linear-interpolated order statistic of a sorted sample: rank h = (n-1) p,
// value x[floor(h)] + frac(h) * (x[floor(h)+1] - x[floor(h)]).
double percentile(std::span<const double> sorted, double p);

// Fraction of the sorted sample <= x.
double empirical_cdf(std::span<const double> sorted, double x);

// Pools several reports into one (sample-weighted; longitudinal errors merged
// and re-sorted).
ErrorReport merge_reports(std::span<const ErrorReport> reports);

}  // namespace cv2xloca::metrics
