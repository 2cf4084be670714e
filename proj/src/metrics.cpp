#include "cv2xloca/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "cv2xloca/errors.hpp"

namespace cv2xloca::metrics {

ErrorReport compute_report(std::span<const Vec2> estimates, std::span<const Vec2> truths) {
  if (estimates.size() != truths.size())
    throw DomainError("compute_report: estimate/truth length mismatch");
  if (estimates.empty()) throw DomainError("compute_report: empty sample");

  ErrorReport rep;
  rep.n = estimates.size();
  double sum = 0.0, sum_sq = 0.0, mape_sum = 0.0;
  std::size_t mape_n = 0;
  rep.longitudinal_errors.reserve(rep.n);
  for (std::size_t i = 0; i < rep.n; ++i) {
    const Vec2 e = estimates[i] - truths[i];
    const double mag = e.norm();
    sum += mag;
    sum_sq += mag * mag;
    rep.longitudinal_errors.push_back(std::abs(e.x()));
    const double ref = truths[i].norm();
    if (ref > 0.0) {
      mape_sum += mag / ref;
      ++mape_n;
    } else {
      ++rep.mape_excluded;
    }
  }
  rep.ale = sum / rep.n;
  rep.rmse = std::sqrt(sum_sq / rep.n);
  rep.mae = rep.ale;  // error magnitudes are nonnegative, so MAE == ALE
  rep.mape = mape_n > 0 ? mape_sum / mape_n : 0.0;
  std::sort(rep.longitudinal_errors.begin(), rep.longitudinal_errors.end());
  return rep;
}

double percentile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw DomainError("percentile: empty sample");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("percentile: p must be in (0, 1)");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double empirical_cdf(std::span<const double> sorted, double x) {
  if (sorted.empty()) throw DomainError("empirical_cdf: empty sample");
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

ErrorReport merge_reports(std::span<const ErrorReport> reports) {
  ErrorReport out;
  double sum = 0.0, sum_sq = 0.0, mape_weighted = 0.0;
  std::size_t mape_n = 0;
  for (const auto& r : reports) {
    out.n += r.n;
    sum += r.ale * r.n;
    sum_sq += r.rmse * r.rmse * r.n;
    const std::size_t rn = r.n - r.mape_excluded;
    mape_weighted += r.mape * rn;
    mape_n += rn;
    out.mape_excluded += r.mape_excluded;
    out.longitudinal_errors.insert(out.longitudinal_errors.end(), r.longitudinal_errors.begin(),
                                   r.longitudinal_errors.end());
  }
  if (out.n == 0) throw DomainError("merge_reports: no samples");
  out.ale = sum / out.n;
  out.rmse = std::sqrt(sum_sq / out.n);
  out.mae = out.ale;
  out.mape = mape_n > 0 ? mape_weighted / mape_n : 0.0;
  std::sort(out.longitudinal_errors.begin(), out.longitudinal_errors.end());
  return out;
}

}  // namespace cv2xloca::metrics
