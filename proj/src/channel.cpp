#include "cv2xloca/channel.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "cv2xloca/errors.hpp"

namespace cv2xloca::channel {

void ChannelParams::validate() const {
  if (!(d0 > 0.0)) throw ConfigError("channel: d0 must be > 0");
  if (!(gamma >= 2.0 && gamma <= 6.0)) throw ConfigError("channel: gamma must be in [2, 6]");
  if (!(sigma >= 0.0)) throw ConfigError("channel: sigma must be >= 0");
  if (!(comm_range > d0)) throw ConfigError("channel: comm_range must exceed d0");
  if (!(packet_loss_prob >= 0.0 && packet_loss_prob <= 1.0))
    throw ConfigError("channel: packet_loss_prob must be in [0, 1]");
}

double rss_mean(const ChannelParams& params, double distance, bool* clamped) {
  double d = distance;
  if (d < params.d0) {
    d = params.d0;
    if (clamped) *clamped = true;
  }
  const double loss = 10.0 * params.gamma * std::log10(d / params.d0);
  return params.negate_path_loss ? params.p0 - loss : params.p0 + loss;
}

double rss_sample(const ChannelParams& params, const Vec2& rsu_pos, const Vec2& veh_pos,
                  RandomStream& rng, bool* clamped) {
  params.validate();
  const double mean = rss_mean(params, (veh_pos - rsu_pos).norm(), clamped);
  return mean + params.sigma * rng.gaussian();
}

std::vector<RssMeasurement> simulate_epoch(std::span<const scenario::RsuNode> rsus,
                                           const Vec2& veh_pos, const std::string& mac, double t,
                                           const ChannelParams& params, RandomStream& rng,
                                           EpochDiagnostics* diag) {
  params.validate();
  std::vector<RssMeasurement> out;
  for (const auto& rsu : rsus) {
    const double d = (veh_pos - rsu.position).norm();
    if (d > params.comm_range) {
      if (diag) diag->out_of_range++;
      continue;
    }
    bool clamped = false;
    const double power = params.sigma * rng.gaussian() + rss_mean(params, d, &clamped);
    if (clamped && diag) diag->clamped++;
    if (params.packet_loss_prob > 0.0 && rng.bernoulli(params.packet_loss_prob)) {
      if (diag) diag->dropped++;
      continue;
    }
    out.push_back({mac, t, rsu.id, power});
  }
  return out;
}

namespace {

// Civil-date conversion (proleptic Gregorian, UTC).
void civil_from_days(long z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long yr = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y = static_cast<int>(yr + (m <= 2));
}

}  // namespace

void write_log(std::ostream& out, std::span<const RssMeasurement> records,
               double base_unix_seconds) {
  char buf[192];
  for (const auto& rec : records) {
    const double abs_t = base_unix_seconds + rec.timestamp;
    const long long total_ms = std::llround(abs_t * 1000.0);
    long long day = total_ms / 86400000LL;
    long long ms_of_day = total_ms % 86400000LL;
    if (ms_of_day < 0) {
      ms_of_day += 86400000LL;
      day -= 1;
    }
    int y;
    unsigned mo, dd;
    civil_from_days(static_cast<long>(day), y, mo, dd);
    const int hh = static_cast<int>(ms_of_day / 3600000LL);
    const int mi = static_cast<int>(ms_of_day / 60000LL % 60);
    const int ss = static_cast<int>(ms_of_day / 1000LL % 60);
    const int ms = static_cast<int>(ms_of_day % 1000LL);
    std::snprintf(buf, sizeof buf, "%s, %04d-%02u-%02uT%02d:%02d:%02d.%03d, RSU_%d, %.6f\n",
                  rec.mac.c_str(), y, mo, dd, hh, mi, ss, ms, rec.rsu_id, rec.power);
    out << buf;
  }
}

}  // namespace cv2xloca::channel
