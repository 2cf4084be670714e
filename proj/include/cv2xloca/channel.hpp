#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cv2xloca/random.hpp"
#include "cv2xloca/scenario.hpp"

namespace cv2xloca::channel {

// Log-distance path-loss channel with log-normal shadowing.
//
// Received power at distance d:  P = p0 + 10 * gamma * log10(d / d0) + m,
// m ~ N(0, sigma^2). The additive-path-loss sign convention is used
// consistently by the generator and every estimator in this library, so
// relative geometry is unaffected. Setting negate_path_loss = true flips the
// generator to the physically decreasing convention (P = p0 - 10*gamma*...);
// externally ingested data in that convention must be mapped back with
// to_internal_convention() before estimation.
struct ChannelParams {
  double p0 = -30.0;  // dBm at the reference distance
  double d0 = 1.0;    // reference distance, m
  double gamma = 3.0;
  double sigma = 2.0;  // shadowing std dev, dBm
  double comm_range = 100.0;
  double packet_loss_prob = 0.0;
  bool negate_path_loss = false;

  void validate() const;
};

struct RssMeasurement {
  std::string mac;
  double timestamp = 0.0;  // seconds, on the dt grid
  int rsu_id = 0;
  double power = 0.0;  // dBm
};

struct EpochDiagnostics {
  long clamped = 0;       // sub-d0 distances clamped to d0
  long dropped = 0;       // packets lost
  long out_of_range = 0;  // RSUs beyond comm_range
};

// One received-power draw. Distances below d0 are clamped to d0 and flagged.
double rss_sample(const ChannelParams& params, const Vec2& rsu_pos, const Vec2& veh_pos,
                  RandomStream& rng, bool* clamped = nullptr);

// Noiseless received power (sigma contribution removed); shares the clamp rule.
double rss_mean(const ChannelParams& params, double distance, bool* clamped = nullptr);

// All measurements a vehicle collects in one epoch: one per RSU within
// comm_range, each independently dropped with packet_loss_prob. RSUs are
// visited in id order so the draw sequence is replayable for a fixed seed.
std::vector<RssMeasurement> simulate_epoch(std::span<const scenario::RsuNode> rsus,
                                           const Vec2& veh_pos, const std::string& mac, double t,
                                           const ChannelParams& params, RandomStream& rng,
                                           EpochDiagnostics* diag = nullptr);

// Maps a measurement taken under the decreasing-power convention into the
// internal additive convention (and back; the map is an involution).
inline double to_internal_convention(double power_dbm, double p0) { return 2.0 * p0 - power_dbm; }

// Measurement-log export, one record per line:
//   mac, iso-timestamp, rsu_id, rssi_dbm
// Timestamps are rendered as UTC instants offset from a fixed base epoch.
inline constexpr const char* kDefaultMac = "00:16:EA:AE:3C:30";
void write_log(std::ostream& out, std::span<const RssMeasurement> records,
               double base_unix_seconds = 1625912430.0);  // 2021-07-10T10:20:30Z

}  // namespace cv2xloca::channel
