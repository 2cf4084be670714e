#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cv2xloca/channel.hpp"
#include "cv2xloca/scenario.hpp"

namespace cv2xloca::dataproc {

// All measurements of one vehicle at one timestamp across >= min_rsus RSUs.
struct MatchedEpoch {
  std::string mac;
  double t = 0.0;
  std::vector<std::pair<scenario::RsuNode, double>> entries;  // sorted by rsu id
};

struct MatchDiagnostics {
  long records_in = 0;
  long epochs_out = 0;
  long kept_records = 0;     // records that ended up as epoch entries
  long duplicates = 0;       // superseded (mac, t, rsu) re-measurements
  long dropped_groups = 0;   // groups with fewer than min_rsus entries
  long dropped_records = 0;  // records inside dropped groups
  long unknown_rsu = 0;      // records naming an undeployed RSU
};

// Parses one log record:  mac, timestamp, rsu_id, rssi_dbm
// Timestamps are accepted as ISO-8601 ("2021-07-10T10:20:30.100") or as
// M/D/YYYY HH:MM:SS; RSU ids as "RSU_7" or bare integers. Throws ParseError
// naming the offending field (line_no is echoed into the error when given).
channel::RssMeasurement parse_record(std::string_view line, long line_no = 0);

// Parses a whole log stream, attaching line numbers to errors. Empty and
// '#'-comment lines are skipped.
std::vector<channel::RssMeasurement> read_log(std::istream& in);

// Groups records by (mac, timestamp) and keeps groups covering at least
// min_rsus distinct RSUs. Records within dt/2 of the same dt-grid point are
// simultaneous. Re-measurements of the same (mac, grid point, rsu) key keep
// the canonically last record (latest raw timestamp, ties by higher power),
// so the result depends only on the record multiset, not its order. Output
// epochs ascend in time; entries ascend by rsu id.
std::vector<MatchedEpoch> match_epochs(std::vector<channel::RssMeasurement> records,
                                       std::span<const scenario::RsuNode> rsus, int min_rsus,
                                       double dt, MatchDiagnostics* diag = nullptr);

// Epoch dump, one row per entry:  mac, t, rsu_id, power
void write_epochs_csv(std::ostream& out, std::span<const MatchedEpoch> epochs);

}  // namespace cv2xloca::dataproc
