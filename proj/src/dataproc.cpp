#include "cv2xloca/dataproc.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>

#include "cv2xloca/errors.hpp"

namespace cv2xloca::dataproc {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(s.substr(start)));
      break;
    }
    out.push_back(trim(s.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

long days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

bool parse_int(std::string_view s, long& out) {
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last;
}

bool parse_double(std::string_view s, double& out) {
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last;
}

// Accepts "YYYY-MM-DD[T ]HH:MM:SS[.fff]" and "M/D/YYYY HH:MM:SS[.fff]".
double parse_timestamp(std::string_view s, long line_no) {
  std::string_view date = s, time;
  const std::size_t cut = s.find_first_of("T ");
  if (cut == std::string_view::npos)
    throw ParseError("record timestamp missing time of day", "timestamp", line_no);
  date = trim(s.substr(0, cut));
  time = trim(s.substr(cut + 1));

  long y = 0, mo = 0, dd = 0;
  bool ok = false;
  if (date.find('-') != std::string_view::npos) {
    const auto parts = split(date, '-');
    ok = parts.size() == 3 && parse_int(parts[0], y) && parse_int(parts[1], mo) &&
         parse_int(parts[2], dd);
  } else if (date.find('/') != std::string_view::npos) {
    const auto parts = split(date, '/');
    ok = parts.size() == 3 && parse_int(parts[0], mo) && parse_int(parts[1], dd) &&
         parse_int(parts[2], y);
  }
  if (!ok || mo < 1 || mo > 12 || dd < 1 || dd > 31)
    throw ParseError("record timestamp has an invalid date", "timestamp", line_no);

  const auto hms = split(time, ':');
  long hh = 0, mi = 0;
  double ss = 0.0;
  if (hms.size() != 3 || !parse_int(hms[0], hh) || !parse_int(hms[1], mi) ||
      !parse_double(hms[2], ss) || hh < 0 || hh > 23 || mi < 0 || mi > 59 || ss < 0.0 ||
      ss >= 61.0)
    throw ParseError("record timestamp has an invalid time of day", "timestamp", line_no);

  const long days = days_from_civil(static_cast<int>(y), static_cast<unsigned>(mo),
                                    static_cast<unsigned>(dd));
  return days * 86400.0 + hh * 3600.0 + mi * 60.0 + ss;
}

}  // namespace

channel::RssMeasurement parse_record(std::string_view line, long line_no) {
  const auto fields = split(line, ',');
  if (trim(line).empty()) throw ParseError("empty record", {}, line_no);
  if (fields.size() != 4)
    throw ParseError("record must have 4 comma-separated fields, got " +
                         std::to_string(fields.size()),
                     {}, line_no);

  channel::RssMeasurement rec;
  if (fields[0].empty()) throw ParseError("record MAC is empty", "mac", line_no);
  rec.mac = std::string(fields[0]);

  rec.timestamp = parse_timestamp(fields[1], line_no);

  std::string_view id = fields[2];
  if (id.starts_with("RSU_") || id.starts_with("rsu_")) id.remove_prefix(4);
  long rsu = 0;
  if (!parse_int(id, rsu)) throw ParseError("record RSU id is not an integer", "rsu_id", line_no);
  rec.rsu_id = static_cast<int>(rsu);

  double power = 0.0;
  if (!parse_double(fields[3], power))
    throw ParseError("record power is not a number", "rssi_dbm", line_no);
  rec.power = power;
  return rec;
}

std::vector<channel::RssMeasurement> read_log(std::istream& in) {
  std::vector<channel::RssMeasurement> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    out.push_back(parse_record(trimmed, line_no));
  }
  return out;
}

std::vector<MatchedEpoch> match_epochs(std::vector<channel::RssMeasurement> records,
                                       std::span<const scenario::RsuNode> rsus, int min_rsus,
                                       double dt, MatchDiagnostics* diag) {
  if (min_rsus < 1) throw ConfigError("match_epochs: min_rsus must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("match_epochs: dt must be > 0");

  MatchDiagnostics local;
  MatchDiagnostics& d = diag ? *diag : local;
  d = {};
  d.records_in = static_cast<long>(records.size());

  std::map<int, const scenario::RsuNode*> by_id;
  for (const auto& r : rsus) by_id[r.id] = &r;

  // Grid-relative time base keeps round(t/dt) well conditioned for absolute
  // (unix-scale) timestamps.
  double t_base = records.empty() ? 0.0 : records.front().timestamp;
  for (const auto& r : records) t_base = std::min(t_base, r.timestamp);
  const auto grid_index = [&](double t) { return std::llround((t - t_base) / dt); };

  // Canonical order makes the keep-last duplicate rule independent of input
  // permutation: later raw timestamp wins, then higher power.
  std::stable_sort(records.begin(), records.end(), [&](const auto& a, const auto& b) {
    const auto ga = grid_index(a.timestamp), gb = grid_index(b.timestamp);
    if (ga != gb) return ga < gb;
    if (a.mac != b.mac) return a.mac < b.mac;
    if (a.rsu_id != b.rsu_id) return a.rsu_id < b.rsu_id;
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.power < b.power;
  });

  struct Group {
    std::vector<std::pair<scenario::RsuNode, double>> entries;
    double t = 0.0;
  };
  std::map<std::pair<long long, std::string>, Group> groups;
  for (const auto& rec : records) {
    const auto it = by_id.find(rec.rsu_id);
    if (it == by_id.end()) {
      d.unknown_rsu++;
      continue;
    }
    auto& g = groups[{grid_index(rec.timestamp), rec.mac}];
    g.t = grid_index(rec.timestamp) * dt + t_base;
    bool replaced = false;
    for (auto& e : g.entries) {
      if (e.first.id == rec.rsu_id) {  // canonical order: this one supersedes
        e.second = rec.power;
        d.duplicates++;
        replaced = true;
        break;
      }
    }
    if (!replaced) g.entries.emplace_back(*it->second, rec.power);
  }

  std::vector<MatchedEpoch> epochs;
  for (auto& [key, g] : groups) {
    if (static_cast<int>(g.entries.size()) < min_rsus) {
      d.dropped_groups++;
      d.dropped_records += static_cast<long>(g.entries.size());
      continue;
    }
    std::sort(g.entries.begin(), g.entries.end(),
              [](const auto& a, const auto& b) { return a.first.id < b.first.id; });
    MatchedEpoch e;
    e.mac = key.second;
    e.t = g.t;
    e.entries = std::move(g.entries);
    d.kept_records += static_cast<long>(e.entries.size());
    epochs.push_back(std::move(e));
  }
  std::stable_sort(epochs.begin(), epochs.end(), [](const auto& a, const auto& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.mac < b.mac;
  });
  d.epochs_out = static_cast<long>(epochs.size());
  return epochs;
}

void write_epochs_csv(std::ostream& out, std::span<const MatchedEpoch> epochs) {
  out << "mac,t,rsu_id,power\n";
  char buf[160];
  for (const auto& e : epochs) {
    for (const auto& [rsu, power] : e.entries) {
      std::snprintf(buf, sizeof buf, "%s,%.6f,%d,%.6f\n", e.mac.c_str(), e.t, rsu.id, power);
      out << buf;
    }
  }
}

}  // namespace cv2xloca::dataproc
