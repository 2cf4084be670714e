#include "cv2xloca/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "cv2xloca/errors.hpp"

namespace cv2xloca::config {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

using Section = std::map<std::string, std::string>;

std::map<std::string, Section> parse_ini(std::istream& in) {
  std::map<std::string, Section> sections;
  std::string line, current = "";
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError("config: unterminated section header", {}, line_no);
      current = trim(line.substr(1, line.size() - 2));
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("config: expected key = value", {}, line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("config: empty key", {}, line_no);
    sections[current][key] = value;
  }
  return sections;
}

class SectionView {
 public:
  SectionView(const std::map<std::string, Section>& all, std::string name) : name_(std::move(name)) {
    const auto it = all.find(name_);
    if (it != all.end()) section_ = &it->second;
  }

  bool has(const std::string& key) const { return section_ && section_->count(key); }

  std::string str(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    used_.push_back(key);
    return section_->at(key);
  }

  double num(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    used_.push_back(key);
    const std::string v = section_->at(key);
    try {
      std::size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError("config: [" + name_ + "] " + key + " is not a number: " + v);
    }
  }

  long integer(const std::string& key, long fallback) const {
    const double d = num(key, static_cast<double>(fallback));
    return static_cast<long>(d);
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = str(key, "");
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    throw ConfigError("config: [" + name_ + "] " + key + " is not a boolean: " + v);
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    if (!has(key)) return out;
    std::string v = str(key, "");
    for (char& c : v)
      if (c == ',') c = ' ';
    std::istringstream iss(v);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
  }

  std::vector<double> num_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& tok : list(key)) {
      try {
        out.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ConfigError("config: [" + name_ + "] " + key + " has a non-numeric entry: " + tok);
      }
    }
    return out;
  }

  void check_all_used() const {
    if (!section_) return;
    for (const auto& [key, value] : *section_)
      if (std::find(used_.begin(), used_.end(), key) == used_.end())
        throw ConfigError("config: unknown key [" + name_ + "] " + key);
  }

 private:
  std::string name_;
  const Section* section_ = nullptr;
  mutable std::vector<std::string> used_;
};

scenario::TrajectoryKind kind_from(const std::string& s) {
  if (s == "straight") return scenario::TrajectoryKind::straight;
  if (s == "right_to_left") return scenario::TrajectoryKind::lane_change_right_to_left;
  if (s == "left_to_right") return scenario::TrajectoryKind::lane_change_left_to_right;
  throw ConfigError("config: unknown trajectory kind: " + s);
}

Eigen::Vector4d vec4_from(const SectionView& sec, const std::string& key,
                          const Eigen::Vector4d& fallback) {
  if (!sec.has(key)) return fallback;
  const auto v = sec.num_list(key);
  if (v.size() != 4) throw ConfigError("config: " + key + " needs 4 entries");
  return Eigen::Vector4d(v[0], v[1], v[2], v[3]);
}

}  // namespace

runner::ExperimentConfig load(std::istream& in) {
  const auto sections = parse_ini(in);
  for (const auto& [name, sec] : sections) {
    (void)sec;
    static const char* known[] = {"",         "road",     "rsu",        "channel",
                                  "trajectory", "correction", "tracking", "experiment", "sweep"};
    bool ok = false;
    for (const char* k : known) ok = ok || name == k;
    if (!ok) throw ConfigError("config: unknown section [" + name + "]");
  }

  runner::ExperimentConfig cfg;

  const SectionView road(sections, "road");
  cfg.road = scenario::make_road(road.num("segment_length", 2000.0), road.num("lane_width", 3.5),
                                 static_cast<int>(road.integer("lanes_per_direction", 2)),
                                 road.num("dr1", 60.0), road.num("dr2", 1.0));
  road.check_all_used();

  const SectionView rsu(sections, "rsu");
  const std::string layout = rsu.str("layout", "alternating");
  if (layout == "alternating") cfg.layout = scenario::RsuLayout::alternating;
  else if (layout == "paired") cfg.layout = scenario::RsuLayout::paired;
  else throw ConfigError("config: unknown rsu layout: " + layout);
  rsu.check_all_used();

  const SectionView ch(sections, "channel");
  cfg.channel.p0 = ch.num("p0", -30.0);
  cfg.channel.d0 = ch.num("d0", 1.0);
  cfg.channel.gamma = ch.num("gamma", 3.0);
  cfg.channel.sigma = ch.num("sigma", 2.0);
  cfg.channel.comm_range = ch.num("comm_range", 100.0);
  cfg.channel.packet_loss_prob = ch.num("packet_loss", 0.0);
  cfg.channel.negate_path_loss = ch.flag("negate_path_loss", false);
  if (ch.has("assumed_gamma")) cfg.assumed_gamma = ch.num("assumed_gamma", 0.0);
  ch.check_all_used();

  const SectionView tr(sections, "trajectory");
  cfg.trajectory.kind = kind_from(tr.str("kind", "straight"));
  if (tr.has("speed_kmh") && tr.has("speed_mps"))
    throw ConfigError("config: give speed_kmh or speed_mps, not both");
  cfg.trajectory.speed_mps =
      tr.has("speed_mps") ? tr.num("speed_mps", 0.0) : tr.num("speed_kmh", 25.0) / 3.6;
  cfg.trajectory.dt = tr.num("dt", 0.1);
  if (tr.has("window")) {
    const auto w = tr.num_list("window");
    if (w.size() != 2) throw ConfigError("config: trajectory window needs 2 entries");
    cfg.trajectory.window = {w[0], w[1]};
  }
  tr.check_all_used();

  const SectionView corr(sections, "correction");
  cfg.correction.enabled = corr.flag("enabled", true);
  cfg.correction.anchors = static_cast<int>(corr.integer("anchors", 4));
  cfg.correction.anchor_range = corr.num("anchor_range", 250.0);
  if (corr.has("anchor_sigma")) cfg.correction.anchor_sigma = corr.num("anchor_sigma", 0.0);
  corr.check_all_used();

  const SectionView trk(sections, "tracking");
  cfg.ukf.q = vec4_from(trk, "q_diag", Eigen::Vector4d::Ones()).asDiagonal();
  cfg.ukf.r_diag = vec4_from(trk, "r_diag", cfg.ukf.r_diag);
  cfg.ukf.z0 = vec4_from(trk, "z0_diag", Eigen::Vector4d(0.25, 0.4, 0.2, 0.01)).asDiagonal();
  cfg.ukf.alpha = trk.num("alpha", cfg.ukf.alpha);
  cfg.ukf.beta = trk.num("beta", cfg.ukf.beta);
  cfg.ukf.kappa = trk.num("kappa", cfg.ukf.kappa);
  cfg.ukf.low_confidence_inflation = trk.num("inflation", cfg.ukf.low_confidence_inflation);
  cfg.ukf.rank1_gap_threshold = trk.num("rank1_gap_threshold", cfg.ukf.rank1_gap_threshold);
  cfg.ukf.reset_after_missing =
      static_cast<int>(trk.integer("reset_after_missing", cfg.ukf.reset_after_missing));
  trk.check_all_used();

  const SectionView exp(sections, "experiment");
  cfg.name = exp.str("name", "default");
  cfg.runs = static_cast<int>(exp.integer("runs", 100));
  cfg.seed = static_cast<std::uint64_t>(exp.integer("seed", 1));
  cfg.min_rsus = static_cast<int>(exp.integer("min_rsus", 3));
  cfg.sdp_tol = exp.num("sdp_tol", 1e-7);
  cfg.sdp_max_iter = static_cast<int>(exp.integer("sdp_max_iter", 100));
  if (exp.has("methods")) {
    cfg.methods.clear();
    for (const auto& name : exp.list("methods")) cfg.methods.push_back(runner::method_from_name(name));
  }
  exp.check_all_used();

  if (sections.count("sweep")) {
    const SectionView sw(sections, "sweep");
    runner::SweepSpec spec;
    spec.parameter = sw.str("parameter", "");
    if (spec.parameter.empty()) throw ConfigError("config: [sweep] needs a parameter");
    if (spec.parameter == "layout" || spec.parameter == "trajectory") {
      spec.labels = sw.list("values");
    } else {
      spec.values = sw.num_list("values");
    }
    sw.check_all_used();
    cfg.sweep = std::move(spec);
  }

  cfg.validate();
  return cfg;
}

runner::ExperimentConfig load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  return load(in);
}

}  // namespace cv2xloca::config
