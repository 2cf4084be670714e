#pragma once

#include <iosfwd>
#include <string>

#include "cv2xloca/runner.hpp"

namespace cv2xloca::config {

// Loads an experiment from the INI-style config format documented in
// configs/README: [road], [rsu], [channel], [trajectory], [correction],
// [tracking], [experiment] and optional [sweep] sections; '#' comments;
// space- or comma-separated lists. Unknown keys are rejected.
runner::ExperimentConfig load(std::istream& in);
runner::ExperimentConfig load_file(const std::string& path);

}  // namespace cv2xloca::config
