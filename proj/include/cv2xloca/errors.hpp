#pragma once

#include <stdexcept>
#include <string>

namespace cv2xloca {

// Invalid scenario/channel/experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside an operation's mathematical domain.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Out-of-order timestamps fed to a sequential consumer.
class SequencingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed measurement record. Carries the offending field name and, when
// known, the 1-based line number within the source stream.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::string field = {}, long line = 0)
      : std::runtime_error(format(message, field, line)),
        field_(std::move(field)),
        line_(line) {}

  const std::string& field() const { return field_; }
  long line() const { return line_; }

 private:
  static std::string format(const std::string& message, const std::string& field, long line) {
    std::string out = message;
    if (!field.empty()) out += " (field: " + field + ")";
    if (line > 0) out += " at line " + std::to_string(line);
    return out;
  }

  std::string field_;
  long line_;
};

}  // namespace cv2xloca
