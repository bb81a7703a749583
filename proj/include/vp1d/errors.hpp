#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vp1d {

/// Base of every error the library throws. Callers that only need a
/// message can catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Non-finite or otherwise unusable sampled data.
class InvalidProfile : public Error {
 public:
  using Error::Error;
};

/// f0 = F - g0 went negative at some grid node.
class PositivityViolation : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// A characteristic produced a non-finite state.
class IntegrationFailure : public Error {
 public:
  using Error::Error;
};

/// The monitored triple norm exceeds the continuation cap.
class ContinuationRefused : public Error {
 public:
  using Error::Error;
};

/// Two solutions that cannot be compared (grid or background mismatch).
class InvalidComparison : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// Every problem found while validating a run configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& problems) {
    std::string out = "invalid configuration:";
    for (const auto& p : problems) out += "\n  - " + p;
    return out;
  }
  std::vector<std::string> problems_;
};

/// An expected output file of an earlier run is absent or unreadable.
class MissingArtifact : public Error {
 public:
  using Error::Error;
};

class IoFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace vp1d
