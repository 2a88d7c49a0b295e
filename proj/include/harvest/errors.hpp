#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace harvest {

/// Malformed configuration text: bad JSON, missing key, wrong type.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// A well-formed scenario that breaks one or more invariants.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> messages)
      : std::runtime_error(join(messages)), messages_(std::move(messages)) {}
  const std::vector<std::string>& messages() const noexcept { return messages_; }

 private:
  static std::string join(const std::vector<std::string>& m) {
    std::string out;
    for (const auto& s : m) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }
  std::vector<std::string> messages_;
};

/// Base class for failures that happen while integrating or differentiating.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The curve is (momentarily) stationary in its phase, so unit speed is undefined.
class DegenerateTrajectory : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// An endogenous event whose guard is crossed tangentially; tau' is undefined.
class TangentialCrossing : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace harvest
