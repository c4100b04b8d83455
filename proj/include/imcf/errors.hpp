#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace imcf {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A radius, potential value, or height outside the valid range of a warp.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed arguments: empty intervals, mismatched field shapes, bad config values.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// The operation does not exist for the given base kind or warp preset.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// A graph state that violates its own invariants (non-finite values, r outside the warp domain).
class StateError : public Error {
 public:
  StateError(const std::string& what, std::size_t node) : Error(what), node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

/// min F <= 0: the speed 1/F of the flow is undefined at `node`.
class MeanConvexityLoss : public StateError {
 public:
  MeanConvexityLoss(std::size_t node, double F)
      : StateError("loss of mean convexity: F = " + std::to_string(F) + " at node " + std::to_string(node), node),
        F_(F) {}
  double F() const noexcept { return F_; }

 private:
  double F_;
};

/// Configuration file problems; carries the offending line (0 when unknown) and key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0, std::string key = {})
      : Error(format(what, line, key)), line_(line), key_(std::move(key)) {}
  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  static std::string format(const std::string& what, int line, const std::string& key) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!key.empty()) out += "'" + key + "': ";
    return out + what;
  }
  int line_;
  std::string key_;
};

}  // namespace imcf
