#pragma once

#include <stdexcept>
#include <string>

namespace stheat {

/// Raised for malformed arguments (bad counts, non-increasing nodes, size mismatches).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when two levels cannot be related (non-nested nodes or grids).
class UnsupportedConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverDiverged : public std::runtime_error {
 public:
  SolverDiverged(const std::string& what, int cycles, double residual)
      : std::runtime_error(what), cycles_(cycles), residual_(residual) {}
  int cycles() const { return cycles_; }
  double residual() const { return residual_; }

 private:
  int cycles_;
  double residual_;
};

class DegenerateReference : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A time rank violated the message protocol (missing, duplicated or orphaned message).
class ProtocolViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stheat
