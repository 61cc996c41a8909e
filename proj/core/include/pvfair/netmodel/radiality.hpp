#pragma once

#include <cstddef>
#include <string>

#include "pvfair/netmodel/network.hpp"

namespace pvfair::netmodel {

enum class RadialityViolation {
  kNone,
  kSizeMismatch,
  kFixedLineOpen,     ///< a line without a switch is open
  kOrientationSum,    ///< d_forward + d_backward differs from the switch status
  kFractional,        ///< an orientation variable is not 0 or 1
  kSlackFed,          ///< a slack bus has an incoming orientation
  kParentCount,       ///< a non-slack bus has != 1 incoming orientation
  kCycle,
  kIsland,
};

struct RadialityReport {
  RadialityViolation kind = RadialityViolation::kNone;
  std::size_t bus = 0;   ///< offending bus, when the violation is bus-specific
  std::size_t line = 0;  ///< offending line, when the violation is line-specific
  std::string message;

  bool ok() const { return kind == RadialityViolation::kNone; }
  explicit operator bool() const { return ok(); }
};

/// Checks that the closed lines form a forest spanning every bus, with one
/// tree per slack bus, oriented away from the slacks: each non-slack bus has
/// exactly one incoming orientation and slacks have none. `tol` bounds the
/// distance of orientation values from {0, 1}.
RadialityReport validate_radiality(const Network& net, const Topology& topo, double tol = 1e-6);

const char* to_string(RadialityViolation v);

}  // namespace pvfair::netmodel
