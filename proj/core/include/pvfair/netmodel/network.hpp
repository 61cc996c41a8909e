#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace pvfair::netmodel {

// All electrical quantities below are per-unit on the network's bases.
// Buses and lines are referenced by their position in Network::buses /
// Network::lines; Bus::id keeps the identifier used in the case file.

struct Bus {
  int id = 0;
  double load_p = 0.0;  ///< nominal active demand
  double load_q = 0.0;  ///< nominal reactive demand
};

struct Line {
  std::size_t from = 0;
  std::size_t to = 0;
  double r = 0.0;
  double x = 0.0;
  double b = 0.0;  ///< total line charging susceptance
  bool switchable = false;
  double i_max = 1.0;  ///< ampacity
  double p_max = 1.0;  ///< active flow bound used by the reconfiguration model
  double q_max = 1.0;  ///< reactive flow bound used by the reconfiguration model
  bool closed_in_case = true;  ///< status column of the case file
  double rate_a = 0.0;         ///< rating column of the case file (MVA, 0 = none)
};

struct PvPlant {
  std::size_t bus = 0;
  double s_max = 0.0;    ///< converter apparent-power capacity
  double pf_min = 0.95;  ///< minimum operating power factor

  /// Ratio |q|/p permitted by the power-factor limit.
  double zeta() const;
};

struct VoltageLimits {
  double v_min = 0.95;
  double v_max = 1.05;
};

struct Network {
  std::string name;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<PvPlant> pv_plants;
  std::vector<std::size_t> slack_buses;
  double base_power = 10.0;    ///< MVA
  double base_voltage = 12.66; ///< kV
  VoltageLimits limits;

  std::size_t bus_count() const { return buses.size(); }
  std::size_t line_count() const { return lines.size(); }

  /// Position of the bus with case-file identifier `id`, if any.
  std::optional<std::size_t> find_bus(int id) const;
  /// Same as find_bus but throws ValidationError for unknown ids.
  std::size_t bus_index(int id) const;

  bool is_slack(std::size_t bus) const;
  std::vector<std::size_t> switchable_lines() const;
  /// First line joining the two buses (either orientation), if any.
  std::optional<std::size_t> find_line(std::size_t a, std::size_t b) const;

  /// Throws ValidationError when a structural invariant is broken.
  void validate() const;
};

/// Switch states plus the orientation variables of the radiality model.
///
/// `closed[e]` is the status of line e (non-switchable lines are always
/// closed). `d_forward[e]` is the orientation from lines[e].from to
/// lines[e].to (1 means `from` feeds `to`), `d_backward[e]` the reverse.
struct Topology {
  std::vector<bool> closed;
  std::vector<double> d_forward;
  std::vector<double> d_backward;

  std::size_t closed_count() const;
  bool operator==(const Topology&) const = default;
};

/// Orients the closed lines away from the slack buses by breadth-first
/// search. Lines that are closed but not part of the search tree (they close
/// a loop) and lines of unreachable islands keep zero orientation.
Topology orient_topology(const Network& net, const std::vector<bool>& closed);

/// The configuration stored in the case file status column, with every
/// non-switchable line forced closed.
Topology case_topology(const Network& net);

/// Adds PV plants at the given bus identifiers with the given capacities.
/// Throws ValidationError on unknown buses, duplicate plants, or
/// non-positive capacities.
struct PvPlacement {
  int bus_id = 0;
  double capacity = 0.0;
  double pf_min = 0.95;
};
Network augment_pv(const Network& net, const std::vector<PvPlacement>& placements);

}  // namespace pvfair::netmodel
