#pragma once

#include <string>
#include <vector>

#include "pvfair/netmodel/network.hpp"

namespace pvfair::netmodel {

/// Extra branch declared in a grid config (e.g. tie lines that a case file
/// does not contain). Impedances are in ohms.
struct ExtraLine {
  int from = 0;
  int to = 0;
  double r_ohm = 0.0;
  double x_ohm = 0.0;
  bool closed = false;
};

/// Side-car description of a study grid: which case file to load, which
/// lines carry switches, where the PV plants sit, and the operating limits.
///
/// TOML layout:
///
///     case = "../cases/case33bw.m"      # relative to the config file
///     v_min = 0.95
///     v_max = 1.05
///     switchable = [[21, 8], [9, 15]]   # bus-id pairs
///     [line_defaults]
///     i_max = 0.5                       # p.u., applied to lines without a rating
///     p_max = 0.5
///     q_max = 0.5
///     [[extra_line]]
///     from = 11
///     to = 43
///     r_ohm = 0.5
///     x_ohm = 0.5
///     [[pv]]
///     bus = 18
///     capacity = 0.1                    # p.u. of base power
///     pf_min = 0.95
struct GridConfig {
  std::string case_path;
  VoltageLimits limits;
  double default_i_max = 1.0;
  double default_p_max = 1.0;
  double default_q_max = 1.0;
  std::vector<std::pair<int, int>> switchable;
  std::vector<ExtraLine> extra_lines;
  std::vector<PvPlacement> pv;
};

GridConfig parse_grid_config(const std::string& toml_text, const std::string& base_dir = ".");
GridConfig load_grid_config(const std::string& path);

/// Loads the case file and applies the config on top of it.
Network build_network(const GridConfig& cfg);

/// Applies the config to an already parsed network.
Network apply_grid_config(Network net, const GridConfig& cfg);

}  // namespace pvfair::netmodel
