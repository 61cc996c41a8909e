#pragma once

#include <string>
#include <vector>

#include "pvfair/netmodel/grid_config.hpp"
#include "pvfair/netmodel/network.hpp"

namespace testing {

inline std::string data_path(const std::string& rel) { return std::string(PVFAIR_DATA_DIR) + "/" + rel; }
inline std::string fixture_path(const std::string& rel) {
  return std::string(PVFAIR_TEST_FIXTURES) + "/" + rel;
}

inline pvfair::netmodel::Network case33() {
  return pvfair::netmodel::build_network(pvfair::netmodel::load_grid_config(data_path("grids/case33_pv.toml")));
}

/// Slack bus 1 feeding bus 2 over r + jx, optional PV at bus 2.
inline pvfair::netmodel::Network two_bus(double r, double x, double pv_cap = 0.0, double pf_min = 0.95,
                                         double load_p = 0.0, double load_q = 0.0) {
  using namespace pvfair::netmodel;
  Network n;
  n.name = "two-bus";
  n.buses = {Bus{1, 0.0, 0.0}, Bus{2, load_p, load_q}};
  Line l;
  l.from = 0;
  l.to = 1;
  l.r = r;
  l.x = x;
  n.lines = {l};
  n.slack_buses = {0};
  if (pv_cap > 0.0) n.pv_plants = {PvPlant{1, pv_cap, pf_min}};
  return n;
}

/// Radial chain 1-2-...-n with identical lines.
inline pvfair::netmodel::Network chain(std::size_t n, double r, double x, double load_p = 0.0) {
  using namespace pvfair::netmodel;
  Network net;
  net.name = "chain";
  for (std::size_t i = 0; i < n; ++i) net.buses.push_back(Bus{static_cast<int>(i + 1), i ? load_p : 0.0, 0.0});
  for (std::size_t i = 0; i + 1 < n; ++i) {
    Line l;
    l.from = i;
    l.to = i + 1;
    l.r = r;
    l.x = x;
    net.lines.push_back(l);
  }
  net.slack_buses = {0};
  return net;
}

}  // namespace testing
