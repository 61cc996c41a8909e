#pragma once

// Seeded 12-bus test feeders with eight switchable lines, small enough to
// enumerate every radial configuration.

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "pvfair/netmodel/network.hpp"
#include "pvfair/netmodel/radiality.hpp"
#include "pvfair/scenario/scenario.hpp"

namespace testing {

inline pvfair::netmodel::Network feeder12(std::uint64_t seed) {
  using namespace pvfair::netmodel;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> imp(0.01, 0.04), load(0.01, 0.04), cap(0.15, 0.35);
  Network net;
  net.name = "feeder12-" + std::to_string(seed);
  for (int i = 1; i <= 12; ++i) net.buses.push_back(Bus{i, i == 1 ? 0.0 : load(rng), 0.0});
  for (auto& b : net.buses) b.load_q = 0.4 * b.load_p;
  net.slack_buses = {0};
  std::set<std::pair<std::size_t, std::size_t>> used;
  auto add = [&](std::size_t a, std::size_t b, bool closed, bool sw) {
    Line l;
    l.from = a;
    l.to = b;
    l.r = imp(rng);
    l.x = 0.6 * l.r;
    l.closed_in_case = closed;
    l.switchable = sw;
    l.p_max = l.q_max = 1.0;
    l.i_max = 2.0;
    net.lines.push_back(l);
    used.insert({std::min(a, b), std::max(a, b)});
  };
  // Random tree: each bus hangs off one of the previous three.
  for (std::size_t i = 1; i < 12; ++i) {
    std::uniform_int_distribution<std::size_t> parent(i >= 3 ? i - 3 : 0, i - 1);
    add(parent(rng), i, true, false);
  }
  // Four sectionalizers on tree lines away from the substation.
  std::vector<std::size_t> tree(net.lines.size() - 1);
  for (std::size_t e = 0; e < tree.size(); ++e) tree[e] = e + 1;
  std::shuffle(tree.begin(), tree.end(), rng);
  for (int k = 0; k < 4; ++k) net.lines[tree[k]].switchable = true;
  // Four open ties between buses not yet joined.
  std::uniform_int_distribution<std::size_t> any(1, 11);
  while (net.switchable_lines().size() < 8) {
    const auto a = any(rng), b = any(rng);
    if (a == b || used.count({std::min(a, b), std::max(a, b)})) continue;
    add(a, b, false, true);
  }
  // Three PV plants on distinct buses.
  std::vector<std::size_t> buses{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  std::shuffle(buses.begin(), buses.end(), rng);
  for (int k = 0; k < 3; ++k) net.pv_plants.push_back(PvPlant{buses[k], cap(rng), 0.95});
  net.validate();
  return net;
}

/// Four hourly steps, two scenarios.
inline pvfair::scenario::ScenarioSet feeder12_scenarios() {
  pvfair::scenario::ProfileTriple a{{0.3, 1.0, 0.8, 0.1}, {0.6, 0.4, 0.5, 0.9}, {0.6, 0.4, 0.5, 0.9}, {}, {}};
  pvfair::scenario::ProfileTriple b{{0.2, 0.8, 0.9, 0.0}, {0.7, 0.5, 0.4, 1.0}, {0.7, 0.5, 0.4, 1.0}, {}, {}};
  pvfair::scenario::ScenarioSet s;
  s.scenarios = {a, b};
  s.realization = a;
  s.timestep_minutes = 60;
  return s;
}

/// Every switch assignment that yields a radial network.
inline std::vector<std::vector<bool>> radial_configurations(const pvfair::netmodel::Network& net) {
  using namespace pvfair::netmodel;
  const auto sw = net.switchable_lines();
  std::vector<std::vector<bool>> out;
  for (std::uint32_t mask = 0; mask < (1u << sw.size()); ++mask) {
    std::vector<bool> closed(net.line_count(), true);
    for (std::size_t k = 0; k < sw.size(); ++k) closed[sw[k]] = (mask >> k) & 1u;
    if (validate_radiality(net, orient_topology(net, closed)).ok()) out.push_back(closed);
  }
  return out;
}

}  // namespace testing
