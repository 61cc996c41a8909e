#include "pvfair/netmodel/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "pvfair/error.hpp"

namespace pvfair::netmodel {

double PvPlant::zeta() const {
  return std::sqrt((1.0 - pf_min * pf_min) / (pf_min * pf_min));
}

std::optional<std::size_t> Network::find_bus(int id) const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].id == id) return i;
  }
  return std::nullopt;
}

std::size_t Network::bus_index(int id) const {
  auto idx = find_bus(id);
  if (!idx) throw ValidationError("unknown bus id " + std::to_string(id));
  return *idx;
}

bool Network::is_slack(std::size_t bus) const {
  return std::find(slack_buses.begin(), slack_buses.end(), bus) != slack_buses.end();
}

std::vector<std::size_t> Network::switchable_lines() const {
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < lines.size(); ++e) {
    if (lines[e].switchable) out.push_back(e);
  }
  return out;
}

std::optional<std::size_t> Network::find_line(std::size_t a, std::size_t b) const {
  for (std::size_t e = 0; e < lines.size(); ++e) {
    const auto& ln = lines[e];
    if ((ln.from == a && ln.to == b) || (ln.from == b && ln.to == a)) return e;
  }
  return std::nullopt;
}

void Network::validate() const {
  if (!(base_power > 0.0)) throw ValidationError("base power must be positive");
  if (!(limits.v_min < limits.v_max)) throw ValidationError("v_min must be below v_max");
  std::set<int> ids;
  for (const auto& b : buses) {
    if (!ids.insert(b.id).second) {
      throw ValidationError("duplicate bus id " + std::to_string(b.id));
    }
    if (!std::isfinite(b.load_p) || !std::isfinite(b.load_q)) {
      throw ValidationError("non-finite load at bus " + std::to_string(b.id));
    }
  }
  if (slack_buses.empty()) throw ValidationError("network has no slack bus");
  for (auto s : slack_buses) {
    if (s >= buses.size()) throw ValidationError("slack bus index out of range");
  }
  for (std::size_t e = 0; e < lines.size(); ++e) {
    const auto& ln = lines[e];
    const std::string tag = "line " + std::to_string(e + 1);
    if (ln.from >= buses.size() || ln.to >= buses.size()) {
      throw ValidationError(tag + " references a missing bus");
    }
    if (ln.from == ln.to) throw ValidationError(tag + " is a self loop");
    if (ln.r < 0.0) throw ValidationError(tag + " has negative resistance");
    if (ln.r == 0.0 && ln.x == 0.0) throw ValidationError(tag + " has zero impedance");
    if (!(ln.i_max > 0.0) || !(ln.p_max > 0.0) || !(ln.q_max > 0.0)) {
      throw ValidationError(tag + " needs positive ampacity and flow bounds");
    }
  }
  std::set<std::size_t> pv_buses;
  for (const auto& pv : pv_plants) {
    if (pv.bus >= buses.size()) throw ValidationError("PV plant on a missing bus");
    if (!(pv.s_max > 0.0)) throw ValidationError("PV capacity must be positive");
    if (!(pv.pf_min > 0.0 && pv.pf_min <= 1.0)) {
      throw ValidationError("PV minimum power factor must lie in (0, 1]");
    }
    if (!pv_buses.insert(pv.bus).second) {
      throw ValidationError("two PV plants on bus " + std::to_string(buses[pv.bus].id));
    }
  }
}

std::size_t Topology::closed_count() const {
  return static_cast<std::size_t>(std::count(closed.begin(), closed.end(), true));
}

Topology orient_topology(const Network& net, const std::vector<bool>& closed) {
  const std::size_t n = net.bus_count();
  const std::size_t m = net.line_count();
  if (closed.size() != m) throw ValidationError("topology size does not match the network");

  Topology topo;
  topo.closed = closed;
  topo.d_forward.assign(m, 0.0);
  topo.d_backward.assign(m, 0.0);

  std::vector<std::vector<std::size_t>> incident(n);
  for (std::size_t e = 0; e < m; ++e) {
    if (!closed[e]) continue;
    incident[net.lines[e].from].push_back(e);
    incident[net.lines[e].to].push_back(e);
  }

  std::vector<bool> seen(n, false);
  std::vector<bool> used(m, false);
  std::deque<std::size_t> queue;
  for (auto s : net.slack_buses) {
    seen[s] = true;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    for (auto e : incident[u]) {
      if (used[e]) continue;
      const auto& ln = net.lines[e];
      const auto w = ln.from == u ? ln.to : ln.from;
      if (seen[w]) continue;
      used[e] = true;
      seen[w] = true;
      if (ln.from == u) {
        topo.d_forward[e] = 1.0;
      } else {
        topo.d_backward[e] = 1.0;
      }
      queue.push_back(w);
    }
  }
  return topo;
}

Topology case_topology(const Network& net) {
  std::vector<bool> closed(net.line_count());
  for (std::size_t e = 0; e < net.line_count(); ++e) {
    closed[e] = !net.lines[e].switchable || net.lines[e].closed_in_case;
  }
  return orient_topology(net, closed);
}

Network augment_pv(const Network& net, const std::vector<PvPlacement>& placements) {
  Network out = net;
  for (const auto& p : placements) {
    const auto idx = net.find_bus(p.bus_id);
    if (!idx) throw ValidationError("PV placement on unknown bus " + std::to_string(p.bus_id));
    if (!(p.capacity > 0.0)) {
      throw ValidationError("PV capacity at bus " + std::to_string(p.bus_id) + " must be positive");
    }
    for (const auto& existing : out.pv_plants) {
      if (existing.bus == *idx) {
        throw ValidationError("duplicate PV plant on bus " + std::to_string(p.bus_id));
      }
    }
    out.pv_plants.push_back(PvPlant{*idx, p.capacity, p.pf_min});
  }
  return out;
}

}  // namespace pvfair::netmodel
