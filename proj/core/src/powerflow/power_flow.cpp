#include "pvfair/powerflow/power_flow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <fmt/format.h>

#include "pvfair/error.hpp"

namespace pvfair::powerflow {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

struct Tree {
  std::vector<std::size_t> order;        // energized buses, parents before children
  std::vector<std::size_t> parent_line;  // kNone for slacks and de-energized buses
  std::vector<std::size_t> parent_bus;
  std::vector<bool> energized;
};

Tree build_tree(const netmodel::Network& net, const netmodel::Topology& topo) {
  const std::size_t n = net.bus_count();
  std::vector<std::vector<std::size_t>> incident(n);
  for (std::size_t e = 0; e < net.line_count(); ++e) {
    if (!topo.closed[e]) continue;
    incident[net.lines[e].from].push_back(e);
    incident[net.lines[e].to].push_back(e);
  }
  Tree t;
  t.parent_line.assign(n, kNone);
  t.parent_bus.assign(n, kNone);
  t.energized.assign(n, false);
  std::deque<std::size_t> queue;
  for (auto s : net.slack_buses) {
    t.energized[s] = true;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    t.order.push_back(u);
    for (auto e : incident[u]) {
      if (e == t.parent_line[u]) continue;
      const auto& ln = net.lines[e];
      const auto w = ln.from == u ? ln.to : ln.from;
      if (t.energized[w]) {
        throw ValidationError(fmt::format("closed lines form a loop through line {}", e + 1));
      }
      t.energized[w] = true;
      t.parent_line[w] = e;
      t.parent_bus[w] = u;
      queue.push_back(w);
    }
  }
  return t;
}

}  // namespace

Complex PowerFlowState::total_losses() const {
  Complex sum{};
  for (std::size_t e = 0; e < s_from.size(); ++e) sum += s_from[e] + s_to[e];
  return sum;
}

std::vector<Complex> bus_injections(const netmodel::Network& net, double load_scale_p,
                                    double load_scale_q, const std::vector<double>& pv_p,
                                    const std::vector<double>& pv_q) {
  if (pv_p.size() != net.pv_plants.size() || pv_q.size() != net.pv_plants.size()) {
    throw ValidationError("PV setpoint vectors do not match the plant count");
  }
  std::vector<Complex> s(net.bus_count());
  for (std::size_t i = 0; i < net.bus_count(); ++i) {
    s[i] = -Complex(load_scale_p * net.buses[i].load_p, load_scale_q * net.buses[i].load_q);
  }
  for (std::size_t k = 0; k < net.pv_plants.size(); ++k) {
    s[net.pv_plants[k].bus] += Complex(pv_p[k], pv_q[k]);
  }
  return s;
}

std::vector<Complex> bus_injections(const netmodel::Network& net, const std::vector<Complex>& load,
                                    const std::vector<double>& pv_p,
                                    const std::vector<double>& pv_q) {
  if (load.size() != net.bus_count()) throw ValidationError("load vector does not match bus count");
  if (pv_p.size() != net.pv_plants.size() || pv_q.size() != net.pv_plants.size()) {
    throw ValidationError("PV setpoint vectors do not match the plant count");
  }
  std::vector<Complex> s(net.bus_count());
  for (std::size_t i = 0; i < net.bus_count(); ++i) s[i] = -load[i];
  for (std::size_t k = 0; k < net.pv_plants.size(); ++k) {
    s[net.pv_plants[k].bus] += Complex(pv_p[k], pv_q[k]);
  }
  return s;
}

PowerFlowState solve_ac_power_flow(const netmodel::Network& net, const netmodel::Topology& topo,
                                   const std::vector<Complex>& injections,
                                   const PowerFlowOptions& opts) {
  const std::size_t n = net.bus_count();
  if (injections.size() != n) throw ValidationError("injection vector does not match bus count");
  if (topo.closed.size() != net.line_count()) {
    throw ValidationError("topology size does not match the network");
  }
  const Tree tree = build_tree(net, topo);

  std::vector<Complex> shunt(n, Complex{});
  std::vector<Complex> z_parent(n, Complex{});
  for (std::size_t e = 0; e < net.line_count(); ++e) {
    if (!topo.closed[e]) continue;
    const auto& ln = net.lines[e];
    shunt[ln.from] += Complex(0.0, ln.b / 2.0);
    shunt[ln.to] += Complex(0.0, ln.b / 2.0);
  }
  for (auto i : tree.order) {
    if (tree.parent_line[i] == kNone) continue;
    const auto& ln = net.lines[tree.parent_line[i]];
    z_parent[i] = Complex(ln.r, ln.x);
  }

  std::vector<Complex> voltage(n, Complex{});
  for (auto i : tree.order) voltage[i] = Complex(1.0, 0.0);
  std::vector<Complex> branch_current(n, Complex{});  // series current parent -> i

  PowerFlowState st;
  double delta = 0.0;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    // Backward sweep: accumulate currents towards the slacks.
    std::fill(branch_current.begin(), branch_current.end(), Complex{});
    for (auto rit = tree.order.rbegin(); rit != tree.order.rend(); ++rit) {
      const auto i = *rit;
      if (tree.parent_line[i] == kNone) continue;
      branch_current[i] += std::conj(-injections[i] / voltage[i]) + shunt[i] * voltage[i];
      branch_current[tree.parent_bus[i]] += branch_current[i];
    }
    // Forward sweep: update voltages away from the slacks.
    delta = 0.0;
    for (auto i : tree.order) {
      if (tree.parent_line[i] == kNone) continue;
      const Complex updated = voltage[tree.parent_bus[i]] - z_parent[i] * branch_current[i];
      delta = std::max(delta, std::abs(updated - voltage[i]));
      voltage[i] = updated;
    }
    if (!std::isfinite(delta)) break;
    if (delta < opts.tolerance) {
      ++it;
      break;
    }
  }
  if (!(delta < opts.tolerance)) {
    throw DivergenceError(
        fmt::format("power flow did not converge after {} sweeps (last |dV| = {:.3e})", it, delta),
        delta);
  }
  // Child currents were accumulated into the slack's slot; recompute the
  // final series currents for flow reporting with converged voltages.
  std::fill(branch_current.begin(), branch_current.end(), Complex{});
  for (auto rit = tree.order.rbegin(); rit != tree.order.rend(); ++rit) {
    const auto i = *rit;
    if (tree.parent_line[i] == kNone) continue;
    branch_current[i] += std::conj(-injections[i] / voltage[i]) + shunt[i] * voltage[i];
    branch_current[tree.parent_bus[i]] += branch_current[i];
  }

  st.voltage = voltage;
  st.v.resize(n);
  st.theta.resize(n);
  st.energized = tree.energized;
  st.s_inj.assign(n, Complex{});
  for (std::size_t i = 0; i < n; ++i) {
    st.v[i] = std::abs(voltage[i]);
    st.theta[i] = tree.energized[i] ? std::arg(voltage[i]) : 0.0;
    if (tree.energized[i]) st.s_inj[i] = injections[i];
  }
  for (auto s : net.slack_buses) {
    // Slack slot holds the sum of its children's series currents.
    st.s_inj[s] = voltage[s] * std::conj(branch_current[s] + shunt[s] * voltage[s]);
  }
  st.s_from.assign(net.line_count(), Complex{});
  st.s_to.assign(net.line_count(), Complex{});
  for (auto i : tree.order) {
    const auto e = tree.parent_line[i];
    if (e == kNone) continue;
    const auto& ln = net.lines[e];
    const auto p = tree.parent_bus[i];
    const Complex half_b(0.0, ln.b / 2.0);
    const Complex into_parent_end = voltage[p] * std::conj(branch_current[i] + half_b * voltage[p]);
    const Complex into_child_end = voltage[i] * std::conj(-branch_current[i] + half_b * voltage[i]);
    if (ln.from == p) {
      st.s_from[e] = into_parent_end;
      st.s_to[e] = into_child_end;
    } else {
      st.s_to[e] = into_parent_end;
      st.s_from[e] = into_child_end;
    }
  }
  st.iterations = it;
  st.mismatch = delta;
  return st;
}

}  // namespace pvfair::powerflow
