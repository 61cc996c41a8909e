#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "pvfair/netmodel/network.hpp"

namespace pvfair::powerflow {

using Complex = std::complex<double>;

struct PowerFlowOptions {
  double tolerance = 1e-8;  ///< max |ΔV| between sweeps, p.u.
  int max_iterations = 100;
};

/// Converged AC operating point of a radial network.
///
/// Injections follow the generator convention (positive = power entering the
/// network). `s_from[e]` / `s_to[e]` are the complex powers entering line e
/// at its `from` / `to` terminal; both are zero for open lines.
struct PowerFlowState {
  std::vector<Complex> voltage;
  std::vector<double> v;
  std::vector<double> theta;
  std::vector<Complex> s_inj;
  std::vector<Complex> s_from;
  std::vector<Complex> s_to;
  std::vector<bool> energized;
  int iterations = 0;
  double mismatch = 0.0;

  std::size_t bus_count() const { return v.size(); }
  /// Sum of s_from + s_to over all lines (series and shunt losses).
  Complex total_losses() const;
};

/// Per-bus net injection for given PV outputs and load scaling:
/// s = -(load_scale_p * load_p + j load_scale_q * load_q) + pv.
/// `pv_p` / `pv_q` are indexed like Network::pv_plants.
std::vector<Complex> bus_injections(const netmodel::Network& net, double load_scale_p,
                                    double load_scale_q, const std::vector<double>& pv_p,
                                    const std::vector<double>& pv_q);

/// Same with an explicit demand per bus (consumption positive).
std::vector<Complex> bus_injections(const netmodel::Network& net, const std::vector<Complex>& load,
                                    const std::vector<double>& pv_p,
                                    const std::vector<double>& pv_q);

/// Backward/forward sweep on the energized trees of `topo`. Slack buses are
/// held at 1∠0; buses not reachable from a slack are reported de-energized
/// with zero voltage and zero injection.
///
/// Throws ValidationError if the closed lines contain a loop and
/// DivergenceError if the sweep does not settle within the iteration cap.
PowerFlowState solve_ac_power_flow(const netmodel::Network& net, const netmodel::Topology& topo,
                                   const std::vector<Complex>& injections,
                                   const PowerFlowOptions& opts = {});

}  // namespace pvfair::powerflow
