#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pvfair/netmodel/network.hpp"
#include "pvfair/powerflow/power_flow.hpp"

namespace pvfair::powerflow {

/// Voltage-magnitude sensitivities at an operating point. Entry (m, l) of
/// `kp` is ∂|V_m|/∂p_l and of `kq` is ∂|V_m|/∂q_l, with injections in the
/// generator convention. Rows and columns of slack and de-energized buses
/// are zero.
struct SensitivityMatrices {
  Eigen::MatrixXd kp;
  Eigen::MatrixXd kq;
};

/// Exact partial derivatives from the polar power-balance Jacobian of the
/// energized buses, evaluated at `state` on the compound admittance matrix
/// of `topo`. Throws DivergenceError when the Jacobian is singular.
SensitivityMatrices compute_sensitivities(const netmodel::Network& net,
                                          const netmodel::Topology& topo,
                                          const PowerFlowState& state);

/// Central differences of solve_ac_power_flow around `injections` with step
/// `h`. Only the listed columns are evaluated (all non-slack buses when
/// empty); others are left zero. Power flows run with a tight tolerance so
/// that the sweep error stays well below the difference quotient.
SensitivityMatrices finite_difference_sensitivities(const netmodel::Network& net,
                                                    const netmodel::Topology& topo,
                                                    const std::vector<Complex>& injections,
                                                    double h = 1e-6,
                                                    std::vector<std::size_t> columns = {});

}  // namespace pvfair::powerflow
