#pragma once

#include <complex>

#include <Eigen/Dense>

#include "pvfair/netmodel/network.hpp"

namespace pvfair::netmodel {

using ComplexMatrix = Eigen::MatrixXcd;

/// Compound bus admittance matrix of the closed lines: each closed line adds
/// its series admittance 1/(r + jx) and half of its charging susceptance at
/// both ends. Open lines contribute nothing.
ComplexMatrix build_admittance(const Network& net, const Topology& topo);

}  // namespace pvfair::netmodel
