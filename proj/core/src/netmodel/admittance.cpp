#include "pvfair/netmodel/admittance.hpp"

#include "pvfair/error.hpp"

namespace pvfair::netmodel {

ComplexMatrix build_admittance(const Network& net, const Topology& topo) {
  const auto n = static_cast<Eigen::Index>(net.bus_count());
  if (topo.closed.size() != net.line_count()) {
    throw ValidationError("topology size does not match the network");
  }
  ComplexMatrix y = ComplexMatrix::Zero(n, n);
  for (std::size_t e = 0; e < net.line_count(); ++e) {
    if (!topo.closed[e]) continue;
    const auto& ln = net.lines[e];
    const std::complex<double> z(ln.r, ln.x);
    if (std::abs(z) == 0.0) throw ValidationError("line " + std::to_string(e + 1) + " has |z| = 0");
    const std::complex<double> ys = 1.0 / z;
    const std::complex<double> ysh(0.0, ln.b / 2.0);
    const auto a = static_cast<Eigen::Index>(ln.from);
    const auto b = static_cast<Eigen::Index>(ln.to);
    y(a, a) += ys + ysh;
    y(b, b) += ys + ysh;
    y(a, b) -= ys;
    y(b, a) -= ys;
  }
  return y;
}

}  // namespace pvfair::netmodel
