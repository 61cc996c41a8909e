#include "pvfair/powerflow/sensitivity.hpp"

#include <cmath>

#include "pvfair/error.hpp"
#include "pvfair/netmodel/admittance.hpp"

namespace pvfair::powerflow {

SensitivityMatrices compute_sensitivities(const netmodel::Network& net,
                                          const netmodel::Topology& topo,
                                          const PowerFlowState& state) {
  const std::size_t n = net.bus_count();
  if (state.bus_count() != n) throw ValidationError("state does not match the network");

  // Unknown buses: energized and not slack.
  std::vector<Eigen::Index> pos(n, -1);
  std::vector<std::size_t> pq;
  for (std::size_t i = 0; i < n; ++i) {
    if (state.energized[i] && !net.is_slack(i)) {
      pos[i] = static_cast<Eigen::Index>(pq.size());
      pq.push_back(i);
    }
  }
  SensitivityMatrices out{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
  const auto npq = static_cast<Eigen::Index>(pq.size());
  if (npq == 0) return out;

  const netmodel::ComplexMatrix y = netmodel::build_admittance(net, topo);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = state.voltage[i];
  const Eigen::VectorXcd current = y * v;

  // dS/dθ = j diag(V) conj(diag(I) - Y diag(V))
  // dS/d|V| = diag(V) conj(Y diag(V/|V|)) + conj(diag(I)) diag(V/|V|)
  Eigen::MatrixXd jac(2 * npq, 2 * npq);
  for (Eigen::Index a = 0; a < npq; ++a) {
    const auto i = static_cast<Eigen::Index>(pq[static_cast<std::size_t>(a)]);
    for (Eigen::Index b = 0; b < npq; ++b) {
      const auto k = static_cast<Eigen::Index>(pq[static_cast<std::size_t>(b)]);
      const Complex unit_k = v(k) / std::abs(v(k));
      Complex ds_dtheta = Complex(0.0, 1.0) * v(i) * std::conj(-y(i, k) * v(k));
      Complex ds_dvm = v(i) * std::conj(y(i, k) * unit_k);
      if (i == k) {
        ds_dtheta += Complex(0.0, 1.0) * v(i) * std::conj(current(i));
        ds_dvm += std::conj(current(i)) * unit_k;
      }
      jac(a, b) = ds_dtheta.real();
      jac(a, npq + b) = ds_dvm.real();
      jac(npq + a, b) = ds_dtheta.imag();
      jac(npq + a, npq + b) = ds_dvm.imag();
    }
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    throw DivergenceError("singular power-flow Jacobian at the operating point", rcond);
  }
  const Eigen::MatrixXd inv = lu.inverse();
  for (Eigen::Index a = 0; a < npq; ++a) {
    const auto m = static_cast<Eigen::Index>(pq[static_cast<std::size_t>(a)]);
    for (Eigen::Index b = 0; b < npq; ++b) {
      const auto l = static_cast<Eigen::Index>(pq[static_cast<std::size_t>(b)]);
      out.kp(m, l) = inv(npq + a, b);
      out.kq(m, l) = inv(npq + a, npq + b);
    }
  }
  return out;
}

SensitivityMatrices finite_difference_sensitivities(const netmodel::Network& net,
                                                    const netmodel::Topology& topo,
                                                    const std::vector<Complex>& injections,
                                                    double h, std::vector<std::size_t> columns) {
  if (!(h > 0.0)) throw ValidationError("finite-difference step must be positive");
  const std::size_t n = net.bus_count();
  if (columns.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!net.is_slack(i)) columns.push_back(i);
    }
  }
  const PowerFlowOptions tight{1e-14, 1000};
  SensitivityMatrices out{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
  auto column = [&](std::size_t l, Complex dir, Eigen::MatrixXd& target) {
    auto plus = injections;
    auto minus = injections;
    plus[l] += h * dir;
    minus[l] -= h * dir;
    const auto up = solve_ac_power_flow(net, topo, plus, tight);
    const auto down = solve_ac_power_flow(net, topo, minus, tight);
    for (std::size_t m = 0; m < n; ++m) {
      if (net.is_slack(m)) continue;
      target(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(l)) =
          (up.v[m] - down.v[m]) / (2.0 * h);
    }
  };
  for (auto l : columns) {
    if (l >= n) throw ValidationError("sensitivity column out of range");
    if (net.is_slack(l)) continue;
    column(l, Complex(1.0, 0.0), out.kp);
    column(l, Complex(0.0, 1.0), out.kq);
  }
  return out;
}

}  // namespace pvfair::powerflow
