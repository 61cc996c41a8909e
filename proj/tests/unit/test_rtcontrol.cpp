#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "pvfair/error.hpp"
#include "pvfair/powerflow/power_flow.hpp"
#include "pvfair/powerflow/sensitivity.hpp"
#include "pvfair/rtcontrol/controller.hpp"

using namespace pvfair;
using namespace pvfair::rtcontrol;

namespace {

RtStepInput flat_input(const netmodel::Network& net, std::vector<double> mpp, std::vector<double> weights) {
  RtStepInput in;
  in.topology = netmodel::case_topology(net);
  const std::vector<double> zero(net.pv_plants.size(), 0.0);
  in.prev_state = powerflow::solve_ac_power_flow(net, in.topology, powerflow::bus_injections(net, 0.0, 0.0, zero, zero));
  in.prev_p = zero;
  in.prev_q = zero;
  in.mpp_forecast = std::move(mpp);
  in.load_forecast.assign(net.bus_count(), 0.0);
  in.weights = std::move(weights);
  return in;
}

powerflow::SensitivityMatrices hand_sens(std::size_t n, double kp, double kq) {
  powerflow::SensitivityMatrices s;
  s.kp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  s.kq = s.kp;
  for (Eigen::Index i = 1; i < s.kp.rows(); ++i) {
    for (Eigen::Index j = 1; j < s.kp.cols(); ++j) {
      s.kp(i, j) = kp * static_cast<double>(std::min(i, j));
      s.kq(i, j) = kq * static_cast<double>(std::min(i, j));
    }
  }
  return s;
}

}  // namespace

TEST_CASE("single plant setpoint by hand") {
  // v = 1 + 0.1 p + 0.05 q ≤ 1.05 with q ≥ −ζp: p = 0.05 / (0.1 − 0.05ζ).
  const auto net = testing::two_bus(0.1, 0.05, 1.0, 0.95);
  const auto model = build_rt_step(net, flat_input(net, {0.9}, {1.0}), hand_sens(2, 0.1, 0.05));
  const auto sp = solve_rt_step(model);
  const double zeta = net.pv_plants[0].zeta();
  const double p = 0.05 / (0.1 - 0.05 * zeta);
  CHECK(sp.p[0] == doctest::Approx(p).epsilon(1e-7));
  CHECK(sp.q[0] == doctest::Approx(-zeta * p).epsilon(1e-7));
  CHECK(sp.curtailed[0] == doctest::Approx(0.9 - p).epsilon(1e-7));
  CHECK(sp.predicted_v[1] == doctest::Approx(1.05).epsilon(1e-9));
  CHECK(sp.binding_buses == std::vector<std::size_t>{1});
  CHECK_FALSE(sp.fallback);
}

TEST_CASE("no curtailment when the limit is slack") {
  const auto net = testing::two_bus(0.1, 0.05, 1.0, 0.95);
  const auto sp = solve_rt_step(build_rt_step(net, flat_input(net, {0.3}, {1.0}), hand_sens(2, 0.1, 0.05)));
  CHECK(sp.p[0] == doctest::Approx(0.3));
  CHECK(sp.curtailed[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(sp.binding_buses.empty());
}

TEST_CASE("MPP above the converter rating is capped") {
  const auto net = testing::two_bus(0.01, 0.0, 0.5, 0.95);
  const auto model = build_rt_step(net, flat_input(net, {0.8}, {1.0}), hand_sens(2, 0.01, 0.0));
  CHECK(model.mpp[0] == doctest::Approx(0.5));
  const auto sp = solve_rt_step(model);
  CHECK(sp.p[0] <= 0.5 + 1e-9);
  // The cap polygon circumscribes the circle.
  const double vertex = 0.5 / std::cos(std::numbers::pi / 12);
  CHECK(sp.p[0] * sp.p[0] + sp.q[0] * sp.q[0] <= vertex * vertex + 1e-9);
}

TEST_CASE("night steps are skipped with zero setpoints") {
  const auto net = testing::two_bus(0.1, 0.05, 1.0, 0.95);
  const auto sp = solve_rt_step(build_rt_step(net, flat_input(net, {0.0}, {1.0}), hand_sens(2, 0.1, 0.05)));
  CHECK(sp.skipped);
  CHECK(sp.p[0] == 0.0);
  CHECK(sp.q[0] == 0.0);
}

TEST_CASE("heavier weight is curtailed less") {
  // Plants at buses 2 and 3 of a chain share the voltage headroom at bus 3.
  auto net = testing::chain(3, 0.1, 0.0);
  net.pv_plants = {netmodel::PvPlant{1, 1.0, 1.0}, netmodel::PvPlant{2, 1.0, 1.0}};
  const auto sens = hand_sens(3, 0.1, 0.0);
  const auto a = solve_rt_step(build_rt_step(net, flat_input(net, {0.5, 0.5}, {1.0, 3.0}), sens));
  CHECK(a.curtailed[1] < a.curtailed[0]);
  const auto b = solve_rt_step(build_rt_step(net, flat_input(net, {0.5, 0.5}, {3.0, 1.0}), sens));
  CHECK(b.curtailed[0] < b.curtailed[1] + 1e-9);
}

TEST_CASE("equal weights share curtailment through the min-max pass") {
  // Both plants at the same bus: every split is weighted-optimal.
  auto net = testing::two_bus(0.1, 0.0);
  net.pv_plants = {netmodel::PvPlant{1, 1.0, 1.0}, netmodel::PvPlant{1, 1.0, 1.0}};
  const auto sp = solve_rt_step(build_rt_step(net, flat_input(net, {0.5, 0.5}, {1.0, 1.0}), hand_sens(2, 0.1, 0.0)));
  CHECK(sp.p[0] + sp.p[1] == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(sp.curtailed[0] == doctest::Approx(sp.curtailed[1]).epsilon(1e-7));
}

TEST_CASE("unreachable limits fall back to the least violation") {
  const auto net = testing::two_bus(0.1, 0.05, 1.0, 0.95, 0.0, 0.0);
  auto in = flat_input(net, {0.5}, {1.0});
  in.v_min = 1.2;
  in.v_max = 1.3;
  const auto sp = solve_rt_step(build_rt_step(net, in, hand_sens(2, 0.1, 0.05)));
  CHECK(sp.fallback);
  CHECK(sp.violation > 0.0);
  CHECK(sp.violating_buses == std::vector<std::size_t>{1});
}

TEST_CASE("fairness target equalizes normalized curtailment") {
  auto net = testing::two_bus(0.1, 0.0);
  net.pv_plants = {netmodel::PvPlant{1, 1.0, 1.0}, netmodel::PvPlant{1, 1.0, 1.0}};
  auto in = flat_input(net, {0.5, 0.5}, {1.0, 1.0});
  // Plant 0 already lost half its energy, plant 1 nothing.
  in.fairness = FairnessTarget{{1.0, 0.0}, {2.0, 2.0}, 1.0};
  const auto sp = solve_rt_step(build_rt_step(net, in, hand_sens(2, 0.1, 0.0)));
  CHECK(sp.p[0] + sp.p[1] == doctest::Approx(0.5).epsilon(1e-7));
  // Plant 0 stays worst off at 1/2.5 even uncurtailed, so plant 1 absorbs everything.
  CHECK(sp.curtailed[1] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("build_rt_step validates sizes") {
  const auto net = testing::two_bus(0.1, 0.05, 1.0, 0.95);
  auto in = flat_input(net, {0.5, 0.1}, {1.0});
  CHECK_THROWS_AS(build_rt_step(net, in, hand_sens(2, 0.1, 0.05)), ValidationError);
  in = flat_input(net, {-0.5}, {1.0});
  CHECK_THROWS_AS(build_rt_step(net, in, hand_sens(2, 0.1, 0.05)), ValidationError);
  in = flat_input(net, {0.5}, {1.0});
  CHECK_THROWS_AS(build_rt_step(net, in, hand_sens(3, 0.1, 0.05)), ValidationError);
}

TEST_CASE("closed loop on case33 respects the limits under exact sensitivities") {
  const auto net = testing::case33();
  const auto topo = netmodel::case_topology(net);
  const std::size_t np = net.pv_plants.size();
  std::vector<Complex> load;
  for (const auto& b : net.buses) load.emplace_back(0.3 * b.load_p, 0.3 * b.load_q);
  std::vector<double> p(np, 0.0), q(np, 0.0);
  auto state = powerflow::solve_ac_power_flow(net, topo, powerflow::bus_injections(net, load, p, q));
  for (int it = 0; it < 4; ++it) {
    RtStepInput in;
    in.topology = topo;
    in.prev_state = state;
    in.prev_p = p;
    in.prev_q = q;
    in.mpp_forecast.assign(np, 0.25);
    in.load_forecast = load;
    in.weights.assign(np, 1.0);
    const auto sp = solve_rt_step(build_rt_step(net, in, powerflow::compute_sensitivities(net, topo, state)));
    p = sp.p;
    q = sp.q;
    state = powerflow::solve_ac_power_flow(net, topo, powerflow::bus_injections(net, load, p, q));
  }
  double vmax = 0.0;
  for (double v : state.v) vmax = std::max(vmax, v);
  CHECK(vmax <= 1.05 + 0.005);
  double total = 0.0;
  for (double x : p) total += x;
  CHECK(total < 0.25 * static_cast<double>(np));
}
