#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "helpers.hpp"
#include "pvfair/error.hpp"
#include "pvfair/powerflow/power_flow.hpp"
#include "pvfair/powerflow/sensitivity.hpp"

using namespace pvfair;
using namespace pvfair::powerflow;

namespace {

struct Reference {
  std::vector<double> v, theta;
};

Reference newton_reference() {
  std::ifstream in(testing::fixture_path("case33_nr_voltages.csv"));
  REQUIRE(in);
  std::string line;
  std::getline(in, line);
  Reference r;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string id, v, th;
    std::getline(row, id, ',');
    std::getline(row, v, ',');
    std::getline(row, th, ',');
    r.v.push_back(std::stod(v));
    r.theta.push_back(std::stod(th) * std::numbers::pi / 180.0);
  }
  return r;
}

}  // namespace

TEST_CASE("sweep matches an independent Newton solution on case33") {
  const auto net = testing::case33();
  const std::vector<double> off(net.pv_plants.size(), 0.0);
  const auto st = solve_ac_power_flow(net, netmodel::case_topology(net), bus_injections(net, 1.0, 1.0, off, off));
  const auto ref = newton_reference();
  REQUIRE(ref.v.size() == net.bus_count());
  for (std::size_t i = 0; i < net.bus_count(); ++i) {
    CHECK(st.v[i] == doctest::Approx(ref.v[i]).epsilon(1e-7));
    CHECK(std::abs(st.theta[i] - ref.theta[i]) < 1e-7);
  }
  CHECK(st.v[17] == doctest::Approx(0.91309).epsilon(1e-5));
}

TEST_CASE("two-bus voltage drop matches the closed form") {
  // |V2|⁴ + (2(rP + xQ) − 1)|V2|² + (r² + x²)(P² + Q²) = 0 for a load P + jQ.
  const double r = 0.05, x = 0.04, P = 0.5, Q = 0.2;
  const auto net = testing::two_bus(r, x, 0.0, 0.95, P, Q);
  const auto st = solve_ac_power_flow(net, netmodel::case_topology(net), bus_injections(net, 1.0, 1.0, {}, {}));
  const double b = 2 * (r * P + x * Q) - 1.0;
  const double c = (r * r + x * x) * (P * P + Q * Q);
  const double v2 = std::sqrt((-b + std::sqrt(b * b - 4 * c)) / 2);
  CHECK(st.v[1] == doctest::Approx(v2).epsilon(1e-8));
  const double loss = st.total_losses().real();
  const double i2 = (P * P + Q * Q) / (v2 * v2);
  CHECK(loss == doctest::Approx(r * i2).epsilon(1e-7));
}

TEST_CASE("injections balance losses") {
  const auto net = testing::case33();
  std::vector<double> p(net.pv_plants.size(), 0.2), q(net.pv_plants.size(), -0.02);
  const auto st = solve_ac_power_flow(net, netmodel::case_topology(net), bus_injections(net, 0.6, 0.6, p, q));
  Complex sum = 0.0;
  for (const auto& s : st.s_inj) sum += s;
  CHECK(std::abs(sum - st.total_losses()) < 1e-7);
  CHECK(st.total_losses().real() > 0.0);
}

TEST_CASE("bus injection overloads agree") {
  const auto net = testing::case33();
  std::vector<double> p(net.pv_plants.size(), 0.1), q(net.pv_plants.size(), 0.01);
  std::vector<Complex> load;
  for (const auto& b : net.buses) load.emplace_back(0.7 * b.load_p, 0.4 * b.load_q);
  const auto a = bus_injections(net, 0.7, 0.4, p, q);
  const auto b = bus_injections(net, load, p, q);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-15);
}

TEST_CASE("unreachable buses are de-energized") {
  auto net = testing::chain(4, 0.01, 0.01, 0.01);
  auto closed = std::vector<bool>{true, false, true};
  net.lines[1].switchable = true;
  const auto topo = netmodel::orient_topology(net, closed);
  const auto st = solve_ac_power_flow(net, topo, bus_injections(net, 1.0, 1.0, {}, {}));
  CHECK(st.energized == std::vector<bool>{true, true, false, false});
  CHECK(st.v[2] == 0.0);
  CHECK(st.v[3] == 0.0);
}

TEST_CASE("a loop is rejected") {
  auto net = testing::chain(3, 0.01, 0.01);
  netmodel::Line tie;
  tie.from = 0;
  tie.to = 2;
  tie.r = 0.01;
  tie.x = 0.01;
  tie.switchable = true;
  net.lines.push_back(tie);
  const auto topo = netmodel::orient_topology(net, {true, true, true});
  CHECK_THROWS_AS(solve_ac_power_flow(net, topo, bus_injections(net, 1.0, 1.0, {}, {})), ValidationError);
}

TEST_CASE("an infeasible load diverges") {
  const auto net = testing::two_bus(0.5, 0.5, 0.0, 0.95, 5.0, 5.0);
  CHECK_THROWS_AS(solve_ac_power_flow(net, netmodel::case_topology(net), bus_injections(net, 1.0, 1.0, {}, {})),
                  DivergenceError);
}

TEST_CASE("analytic sensitivities match finite differences at the case33 nominal point") {
  const auto net = testing::case33();
  const auto topo = netmodel::case_topology(net);
  const std::vector<double> off(net.pv_plants.size(), 0.0);
  const auto inj = bus_injections(net, 1.0, 1.0, off, off);
  const auto st = solve_ac_power_flow(net, topo, inj);
  const auto k = compute_sensitivities(net, topo, st);
  const auto fd = finite_difference_sensitivities(net, topo, inj, 1e-5, {17, 24, 32});
  for (std::size_t c : {17u, 24u, 32u}) {
    for (Eigen::Index m = 1; m < k.kp.rows(); ++m) {
      CHECK(std::abs(k.kp(m, c) - fd.kp(m, c)) <= 1e-4 * std::abs(fd.kp(m, c)) + 1e-9);
      CHECK(std::abs(k.kq(m, c) - fd.kq(m, c)) <= 1e-4 * std::abs(fd.kq(m, c)) + 1e-9);
    }
  }
  CHECK(k.kp.row(0).norm() == 0.0);
  CHECK(k.kp(17, 17) > 0.0);
  CHECK(k.kq(17, 17) > 0.0);
}

TEST_CASE("two-bus sensitivity tends to r and x at no load") {
  const auto net = testing::two_bus(0.02, 0.01);
  const auto topo = netmodel::case_topology(net);
  const auto st = solve_ac_power_flow(net, topo, bus_injections(net, 1.0, 1.0, {}, {}));
  const auto k = compute_sensitivities(net, topo, st);
  CHECK(k.kp(1, 1) == doctest::Approx(0.02).epsilon(1e-9));
  CHECK(k.kq(1, 1) == doctest::Approx(0.01).epsilon(1e-9));
}
