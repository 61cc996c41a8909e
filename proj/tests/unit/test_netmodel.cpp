#include <doctest.h>

#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "pvfair/error.hpp"
#include "pvfair/netmodel/admittance.hpp"
#include "pvfair/netmodel/case_file.hpp"
#include "pvfair/netmodel/grid_config.hpp"
#include "pvfair/netmodel/radiality.hpp"

using namespace pvfair;
using namespace pvfair::netmodel;

TEST_CASE("case33 parses with per-unit loads and impedances") {
  const auto net = load_case_file(testing::data_path("cases/case33bw.m"));
  CHECK(net.bus_count() == 33);
  CHECK(net.line_count() == 37);
  CHECK(net.slack_buses == std::vector<std::size_t>{0});
  CHECK(net.base_power == doctest::Approx(10.0));
  double p = 0.0, q = 0.0;
  for (const auto& b : net.buses) {
    p += b.load_p;
    q += b.load_q;
  }
  CHECK(p == doctest::Approx(0.3715).epsilon(1e-12));
  CHECK(q == doctest::Approx(0.2300).epsilon(1e-12));
  const double z_base = 12.66 * 12.66 / 10.0;
  CHECK(net.lines[0].r == doctest::Approx(0.0922 / z_base).epsilon(1e-12));
  int open = 0;
  for (const auto& l : net.lines) open += l.closed_in_case ? 0 : 1;
  CHECK(open == 5);
}

TEST_CASE("case file round trip reproduces every field") {
  const auto net = load_case_file(testing::data_path("cases/case69.m"));
  const auto again = parse_case(write_case(net));
  REQUIRE(again.bus_count() == net.bus_count());
  REQUIRE(again.line_count() == net.line_count());
  for (std::size_t i = 0; i < net.bus_count(); ++i) {
    CHECK(again.buses[i].id == net.buses[i].id);
    CHECK(again.buses[i].load_p == net.buses[i].load_p);
    CHECK(again.buses[i].load_q == net.buses[i].load_q);
  }
  for (std::size_t e = 0; e < net.line_count(); ++e) {
    CHECK(again.lines[e].r == net.lines[e].r);
    CHECK(again.lines[e].x == net.lines[e].x);
    CHECK(again.lines[e].closed_in_case == net.lines[e].closed_in_case);
  }
}

TEST_CASE("malformed case text reports a position") {
  CHECK_THROWS_AS(parse_case("mpc.baseMVA = 10;\n"), ParseError);
  const std::string bad =
      "mpc.baseMVA = 10;\n"
      "mpc.bus = [\n"
      "  1 3 0 0 0 0 1 1 0 12.66 1 1 1;\n"
      "  2 1 abc 0 0 0 1 1 0 12.66 1 1 1;\n"
      "];\n"
      "mpc.branch = [\n"
      "  1 2 0.1 0.1 0 0 0 0 0 0 1 -360 360;\n"
      "];\n";
  try {
    parse_case(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  const std::string unknown_bus =
      "mpc.baseMVA = 10;\n"
      "mpc.bus = [\n"
      "  1 3 0 0 0 0 1 1 0 12.66 1 1 1;\n"
      "];\n"
      "mpc.branch = [\n"
      "  1 7 0.1 0.1 0 0 0 0 0 0 1 -360 360;\n"
      "];\n";
  CHECK_THROWS_AS(parse_case(unknown_bus), ParseError);
}

TEST_CASE("grid config marks switches and places PV") {
  const auto net = testing::case33();
  CHECK(net.switchable_lines().size() == 13);
  CHECK(net.pv_plants.size() == 6);
  CHECK(net.buses[net.pv_plants[0].bus].id == 14);
  CHECK(net.limits.v_max == doctest::Approx(1.05));
  const auto e = net.find_line(net.bus_index(21), net.bus_index(8));
  REQUIRE(e);
  CHECK(net.lines[*e].switchable);
  CHECK_FALSE(net.lines[*e].closed_in_case);
  CHECK(net.pv_plants[0].zeta() == doctest::Approx(std::sqrt(1.0 - 0.95 * 0.95) / 0.95));
}

TEST_CASE("grid config adds tie lines in ohms") {
  const auto net = build_network(load_grid_config(testing::data_path("grids/case69_pv.toml")));
  CHECK(net.line_count() == 73);
  const auto e = net.find_line(net.bus_index(11), net.bus_index(43));
  REQUIRE(e);
  const double z_base = 12.66 * 12.66 / 10.0;
  CHECK(net.lines[*e].r == doctest::Approx(0.5 / z_base));
  CHECK(net.lines[*e].switchable);
  CHECK_FALSE(net.lines[*e].closed_in_case);
}

TEST_CASE("grid config rejects unknown switch lines and buses") {
  const std::string base = "case = \"" + testing::data_path("cases/case33bw.m") + "\"\n";
  CHECK_THROWS_AS(build_network(parse_grid_config(base + "switchable = [[1, 30]]\n")), ValidationError);
  CHECK_THROWS_AS(build_network(parse_grid_config(base + "[[pv]]\nbus = 99\ncapacity = 0.1\n")),
                  ValidationError);
  CHECK_THROWS_AS(parse_grid_config("v_min = 0.9\n"), ParseError);
}

TEST_CASE("series admittance of a closed line") {
  const auto net = testing::two_bus(0.1, 0.1);
  const auto y = build_admittance(net, case_topology(net));
  CHECK(y(0, 0).real() == doctest::Approx(5.0));
  CHECK(y(0, 0).imag() == doctest::Approx(-5.0));
  CHECK(y(0, 1).real() == doctest::Approx(-5.0));
  CHECK(y(0, 1).imag() == doctest::Approx(5.0));
  Topology open = case_topology(net);
  open.closed[0] = false;
  CHECK(std::abs(build_admittance(net, open)(0, 0)) == 0.0);
}

TEST_CASE("admittance rows of a radial network sum to the shunts") {
  const auto net = testing::case33();
  const auto y = build_admittance(net, case_topology(net));
  for (Eigen::Index i = 0; i < y.rows(); ++i) CHECK(std::abs(y.row(i).sum()) < 1e-9);
  CHECK((y - y.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("base topology of case33 is radial with buses minus slacks closed") {
  const auto net = testing::case33();
  const auto topo = case_topology(net);
  CHECK(validate_radiality(net, topo).ok());
  CHECK(topo.closed_count() == net.bus_count() - net.slack_buses.size());
}

TEST_CASE("radiality violations are named") {
  const auto net = testing::case33();
  auto closed = case_topology(net).closed;

  SUBCASE("closing a tie makes a loop") {
    closed[*net.find_line(net.bus_index(21), net.bus_index(8))] = true;
    const auto r = validate_radiality(net, orient_topology(net, closed));
    CHECK_FALSE(r.ok());
  }
  SUBCASE("opening a fixed line") {
    closed[0] = false;
    const auto r = validate_radiality(net, orient_topology(net, closed));
    CHECK(r.kind == RadialityViolation::kFixedLineOpen);
  }
  SUBCASE("opening a sectionalizer without closing a tie islands a bus") {
    closed[*net.find_line(net.bus_index(32), net.bus_index(33))] = false;
    const auto r = validate_radiality(net, orient_topology(net, closed));
    CHECK_FALSE(r.ok());
  }
  SUBCASE("fractional orientation") {
    auto topo = orient_topology(net, closed);
    topo.d_forward[3] = 0.5;
    topo.d_backward[3] = 0.5;
    CHECK(validate_radiality(net, topo).kind == RadialityViolation::kFractional);
  }
  SUBCASE("size mismatch") {
    auto topo = orient_topology(net, closed);
    topo.closed.pop_back();
    CHECK(validate_radiality(net, topo).kind == RadialityViolation::kSizeMismatch);
  }
}

TEST_CASE("swapping a tie with a sectionalizer stays radial") {
  const auto net = testing::case33();
  auto closed = case_topology(net).closed;
  closed[*net.find_line(net.bus_index(21), net.bus_index(8))] = true;
  closed[*net.find_line(net.bus_index(7), net.bus_index(8))] = false;
  const auto topo = orient_topology(net, closed);
  CHECK(validate_radiality(net, topo).ok());
  CHECK(topo.closed_count() == 32);
}

TEST_CASE("augment_pv validates placements") {
  const auto net = testing::two_bus(0.1, 0.1);
  CHECK(augment_pv(net, {{2, 0.5, 0.9}}).pv_plants.size() == 1);
  CHECK_THROWS_AS(augment_pv(net, {{5, 0.5, 0.9}}), ValidationError);
  CHECK_THROWS_AS(augment_pv(net, {{2, 0.0, 0.9}}), ValidationError);
  CHECK_THROWS_AS(augment_pv(net, {{2, 0.5, 0.9}, {2, 0.1, 0.9}}), ValidationError);
}
