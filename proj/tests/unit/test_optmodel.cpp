#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "../common/feeder12.hpp"
#include "helpers.hpp"
#include "pvfair/error.hpp"
#include "pvfair/optmodel/day_ahead.hpp"
#include "pvfair/optmodel/polygon.hpp"
#include "pvfair/optmodel/solver.hpp"

using namespace pvfair;
using namespace pvfair::optmodel;

namespace {

scenario::ScenarioSet one_step(double pv, double load) {
  scenario::ProfileTriple p{{pv}, {load}, {load}, {}, {}};
  scenario::ScenarioSet s;
  s.scenarios = {p};
  s.realization = p;
  s.timestep_minutes = 60;
  return s;
}

}  // namespace

TEST_CASE("polygon tangents circumscribe the disc") {
  const auto hp = polygonize_quadratic(2.0, 8);
  REQUIRE(hp.size() == 8);
  for (int k = 0; k < 360; ++k) {
    const double a = k * std::numbers::pi / 180.0;
    for (const auto& h : hp) CHECK(h.contains(2.0 * std::cos(a), 2.0 * std::sin(a), 1e-12));
  }
  const double vertex = 2.0 / std::cos(std::numbers::pi / 8);
  const double a = std::numbers::pi / 8;
  for (const auto& h : hp) CHECK(h.contains(vertex * std::cos(a), vertex * std::sin(a), 1e-12));
  CHECK_FALSE(std::all_of(hp.begin(), hp.end(), [&](const HalfPlane& h) {
    return h.contains(1.001 * vertex * std::cos(a), 1.001 * vertex * std::sin(a));
  }));
  CHECK_THROWS_AS(polygonize_quadratic(1.0, 2), ValidationError);
  CHECK_THROWS_AS(polygonize_quadratic(0.0, 6), ValidationError);
}

TEST_CASE("small LP and MILP solve to known optima") {
  LinearModel lp;
  const auto x = lp.add_variable("x", 0.0, 4.0, -1.0);
  const auto y = lp.add_variable("y", 0.0, kInf, -1.0);
  lp.add_le("c1", {{x, 1.0}, {y, 2.0}}, 6.0);
  lp.add_le("c2", {{x, 3.0}, {y, 1.0}}, 9.0);
  auto r = solve(lp);
  REQUIRE(r.status == SolveStatus::kOptimal);
  CHECK(r.objective == doctest::Approx(-4.2));  // x = 2.4, y = 1.8
  CHECK(lp.max_violation(r.x) < 1e-9);

  LinearModel knap;
  const double value[] = {10, 13, 7, 8};
  const double weight[] = {5, 7, 4, 3};
  std::vector<Term> cap;
  for (int i = 0; i < 4; ++i) cap.push_back({knap.add_binary("b" + std::to_string(i), -value[i]), weight[i]});
  knap.add_le("cap", cap, 10.0);
  r = solve(knap);
  REQUIRE(r.status == SolveStatus::kOptimal);
  CHECK(r.objective == doctest::Approx(-21.0));
  CHECK(knap.integer_count() == 4);
}

TEST_CASE("infeasible and unbounded models are reported") {
  LinearModel m;
  const auto x = m.add_variable("x", 0.0, 1.0);
  m.add_ge("too_big", {{x, 1.0}}, 2.0);
  CHECK(solve(m).status == SolveStatus::kInfeasible);
  LinearModel u;
  u.add_variable("x", 0.0, kInf, -1.0);
  const auto st = solve(u).status;
  CHECK((st == SolveStatus::kUnbounded || st == SolveStatus::kInfeasible));
}

TEST_CASE("MPS export lists every section and the variable map indexes columns") {
  LinearModel m;
  const auto x = m.add_variable("flow a", -1.0, 2.0, 3.0);
  const auto z = m.add_binary("xi[1]", 1.0);
  m.add_le("row one", {{x, 1.0}, {z, -2.0}}, 0.5);
  m.set_objective_offset(4.0);
  std::ostringstream out;
  write_mps(m, out, "T");
  const auto text = out.str();
  for (const char* section : {"NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA", "MARKER"}) {
    CHECK(text.find(section) != std::string::npos);
  }
  CHECK(text.find("flow a") == std::string::npos);
  const auto j = nlohmann::json::parse(variable_map_json(m));
  CHECK(j.dump().find(mps_column_name(m, 1)) != std::string::npos);
  CHECK(mps_column_name(m, 0) != mps_column_name(m, 1));
}

TEST_CASE("big-M from voltage band and flow bounds") {
  auto net = testing::two_bus(0.1, 0.1);
  net.lines[0].p_max = net.lines[0].q_max = 1.0;
  DayAheadConfig cfg;
  cfg.v_min = 0.95;
  cfg.v_max = 1.05;
  CHECK(compute_big_m(net, cfg) == doctest::Approx(0.6).epsilon(1e-12));
  cfg.big_m = 2.5;
  CHECK(compute_big_m(net, cfg) == 2.5);
  net.lines[0].p_max = std::numeric_limits<double>::infinity();
  cfg.big_m.reset();
  CHECK_THROWS_AS(compute_big_m(net, cfg), ValidationError);
}

TEST_CASE("two-bus curtailment stops at the linearized voltage limit") {
  // w2 = 1 + 2rP with x = 0, so P ≤ (1.05² − 1) / (2r).
  auto net = testing::two_bus(0.1, 0.0, 1.0);
  DayAheadConfig cfg;
  auto model = build_day_ahead_model(net, one_step(1.0, 0.0), {1.0}, cfg);
  const auto sol = solve_day_ahead(model, net, cfg);
  REQUIRE(sol.status == SolveStatus::kOptimal);
  const double p_lim = (1.05 * 1.05 - 1.0) / 0.2;
  CHECK(sol.p[0] == doctest::Approx(p_lim).epsilon(1e-6));
  CHECK(sol.curtailment[0][0] == doctest::Approx(1.0 - p_lim).epsilon(1e-6));
  CHECK(sol.w[1] == doctest::Approx(1.05 * 1.05).epsilon(1e-6));
}

TEST_CASE("reactive absorption raises the two-bus limit") {
  auto net = testing::two_bus(0.1, 0.05, 1.0, 0.95);
  DayAheadConfig cfg;
  auto model = build_day_ahead_model(net, one_step(1.0, 0.0), {1.0}, cfg);
  const auto sol = solve_day_ahead(model, net, cfg);
  REQUIRE(sol.status == SolveStatus::kOptimal);
  const double zeta = net.pv_plants[0].zeta();
  CHECK(sol.q[0] == doctest::Approx(-zeta * sol.p[0]).epsilon(1e-6));
  CHECK(sol.p[0] == doctest::Approx(0.1025 / (2 * (0.1 - 0.05 * zeta))).epsilon(1e-6));
}

TEST_CASE("zero weight leaves curtailment to the loss term") {
  auto net = testing::two_bus(0.1, 0.0, 1.0);
  DayAheadConfig cfg;
  auto model = build_day_ahead_model(net, one_step(0.3, 0.0), {0.0}, cfg);
  const auto sol = solve_day_ahead(model, net, cfg);
  // Losses only price flow beyond the first tangent point.
  CHECK(sol.p[0] < 0.15);
  CHECK(sol.curtailment[0][0] > 0.15);
}

TEST_CASE("an unreachable voltage band is infeasible") {
  auto net = testing::two_bus(0.2, 0.2, 0.0, 0.95, 1.0, 0.5);
  DayAheadConfig cfg;
  cfg.v_min = 0.99;
  auto model = build_day_ahead_model(net, one_step(0.0, 1.0), {}, cfg);
  CHECK_THROWS_AS(solve_day_ahead(model, net, cfg), InfeasibleError);
}

TEST_CASE("model rejects bad weights and configs") {
  auto net = testing::two_bus(0.1, 0.0, 1.0);
  DayAheadConfig cfg;
  CHECK_THROWS_AS(build_day_ahead_model(net, one_step(1.0, 0.0), {1.0, 1.0}, cfg), ValidationError);
  CHECK_THROWS_AS(build_day_ahead_model(net, one_step(1.0, 0.0), {-1.0}, cfg), ValidationError);
  cfg.v_min = 1.1;
  CHECK_THROWS_AS(build_day_ahead_model(net, one_step(1.0, 0.0), {1.0}, cfg), ValidationError);
}

TEST_CASE("reconfiguration on a 12-bus feeder returns a radial topology no worse than the base") {
  const auto net = testing::feeder12(3);
  const auto scen = testing::feeder12_scenarios();
  DayAheadConfig cfg;
  const std::vector<double> w(net.pv_plants.size(), 1.0);
  auto model = build_day_ahead_model(net, scen, w, cfg);
  CHECK(model.lp.integer_count() > 0);
  const auto sol = solve_day_ahead(model, net, cfg);
  REQUIRE(sol.status == SolveStatus::kOptimal);
  CHECK(netmodel::validate_radiality(net, sol.topology).ok());
  CHECK(sol.topology.closed_count() == net.bus_count() - 1);

  ModelVariant base;
  base.fixed_closed = netmodel::case_topology(net).closed;
  auto fixed = build_day_ahead_model(net, scen, w, cfg, base);
  const auto fsol = solve_day_ahead(fixed, net, cfg);
  CHECK(sol.objective <= fsol.objective * (1 + cfg.mip_gap) + 1e-9);
  CHECK(fsol.topology.closed == base.fixed_closed.value());
}

TEST_CASE("solution columns are consistent with the model") {
  const auto net = testing::feeder12(5);
  const auto scen = testing::feeder12_scenarios();
  DayAheadConfig cfg;
  auto model = build_day_ahead_model(net, scen, std::vector<double>(3, 1.0), cfg);
  CHECK(model.scenarios == 2);
  CHECK(model.steps == 4);
  CHECK(model.p.size() == 2 * 4 * 3);
  CHECK(model.w.size() == 2 * 4 * net.bus_count());
  CHECK(model.loss.size() == 2 * 2 * 4 * net.line_count());
  const auto sol = solve_day_ahead(model, net, cfg);
  for (std::size_t i = 0; i < model.p.size(); ++i) {
    CHECK(sol.p[i] >= -1e-9);
    CHECK(sol.p[i] <= model.mpp[i] + 1e-9);
  }
  for (std::size_t i = 0; i < sol.w.size(); ++i) {
    if (i % net.bus_count() == 0) continue;
    CHECK(sol.w[i] >= cfg.v_min * cfg.v_min - 1e-7);
    CHECK(sol.w[i] <= cfg.v_max * cfg.v_max + 1e-7);
  }
}
