// Randomized checks of module invariants. Seeds are fixed so failures replay.

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "../common/feeder12.hpp"
#include "helpers.hpp"
#include "pvfair/fairness/fairness.hpp"
#include "pvfair/netmodel/admittance.hpp"
#include "pvfair/netmodel/case_file.hpp"
#include "pvfair/netmodel/radiality.hpp"
#include "pvfair/optmodel/day_ahead.hpp"
#include "pvfair/powerflow/power_flow.hpp"
#include "pvfair/powerflow/sensitivity.hpp"
#include "pvfair/rtcontrol/controller.hpp"
#include "pvfair/scenario/scenario.hpp"
#include "pvfair/sim/simulation.hpp"

using namespace pvfair;
namespace fs = std::filesystem;

namespace {

// One of the feeder's radial configurations, uniformly.
netmodel::Topology random_radial(const netmodel::Network& net, std::mt19937_64& rng) {
  const auto configs = testing::radial_configurations(net);
  std::uniform_int_distribution<std::size_t> pick(0, configs.size() - 1);
  return netmodel::orient_topology(net, configs[pick(rng)]);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("case round trip on random feeders") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto net = testing::feeder12(seed);
    net.pv_plants.clear();
    const auto again = netmodel::parse_case(netmodel::write_case(net));
    REQUIRE(again.line_count() == net.line_count());
    for (std::size_t e = 0; e < net.line_count(); ++e) {
      CHECK(again.lines[e].r == net.lines[e].r);
      CHECK(again.lines[e].x == net.lines[e].x);
      CHECK(again.lines[e].closed_in_case == net.lines[e].closed_in_case);
    }
    for (std::size_t i = 0; i < net.bus_count(); ++i) CHECK(again.buses[i].load_p == net.buses[i].load_p);
  }
}

TEST_CASE("radial topologies close buses minus slacks lines") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto net = testing::feeder12(seed);
    for (const auto& closed : testing::radial_configurations(net)) {
      const auto topo = netmodel::orient_topology(net, closed);
      CHECK(topo.closed_count() == net.bus_count() - net.slack_buses.size());
      for (std::size_t e = 0; e < net.line_count(); ++e) {
        CHECK(topo.d_forward[e] + topo.d_backward[e] == (topo.closed[e] ? 1.0 : 0.0));
      }
    }
  }
}

TEST_CASE("admittance rows sum to the bus shunts") {
  std::mt19937_64 rng(5);
  auto net = testing::feeder12(5);
  std::uniform_real_distribution<double> shunt(0.0, 0.01);
  for (auto& l : net.lines) l.b = shunt(rng);
  const auto topo = random_radial(net, rng);
  const auto y = netmodel::build_admittance(net, topo);
  std::vector<double> expect(net.bus_count(), 0.0);
  for (std::size_t e = 0; e < net.line_count(); ++e) {
    if (!topo.closed[e]) continue;
    expect[net.lines[e].from] += net.lines[e].b / 2;
    expect[net.lines[e].to] += net.lines[e].b / 2;
  }
  for (std::size_t i = 0; i < net.bus_count(); ++i) {
    const auto s = y.row(static_cast<Eigen::Index>(i)).sum();
    CHECK(std::abs(s.real()) < 1e-9);
    CHECK(s.imag() == doctest::Approx(expect[i]).epsilon(1e-9));
  }
}

TEST_CASE("power flow balances energy and drops monotonically without PV") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> scale(0.2, 1.5), pv(0.0, 0.3);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto net = testing::feeder12(seed);
    const auto topo = random_radial(net, rng);
    std::vector<double> p(net.pv_plants.size()), q(net.pv_plants.size(), 0.0);
    for (auto& x : p) x = pv(rng);
    const double s = scale(rng);
    const auto inj = powerflow::bus_injections(net, s, s, p, q);
    const auto st = powerflow::solve_ac_power_flow(net, topo, inj);
    powerflow::Complex total = 0.0;
    for (const auto& x : st.s_inj) total += x;
    CHECK(std::abs(total - st.total_losses()) < 1e-8);
    CHECK(st.v[0] == 1.0);
    CHECK(st.theta[0] == 0.0);

    const std::vector<double> off(net.pv_plants.size(), 0.0);
    const auto loads = powerflow::solve_ac_power_flow(net, topo, powerflow::bus_injections(net, s, s, off, off));
    for (std::size_t e = 0; e < net.line_count(); ++e) {
      if (!topo.closed[e]) continue;
      const auto up = topo.d_forward[e] > 0.5 ? net.lines[e].from : net.lines[e].to;
      const auto down = topo.d_forward[e] > 0.5 ? net.lines[e].to : net.lines[e].from;
      CHECK(loads.v[down] <= loads.v[up] + 1e-12);
    }
  }
}

TEST_CASE("sensitivities match finite differences on random states") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> scale(0.2, 1.2), pv(0.0, 0.3);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto net = testing::feeder12(seed);
    const auto topo = random_radial(net, rng);
    std::vector<double> p(net.pv_plants.size()), q(net.pv_plants.size(), 0.0);
    for (auto& x : p) x = pv(rng);
    const double s = scale(rng);
    const auto inj = powerflow::bus_injections(net, s, s, p, q);
    const auto st = powerflow::solve_ac_power_flow(net, topo, inj);
    const auto k = powerflow::compute_sensitivities(net, topo, st);
    const auto fd = powerflow::finite_difference_sensitivities(net, topo, inj, 1e-5);
    CHECK(k.kp.row(0).norm() == 0.0);
    CHECK(k.kq.row(0).norm() == 0.0);
    CHECK(k.kp.allFinite());
    const double err_p = (k.kp - fd.kp).cwiseAbs().maxCoeff() / fd.kp.cwiseAbs().maxCoeff();
    const double err_q = (k.kq - fd.kq).cwiseAbs().maxCoeff() / fd.kq.cwiseAbs().maxCoeff();
    CHECK(err_p < 1e-4);
    CHECK(err_q < 1e-4);
  }
}

TEST_CASE("day-ahead solutions are radial with integral orientations") {
  const auto scen = testing::feeder12_scenarios();
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto net = testing::feeder12(seed);
    optmodel::DayAheadConfig cfg;
    auto model = optmodel::build_day_ahead_model(net, scen, std::vector<double>(3, 1.0), cfg);
    for (std::size_t j = 0; j < model.lp.variable_count(); ++j) {
      if (!model.lp.variables()[j].integer) continue;
      const bool is_xi = std::any_of(model.xi.begin(), model.xi.end(), [&](const auto& v) {
        return v && v->index == j;
      });
      const bool is_d = std::any_of(model.d_forward.begin(), model.d_forward.end(), [&](const auto& v) { return v.index == j; }) ||
                        std::any_of(model.d_backward.begin(), model.d_backward.end(), [&](const auto& v) { return v.index == j; });
      CHECK((is_xi || is_d));
    }
    for (std::size_t e = 0; e < net.line_count(); ++e) CHECK(model.xi[e].has_value() == net.lines[e].switchable);
    const auto sol = optmodel::solve_day_ahead(model, net, cfg);
    CHECK(netmodel::validate_radiality(net, sol.topology).ok());
    for (double d : sol.d_forward_raw) CHECK(std::min(std::abs(d), std::abs(d - 1.0)) < 1e-6);
    for (double d : sol.d_backward_raw) CHECK(std::min(std::abs(d), std::abs(d - 1.0)) < 1e-6);
  }
}

TEST_CASE("raising one weight never raises that plant's curtailment") {
  const auto scen = testing::feeder12_scenarios();
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto net = testing::feeder12(seed);
    optmodel::DayAheadConfig cfg;
    optmodel::ModelVariant fixed;
    fixed.fixed_closed = netmodel::case_topology(net).closed;
    auto total = [&](const std::vector<double>& w, std::size_t l) {
      auto m = optmodel::build_day_ahead_model(net, scen, w, cfg, fixed);
      const auto sol = optmodel::solve_day_ahead(m, net, cfg);
      double c = 0.0;
      for (double x : sol.curtailment[l]) c += x;
      return c;
    };
    for (std::size_t l = 0; l < 3; ++l) {
      std::vector<double> w(3, 1.0);
      const double before = total(w, l);
      w[l] = 4.0;
      CHECK(total(w, l) <= before + 1e-6);
    }
  }
}

TEST_CASE("real-time setpoints respect their box and are repeatable") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> mpp(0.0, 0.4), lam(0.1, 5.0), scale(0.1, 1.0);
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto net = testing::feeder12(seed);
    const auto topo = random_radial(net, rng);
    const std::size_t np = net.pv_plants.size();
    std::vector<double> p0(np, 0.0), q0(np, 0.0);
    const double s = scale(rng);
    std::vector<powerflow::Complex> load;
    for (const auto& b : net.buses) load.emplace_back(s * b.load_p, s * b.load_q);
    rtcontrol::RtStepInput in;
    in.topology = topo;
    in.prev_state = powerflow::solve_ac_power_flow(net, topo, powerflow::bus_injections(net, load, p0, q0));
    in.prev_p = p0;
    in.prev_q = q0;
    for (std::size_t l = 0; l < np; ++l) {
      in.mpp_forecast.push_back(mpp(rng));
      in.weights.push_back(lam(rng));
    }
    in.load_forecast = load;
    in.v_max = 1.02;
    const auto sens = powerflow::compute_sensitivities(net, topo, in.prev_state);
    const auto model = rtcontrol::build_rt_step(net, in, sens);
    const auto a = rtcontrol::solve_rt_step(model);
    const auto b = rtcontrol::solve_rt_step(rtcontrol::build_rt_step(net, in, sens));
    CHECK(a.p == b.p);
    CHECK(a.q == b.q);
    for (std::size_t l = 0; l < np; ++l) {
      const auto& pv = net.pv_plants[l];
      CHECK(a.p[l] >= 0.0);
      CHECK(a.p[l] <= model.mpp[l]);
      CHECK(std::abs(a.q[l]) <= pv.zeta() * a.p[l] + 1e-9);
    }
    if (!a.fallback) {
      for (std::size_t i = 1; i < net.bus_count(); ++i) {
        CHECK(a.predicted_v[i] <= in.v_max + 1e-7);
        CHECK(a.predicted_v[i] >= in.v_min - 1e-7);
      }
    }
  }
}

TEST_CASE("reactive power alone clears a small violation without curtailment") {
  // v = 1 + 0.1p + 0.05q is 1.055 at p = 0.55, q = 0; q = −0.1 (within
  // ζ·0.55) brings it to the limit.
  const auto net = testing::two_bus(0.1, 0.05, 1.0, 0.95);
  rtcontrol::RtStepInput in;
  in.topology = netmodel::case_topology(net);
  in.prev_state = powerflow::solve_ac_power_flow(net, in.topology, powerflow::bus_injections(net, 0.0, 0.0, {0.0}, {0.0}));
  in.prev_p = {0.0};
  in.prev_q = {0.0};
  in.mpp_forecast = {0.55};
  in.load_forecast.assign(2, 0.0);
  in.weights = {1.0};
  powerflow::SensitivityMatrices s;
  s.kp = Eigen::MatrixXd::Zero(2, 2);
  s.kq = s.kp;
  s.kp(1, 1) = 0.1;
  s.kq(1, 1) = 0.05;
  const auto sp = rtcontrol::solve_rt_step(rtcontrol::build_rt_step(net, in, s));
  CHECK(sp.curtailed[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(sp.q[0] < 0.0);
}

TEST_CASE("jfi is scale invariant and bounded") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0), c(0.01, 100.0);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> g(1 + k % 9);
    for (auto& x : g) x = u(rng);
    g[0] += 1e-3;
    const double j = fairness::jfi(g);
    const double f = c(rng);
    auto scaled = g;
    for (auto& x : scaled) x *= f;
    CHECK(fairness::jfi(scaled) == doctest::Approx(j).epsilon(1e-12));
    CHECK(j <= 1.0 + 1e-15);
    CHECK(j >= 1.0 / static_cast<double>(g.size()) - 1e-15);
  }
}

TEST_CASE("every policy ranks plants opposite to their generation") {
  using fairness::WeightPolicy;
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (auto policy : {WeightPolicy::kInverse, WeightPolicy::kShrinking, WeightPolicy::kRolling,
                      WeightPolicy::kLogarithmic, WeightPolicy::kDifference}) {
    for (int trial = 0; trial < 20; ++trial) {
      fairness::CurtailmentLedger led(4);
      const int days = 1 + trial % 20;
      for (int d = 0; d < days; ++d) {
        std::vector<double> r(4), m(4, 1.0);
        for (auto& x : r) x = u(rng) * 0.95;
        led.append_day(r, m);
      }
      const auto g = led.cumulative_generation(led.days());
      const auto w = fairness::compute_weights(policy, led, led.days(), {1.0, 1.0, 1.0, 1.0}).lambda;
      for (std::size_t a = 0; a < 4; ++a) {
        CHECK(w[a] >= 1e-3);
        for (std::size_t b = 0; b < 4; ++b) {
          if (g[a] < g[b]) CHECK(w[a] > w[b]);
        }
      }
    }
  }
}

TEST_CASE("shrinking weights reach the inverse weights at the horizon") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  fairness::CurtailmentLedger led(3);
  for (int d = 0; d < 30; ++d) {
    std::vector<double> m{u(rng), u(rng), u(rng)}, r(3);
    for (std::size_t l = 0; l < 3; ++l) r[l] = m[l] * u(rng);
    led.append_day(r, m);
  }
  const auto s = fairness::compute_weights(fairness::WeightPolicy::kShrinking, led, 30, {1.0, 1.0, 1.0}).lambda;
  const auto i = fairness::compute_weights(fairness::WeightPolicy::kInverse, led, 30, {}).lambda;
  for (std::size_t l = 0; l < 3; ++l) CHECK(s[l] == doctest::Approx(i[l]).epsilon(1e-12));
}

TEST_CASE("scenario directories ingest and serialize to the same set") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto day = scenario::synth_profiles(seed, 1, 0.5)[0];
    const auto a = (fs::temp_directory_path() / "pvfair_prop_a").string();
    const auto b = (fs::temp_directory_path() / "pvfair_prop_b").string();
    scenario::write_day_directory(a, day, 15);
    const auto first = scenario::load_day_directory(a);
    scenario::SyntheticDay again{{first.scenarios[0].pv, first.scenarios[1].pv},
                                 {first.scenarios[0].load_p, first.scenarios[1].load_p},
                                 first.realization};
    scenario::write_day_directory(b, again, 15);
    CHECK(scenario::load_day_directory(b) == first);
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST_CASE("synthetic daily PV energy varies moderately under clouds") {
  const auto days = scenario::synth_profiles(7, 30, 0.5);
  std::vector<double> e;
  for (const auto& d : days) e.push_back(std::accumulate(d.realization.pv.begin(), d.realization.pv.end(), 0.0));
  const double mean = std::accumulate(e.begin(), e.end(), 0.0) / 30.0;
  double var = 0.0;
  for (double x : e) var += (x - mean) * (x - mean);
  const double cov = std::sqrt(var / 30.0) / mean;
  CHECK(cov >= 0.1);
  CHECK(cov <= 0.5);
}

TEST_CASE("shipped fixture realization lies between its scenarios") {
  const auto set = scenario::load_day_directory(testing::data_path("fixtures/deterministic"));
  for (std::size_t t = 0; t < set.horizon(); ++t) {
    const double lo = std::min(set.scenarios[0].pv[t], set.scenarios[1].pv[t]);
    const double hi = std::max(set.scenarios[0].pv[t], set.scenarios[1].pv[t]);
    CHECK(set.realization.pv[t] >= lo);
    CHECK(set.realization.pv[t] <= hi);
  }
}

TEST_CASE("simulation replays byte for byte and keeps E = 1 - G") {
  auto cfg = sim::load_simulation_config(testing::data_path("configs/deterministic.toml"));
  cfg.days = 2;
  cfg.mode = sim::RunMode::kFixedTopology;
  cfg.fixed_topology = "open:7-8;9-15;12-22;18-33;25-29";
  const auto a = sim::run_horizon(cfg);
  const auto b = sim::run_horizon(cfg);
  const auto da = fs::temp_directory_path() / "pvfair_replay_a";
  const auto db = fs::temp_directory_path() / "pvfair_replay_b";
  sim::write_report(a, da.string());
  sim::write_report(b, db.string());
  for (const char* f : {"report.json", "per_day.csv", "per_plant.csv", "switch_status.csv", "rt_trace.csv", "ledger.csv"}) {
    CHECK(slurp(da / f) == slurp(db / f));
  }
  fs::remove_all(da);
  fs::remove_all(db);
  for (std::size_t k = 0; k < a.summary.size(); ++k) {
    const auto g = a.ledger.cumulative_generation(k + 1);
    for (std::size_t l = 0; l < g.size(); ++l) CHECK(a.summary[k].e_cumulative[l] == 1.0 - g[l]);
    CHECK(a.summary[k].jfi_cumulative > 0.0);
    CHECK(a.summary[k].jfi_cumulative <= 1.0);
  }
}
