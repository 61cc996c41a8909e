#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "../common/feeder12.hpp"
#include "helpers.hpp"
#include "pvfair/error.hpp"
#include "pvfair/netmodel/radiality.hpp"
#include "pvfair/sim/simulation.hpp"

using namespace pvfair;
using namespace pvfair::sim;
namespace fs = std::filesystem;

namespace {

SimulationConfig fixture_config(int days) {
  auto cfg = load_simulation_config(testing::data_path("configs/deterministic.toml"));
  cfg.days = days;
  return cfg;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("config keys reach the simulation config") {
  const std::string text = R"(
name = "x"
grid = "grids/case33_pv.toml"
days = 7
seed = 42
mode = "fixed-topology"
fixed_topology = "open:7-8;9-10;14-15;32-33;28-29"
plant_mode = "linear-self-feedback"
v_min = 0.96
v_max = 1.04
[scenario]
source = "synthetic"
cloudiness = 0.4
load_base = 0.3
[policy]
name = "rolling"
horizon_days = 20
rolling_days = 10
floor = 0.01
[day_ahead]
big_m = 0.9
polygon_segments = 8
timestep_minutes = 30
loss_weight = 0.5
mip_gap = 0.01
time_limit = 60
node_limit = 25
extra_objective_weight = 2.0
[realtime]
polygon_segments = 16
load_delta = false
)";
  const auto c = parse_simulation_config(text, "/base");
  CHECK(c.name == "x");
  CHECK(c.grid_path == "/base/grids/case33_pv.toml");
  CHECK(c.days == 7);
  CHECK(c.seed == 42);
  CHECK(c.mode == RunMode::kFixedTopology);
  CHECK(c.plant_mode == PlantMode::kLinearSelfFeedback);
  CHECK(*c.v_min == 0.96);
  CHECK(*c.v_max == 1.04);
  CHECK(c.scenario.kind == ScenarioSource::Kind::kSynthetic);
  CHECK(c.scenario.cloudiness == 0.4);
  CHECK(c.scenario.synth.load_base == 0.3);
  CHECK(c.policy == fairness::WeightPolicy::kRolling);
  CHECK(c.policy_params.horizon_days == 20);
  CHECK(c.policy_params.rolling_days == 10);
  CHECK(c.policy_params.floor == 0.01);
  CHECK(*c.day_ahead.big_m == 0.9);
  CHECK(c.day_ahead.polygon_segments == 8);
  CHECK(c.day_ahead.timestep_minutes == 30);
  CHECK(c.day_ahead.loss_weight == 0.5);
  CHECK(c.day_ahead.mip_gap == 0.01);
  CHECK(c.day_ahead.time_limit == 60);
  CHECK(c.day_ahead.node_limit == 25);
  CHECK(c.extra_objective_weight == 2.0);
  CHECK(c.rt_polygon_segments == 16);
  CHECK_FALSE(c.rt_load_delta);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_simulation_config("[scenario]\nsource = \"fixture\"\ndir = \"d\"\n"), ParseError);
  CHECK_THROWS_AS(parse_simulation_config("grid = \"g\"\n"), ParseError);
  CHECK_THROWS_AS(parse_simulation_config("grid = \"g\"\n[scenario]\nsource = \"radio\"\n"), ParseError);
  CHECK_THROWS_AS(parse_simulation_config("grid = \"g\"\ndays = \"x\"\n[scenario]\ndir = \"d\"\n"), ParseError);
  CHECK_THROWS_AS(parse_simulation_config("grid = \"g\"\ndays = 0\n[scenario]\ndir = \"d\"\n"), ValidationError);
  CHECK_THROWS_AS(parse_simulation_config("grid = \"g\"\nmode = \"x\"\n[scenario]\ndir = \"d\"\n"), ValidationError);
  CHECK_THROWS_AS(parse_simulation_config("grid = [\n"), ParseError);
  CHECK_THROWS_AS(load_simulation_config("/nonexistent/config.toml"), ConfigNotFound);
}

TEST_CASE("topology strings resolve and print back") {
  const auto net = testing::case33();
  const auto base = resolve_topology(net, "base");
  CHECK(base.closed == netmodel::case_topology(net).closed);
  CHECK(describe_topology(net, base) == "open:21-8;9-15;12-22;18-33;25-29");
  const auto swapped = resolve_topology(net, "open:7-8,9-15;12-22;18-33;25-29");
  CHECK(netmodel::validate_radiality(net, swapped).ok());
  CHECK(resolve_topology(net, describe_topology(net, swapped)) == swapped);
  CHECK_THROWS_AS(resolve_topology(net, "open:1-2"), ValidationError);
  CHECK_THROWS_AS(resolve_topology(net, "open:1-30"), ValidationError);
  CHECK_THROWS_AS(resolve_topology(net, "open:7-8"), ValidationError);
  CHECK_THROWS_AS(resolve_topology(net, "closed"), ValidationError);
}

TEST_CASE("fixed-topology run on the fixture keeps its books") {
  auto cfg = fixture_config(3);
  cfg.mode = RunMode::kFixedTopology;
  const auto rep = run_horizon(cfg);
  REQUIRE(rep.days.size() == 3);
  CHECK(rep.ledger.days() == 3);
  for (const auto& d : rep.days) {
    CHECK(d.night_nonzero == 0);
    CHECK(d.fallback_steps == 0);
    CHECK(d.rt_v_max <= 1.05 + 0.005);
    CHECK(d.topology.closed == netmodel::case_topology(rep.network).closed);
    CHECK(d.steps.size() == 96);
    for (std::size_t l = 0; l < d.realized.size(); ++l) {
      double e = 0.0, m = 0.0;
      for (const auto& st : d.steps) {
        if (st.skipped) continue;
        e += 0.25 * st.p[l];
        m += 0.25 * st.mpp[l];
      }
      CHECK(d.realized[l] == doctest::Approx(e).epsilon(1e-12));
      CHECK(d.mpp[l] == doctest::Approx(m).epsilon(1e-12));
    }
  }
  CHECK(rep.days[0].lambda == std::vector<double>(6, 1.0));
  CHECK(rep.days[1].lambda != rep.days[0].lambda);
  CHECK(rep.final_jfi == doctest::Approx(rep.summary.back().jfi_cumulative));
  CHECK(rep.total_curtailment > 0.0);
  CHECK(rep.total_curtailment < 1.0);
}

TEST_CASE("report directory layout") {
  auto cfg = fixture_config(2);
  cfg.mode = RunMode::kFixedTopology;
  const auto rep = run_horizon(cfg);
  const auto dir = fs::temp_directory_path() / "pvfair_report_test";
  fs::remove_all(dir);
  write_report(rep, dir.string());
  for (const char* f : {"report.json", "per_day.csv", "per_plant.csv", "switch_status.csv", "rt_trace.csv", "ledger.csv"}) {
    CHECK(fs::exists(dir / f));
  }
  CHECK(read_lines(dir / "per_day.csv").size() == 3);
  CHECK(read_lines(dir / "per_plant.csv").size() == 1 + 2 * 6);
  const auto sw = read_lines(dir / "switch_status.csv");
  CHECK(sw[0].rfind("day,", 0) == 0);
  CHECK(sw.size() == 3);
  std::ifstream ledger(dir / "ledger.csv");
  CHECK(fairness::CurtailmentLedger::read_csv(ledger) == rep.ledger);
  const auto s = read_report_summary(dir.string());
  CHECK(s.mode == "fixed-topology");
  CHECK(s.days == 2);
  CHECK(s.final_jfi == rep.final_jfi);
  CHECK(s.total_curtailment == rep.total_curtailment);
  std::ifstream js(dir / "report.json");
  const auto j = nlohmann::json::parse(js);
  CHECK(j.at("plants").size() == 6);
  CHECK(j.at("night_nonzero_steps") == 0);
  fs::remove_all(dir);
  CHECK_THROWS_AS(read_report_summary(dir.string()), Error);
}

TEST_CASE("linear self-feedback plant runs and tracks its prediction") {
  auto cfg = fixture_config(1);
  cfg.mode = RunMode::kFixedTopology;
  cfg.plant_mode = PlantMode::kLinearSelfFeedback;
  const auto rep = run_horizon(cfg);
  CHECK(rep.days[0].rt_v_max <= 1.05 + 1e-6);
  CHECK(rep.days[0].night_nonzero == 0);
}

TEST_CASE("reconfiguration on a 12-bus feeder across days") {
  const auto net = testing::feeder12(2);
  SimulationConfig cfg;
  cfg.days = 3;
  cfg.grid_path = "unused";
  cfg.scenario.fixture_dir = "unused";
  std::vector<scenario::ScenarioSet> days(3, testing::feeder12_scenarios());
  const auto rep = run_horizon(cfg, net, days);
  REQUIRE(rep.days.size() == 3);
  for (const auto& d : rep.days) {
    CHECK(d.da_solved);
    CHECK(netmodel::validate_radiality(net, d.topology).ok());
    CHECK(d.topology.closed_count() == net.bus_count() - 1);
    CHECK(d.da_ac_v_max <= net.limits.v_max + 0.01);
    CHECK(d.da_ac_v_min >= net.limits.v_min - 0.01);
  }
  cfg.mode = RunMode::kExtraObjective;
  const auto extra = run_horizon(cfg, net, days);
  for (const auto& d : extra.days) CHECK(d.lambda == std::vector<double>(3, 1.0));
}

TEST_CASE("synthetic scenarios differ by day and by seed") {
  auto cfg = parse_simulation_config("grid = \"g\"\ndays = 2\nseed = 3\n[scenario]\nsource = \"synthetic\"\ncloudiness = 0.5\n");
  const auto a = load_scenarios(cfg);
  REQUIRE(a.size() == 2);
  CHECK_FALSE(a[0] == a[1]);
  CHECK(a[0].scenarios.size() == 2);
  cfg.seed = 4;
  CHECK_FALSE(load_scenarios(cfg)[0] == a[0]);
}
