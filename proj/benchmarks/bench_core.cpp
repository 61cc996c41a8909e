#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "pvfair/netmodel/grid_config.hpp"
#include "pvfair/optmodel/day_ahead.hpp"
#include "pvfair/powerflow/power_flow.hpp"
#include "pvfair/powerflow/sensitivity.hpp"
#include "pvfair/rtcontrol/controller.hpp"
#include "pvfair/scenario/scenario.hpp"

using namespace pvfair;

namespace {

netmodel::Network load(const char* grid) {
  return netmodel::build_network(netmodel::load_grid_config(std::string(PVFAIR_DATA_DIR) + "/grids/" + grid));
}

const char* grid_for(std::int64_t arg) { return arg == 69 ? "case69_pv.toml" : "case33_pv.toml"; }

std::vector<powerflow::Complex> midday(const netmodel::Network& net) {
  std::vector<double> p, q(net.pv_plants.size(), 0.0);
  for (const auto& pl : net.pv_plants) p.push_back(0.8 * pl.s_max);
  return powerflow::bus_injections(net, 0.5, 0.5, p, q);
}

void BM_PowerFlow(benchmark::State& state) {
  const auto net = load(grid_for(state.range(0)));
  const auto topo = netmodel::case_topology(net);
  const auto inj = midday(net);
  for (auto _ : state) benchmark::DoNotOptimize(powerflow::solve_ac_power_flow(net, topo, inj));
}
BENCHMARK(BM_PowerFlow)->Arg(33)->Arg(69);

void BM_Sensitivities(benchmark::State& state) {
  const auto net = load(grid_for(state.range(0)));
  const auto topo = netmodel::case_topology(net);
  const auto st = powerflow::solve_ac_power_flow(net, topo, midday(net));
  for (auto _ : state) benchmark::DoNotOptimize(powerflow::compute_sensitivities(net, topo, st));
}
BENCHMARK(BM_Sensitivities)->Arg(33)->Arg(69);

void BM_RealTimeStep(benchmark::State& state) {
  const auto net = load(grid_for(state.range(0)));
  const auto topo = netmodel::case_topology(net);
  const std::size_t np = net.pv_plants.size();
  std::vector<powerflow::Complex> load_fc;
  for (const auto& b : net.buses) load_fc.emplace_back(0.3 * b.load_p, 0.3 * b.load_q);
  rtcontrol::RtStepInput in;
  in.topology = topo;
  in.prev_p.assign(np, 0.0);
  in.prev_q.assign(np, 0.0);
  in.prev_state = powerflow::solve_ac_power_flow(net, topo, powerflow::bus_injections(net, load_fc, in.prev_p, in.prev_q));
  for (const auto& pl : net.pv_plants) in.mpp_forecast.push_back(pl.s_max);
  in.load_forecast = load_fc;
  in.weights.assign(np, 1.0);
  for (auto _ : state) {
    const auto sens = powerflow::compute_sensitivities(net, topo, in.prev_state);
    benchmark::DoNotOptimize(rtcontrol::solve_rt_step(rtcontrol::build_rt_step(net, in, sens)));
  }
}
BENCHMARK(BM_RealTimeStep)->Arg(33)->Arg(69)->Unit(benchmark::kMillisecond);

void BM_DayAheadBuild(benchmark::State& state) {
  const auto net = load(grid_for(state.range(0)));
  const auto scen = scenario::load_day_directory(std::string(PVFAIR_DATA_DIR) + "/fixtures/deterministic");
  const std::vector<double> w(net.pv_plants.size(), 1.0);
  optmodel::DayAheadConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(optmodel::build_day_ahead_model(net, scen, w, cfg));
}
BENCHMARK(BM_DayAheadBuild)->Arg(33)->Arg(69)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
