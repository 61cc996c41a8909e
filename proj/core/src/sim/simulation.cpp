#include "pvfair/sim/simulation.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pvfair/netmodel/grid_config.hpp"
#include "pvfair/netmodel/radiality.hpp"
#include "pvfair/powerflow/power_flow.hpp"
#include "pvfair/powerflow/sensitivity.hpp"
#include "pvfair/rtcontrol/controller.hpp"

namespace pvfair::sim {

using powerflow::Complex;

namespace {

struct VoltageRange {
  double hi = -1e300;
  double lo = 1e300;

  void add(const netmodel::Network& net, const powerflow::PowerFlowState& st) {
    for (std::size_t b = 0; b < st.bus_count(); ++b) {
      if (!st.energized[b] || net.is_slack(b)) continue;
      hi = std::max(hi, st.v[b]);
      lo = std::min(lo, st.v[b]);
    }
  }
};

std::vector<Complex> loads_at(const netmodel::Network& net, const scenario::ProfileTriple& prof,
                              std::size_t t) {
  std::vector<Complex> out(net.bus_count());
  for (std::size_t b = 0; b < net.bus_count(); ++b) {
    out[b] = Complex(net.buses[b].load_p * prof.load_p_factor(b, t),
                     net.buses[b].load_q * prof.load_q_factor(b, t));
  }
  return out;
}

// Re-simulates the day-ahead setpoints through AC power flow.
VoltageRange check_day_ahead(const netmodel::Network& net, const optmodel::DayAheadModel& m,
                             const optmodel::DayAheadSolution& sol) {
  VoltageRange range;
  std::vector<double> p(m.plants), q(m.plants);
  std::vector<Complex> load(m.buses);
  for (std::size_t s = 0; s < m.scenarios; ++s) {
    for (std::size_t t = 0; t < m.steps; ++t) {
      const std::size_t slot = m.slot(s, t);
      for (std::size_t i = 0; i < m.plants; ++i) {
        p[i] = sol.p[slot * m.plants + i];
        q[i] = sol.q[slot * m.plants + i];
      }
      for (std::size_t b = 0; b < m.buses; ++b) {
        load[b] = Complex(m.load_p[slot * m.buses + b], m.load_q[slot * m.buses + b]);
      }
      range.add(net, powerflow::solve_ac_power_flow(net, sol.topology,
                                                     powerflow::bus_injections(net, load, p, q)));
    }
  }
  return range;
}

template <class E>
[[noreturn]] void rethrow_with(const E& e, const std::string& where);

template <>
[[noreturn]] void rethrow_with(const InfeasibleError& e, const std::string& where) {
  throw InfeasibleError(where + ": " + e.what());
}

template <>
[[noreturn]] void rethrow_with(const DivergenceError& e, const std::string& where) {
  throw DivergenceError(where + ": " + e.what(), e.last_mismatch());
}

// Identical scenarios scale every objective term alike, so one copy gives
// the same optimum at half the size.
scenario::ScenarioSet collapse_identical(const scenario::ScenarioSet& scen) {
  for (const auto& s : scen.scenarios) {
    if (!(s == scen.scenarios.front())) return scen;
  }
  auto out = scen;
  out.scenarios.resize(1);
  return out;
}

}  // namespace

DayResult run_day(std::size_t d, const netmodel::Network& net, const scenario::ScenarioSet& scen,
                  fairness::CurtailmentLedger& ledger, const SimulationConfig& cfg,
                  const std::optional<netmodel::Topology>& previous) {
  if (ledger.days() + 1 != d) {
    throw ValidationError(fmt::format("ledger holds {} days, cannot run day {}", ledger.days(), d));
  }
  scen.validate();
  const std::size_t np = net.pv_plants.size();
  const std::string where = fmt::format("day {}", d);
  DayResult r;
  r.day = d;

  // Fairness weights from the days before.
  std::vector<double> future(np, 0.0);
  std::vector<double> prior_curtailed(np, 0.0), prior_available(np, 0.0);
  for (std::size_t l = 0; l < np; ++l) {
    if (ledger.days() > 0) future[l] = ledger.mpp(ledger.days(), l);
    for (std::size_t k = 1; k <= ledger.days(); ++k) {
      prior_available[l] += ledger.mpp(k, l);
      prior_curtailed[l] += ledger.mpp(k, l) - ledger.realized(k, l);
    }
  }
  const auto policy = cfg.mode == RunMode::kExtraObjective ? fairness::WeightPolicy::kUniform : cfg.policy;
  r.lambda = fairness::compute_weights(policy, ledger, d - 1, future, cfg.policy_params).lambda;

  // Topology.
  if (cfg.mode == RunMode::kFixedTopology) {
    r.topology = resolve_topology(net, cfg.fixed_topology);
  } else {
    optmodel::DayAheadConfig dac = cfg.day_ahead;
    dac.v_min = net.limits.v_min;
    dac.v_max = net.limits.v_max;
    if (cfg.mode == RunMode::kExtraObjective) {
      dac.extra_objective_weight = cfg.extra_objective_weight;
      dac.prior_curtailed = prior_curtailed;
      dac.prior_available = prior_available;
    }
    try {
      auto model = optmodel::build_day_ahead_model(net, collapse_identical(scen), r.lambda, dac);
      std::optional<std::vector<bool>> hint;
      if (previous) hint = previous->closed;
      const auto sol = optmodel::solve_day_ahead(model, net, dac, hint);
      r.topology = sol.topology;
      r.da_objective = sol.objective;
      r.da_gap = sol.mip_gap;
      r.da_solved = true;
      const auto range = check_day_ahead(net, model, sol);
      r.da_ac_v_max = range.hi;
      r.da_ac_v_min = range.lo;
    } catch (const InfeasibleError& e) {
      rethrow_with(e, where + " day-ahead");
    } catch (const DivergenceError& e) {
      rethrow_with(e, where + " day-ahead");
    }
  }
  const auto radial = netmodel::validate_radiality(net, r.topology);
  if (!radial.ok()) throw ValidationError(where + ": topology is not radial: " + radial.message);

  // Real time on the realization.
  const auto& real = scen.realization;
  const double dt = scen.timestep_minutes / 60.0;
  const std::size_t steps = real.horizon();
  std::vector<double> p(np, 0.0), q(np, 0.0);
  r.realized.assign(np, 0.0);
  r.mpp.assign(np, 0.0);

  powerflow::PowerFlowState state;
  try {
    state = powerflow::solve_ac_power_flow(net, r.topology,
                                           powerflow::bus_injections(net, loads_at(net, real, 0), p, q));
  } catch (const DivergenceError& e) {
    rethrow_with(e, where + " initial state");
  }
  std::optional<powerflow::SensitivityMatrices> frozen;
  if (cfg.plant_mode == PlantMode::kLinearSelfFeedback) {
    frozen = powerflow::compute_sensitivities(net, r.topology, state);
  }

  VoltageRange rt_range;
  for (std::size_t t = 0; t < steps; ++t) {
    const std::string at = fmt::format("{} step {}", where, t);
    const auto load = loads_at(net, real, t);
    std::vector<double> mpp(np);
    for (std::size_t l = 0; l < np; ++l) mpp[l] = net.pv_plants[l].s_max * real.pv_factor(l, t);
    const bool night = std::all_of(mpp.begin(), mpp.end(), [](double v) { return v == 0.0; });

    StepTrace tr;
    tr.step = t;
    try {
      if (night && cfg.plant_mode == PlantMode::kAc) {
        std::fill(p.begin(), p.end(), 0.0);
        std::fill(q.begin(), q.end(), 0.0);
        tr.skipped = true;
      } else {
        rtcontrol::RtStepInput in;
        in.topology = r.topology;
        in.prev_state = state;
        in.prev_p = p;
        in.prev_q = q;
        in.mpp_forecast = mpp;
        in.load_forecast = load;
        in.weights = r.lambda;
        in.v_min = net.limits.v_min;
        in.v_max = net.limits.v_max;
        in.polygon_segments = cfg.rt_polygon_segments;
        in.load_delta = cfg.rt_load_delta;
        if (cfg.mode == RunMode::kExtraObjective) {
          rtcontrol::FairnessTarget f{prior_curtailed, prior_available, dt};
          for (std::size_t l = 0; l < np; ++l) {
            f.curtailed[l] += r.mpp[l] - r.realized[l];
            f.available[l] += r.mpp[l];
          }
          in.fairness = std::move(f);
        }
        const auto sens = frozen ? *frozen : powerflow::compute_sensitivities(net, r.topology, state);
        const auto sp = rtcontrol::solve_rt_step(rtcontrol::build_rt_step(net, in, sens));
        p = sp.p;
        q = sp.q;
        tr.skipped = sp.skipped;
        tr.fallback = sp.fallback;
        tr.binding_buses = sp.binding_buses;
        if (sp.fallback) ++r.fallback_steps;
        if (cfg.plant_mode == PlantMode::kLinearSelfFeedback) {
          state.v = sp.predicted_v;
          state.s_inj = powerflow::bus_injections(net, load, p, q);
        }
      }
      if (cfg.plant_mode == PlantMode::kAc) {
        state = powerflow::solve_ac_power_flow(net, r.topology, powerflow::bus_injections(net, load, p, q));
      }
    } catch (const InfeasibleError& e) {
      rethrow_with(e, at);
    } catch (const DivergenceError& e) {
      rethrow_with(e, at);
    }

    if (night) {
      const bool nonzero = std::any_of(p.begin(), p.end(), [](double v) { return v != 0.0; }) ||
                           std::any_of(q.begin(), q.end(), [](double v) { return v != 0.0; });
      if (nonzero) ++r.night_nonzero;
    }
    for (std::size_t l = 0; l < np; ++l) {
      if (!state.energized[net.pv_plants[l].bus]) continue;
      r.realized[l] += p[l] * dt;
      r.mpp[l] += std::min(mpp[l], net.pv_plants[l].s_max) * dt;
    }
    VoltageRange step_range;
    step_range.add(net, state);
    rt_range.hi = std::max(rt_range.hi, step_range.hi);
    rt_range.lo = std::min(rt_range.lo, step_range.lo);
    tr.v_max = step_range.hi;
    tr.v_min = step_range.lo;
    tr.mpp = std::move(mpp);
    tr.p = p;
    tr.q = q;
    r.steps.push_back(std::move(tr));
  }
  r.rt_v_max = rt_range.hi;
  r.rt_v_min = rt_range.lo;
  ledger.append_day(r.realized, r.mpp);
  return r;
}

std::vector<scenario::ScenarioSet> load_scenarios(const SimulationConfig& cfg) {
  std::vector<scenario::ScenarioSet> out;
  if (cfg.scenario.kind == ScenarioSource::Kind::kFixture) {
    const auto day = scenario::load_day_directory(cfg.scenario.fixture_dir);
    out.assign(static_cast<std::size_t>(cfg.days), day);
    return out;
  }
  const auto days = scenario::synth_profiles(cfg.seed, cfg.days, cfg.scenario.cloudiness, cfg.scenario.synth);
  for (const auto& d : days) {
    out.push_back(scenario::pair_extremes(d.pv_candidates, d.load_candidates, d.load_candidates,
                                          d.realization, 15));
  }
  return out;
}

SimulationReport run_horizon(const SimulationConfig& cfg, const netmodel::Network& net,
                             const std::vector<scenario::ScenarioSet>& days) {
  cfg.validate();
  if (days.size() < static_cast<std::size_t>(cfg.days)) {
    throw ValidationError(fmt::format("{} scenario days given for a {}-day run", days.size(), cfg.days));
  }
  SimulationReport rep;
  rep.config = cfg;
  rep.network = net;
  if (cfg.v_min) rep.network.limits.v_min = *cfg.v_min;
  if (cfg.v_max) rep.network.limits.v_max = *cfg.v_max;
  rep.ledger = fairness::CurtailmentLedger(net.pv_plants.size());

  std::optional<netmodel::Topology> previous;
  for (int k = 1; k <= cfg.days; ++k) {
    const auto d = static_cast<std::size_t>(k);
    rep.days.push_back(run_day(d, rep.network, days[d - 1], rep.ledger, cfg, previous));
    previous = rep.days.back().topology;

    DaySummary s;
    s.day = d;
    const auto g_day = rep.ledger.generation(d, d);
    const auto g_cum = rep.ledger.cumulative_generation(d);
    s.jfi_day = fairness::jfi(g_day);
    s.jfi_cumulative = fairness::jfi(g_cum);
    double rd = 0.0, md = 0.0, rc = 0.0, mc = 0.0;
    for (std::size_t l = 0; l < rep.ledger.plants(); ++l) {
      rd += rep.ledger.realized(d, l);
      md += rep.ledger.mpp(d, l);
      for (std::size_t j = 1; j <= d; ++j) {
        rc += rep.ledger.realized(j, l);
        mc += rep.ledger.mpp(j, l);
      }
      s.e_day.push_back(1.0 - g_day[l]);
      s.e_cumulative.push_back(1.0 - g_cum[l]);
    }
    s.curtailed_day = md > 0.0 ? 1.0 - rd / md : 0.0;
    s.curtailed_cumulative = mc > 0.0 ? 1.0 - rc / mc : 0.0;
    rep.summary.push_back(std::move(s));
  }
  rep.final_jfi = rep.summary.back().jfi_cumulative;
  rep.total_curtailment = rep.summary.back().curtailed_cumulative;
  return rep;
}

SimulationReport run_horizon(const SimulationConfig& cfg) {
  cfg.validate();
  const auto net = netmodel::build_network(netmodel::load_grid_config(cfg.grid_path));
  return run_horizon(cfg, net, load_scenarios(cfg));
}

}  // namespace pvfair::sim
