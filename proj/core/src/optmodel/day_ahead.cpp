#include "pvfair/optmodel/day_ahead.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pvfair/error.hpp"
#include "pvfair/netmodel/radiality.hpp"
#include "pvfair/optmodel/polygon.hpp"

namespace pvfair::optmodel {

void DayAheadConfig::validate() const {
  if (!(v_min > 0.0) || !(v_min < v_max)) throw ValidationError("day-ahead needs 0 < v_min < v_max");
  if (polygon_segments < 3) throw ValidationError("polygon_segments must be at least 3");
  if (timestep_minutes <= 0) throw ValidationError("timestep_minutes must be positive");
  if (!(loss_weight >= 0.0)) throw ValidationError("loss_weight must be non-negative");
  for (double r : loss_points) {
    if (!(r > 0.0)) throw ValidationError("loss tangent points must be positive");
  }
  if (big_m && !(*big_m > 0.0)) throw ValidationError("big_m must be positive");
  if (!(mip_gap >= 0.0)) throw ValidationError("mip_gap must be non-negative");
  if (node_limit < 0) throw ValidationError("node_limit must be non-negative");
}

double compute_big_m(const netmodel::Network& net, const DayAheadConfig& cfg) {
  if (cfg.big_m) return *cfg.big_m;
  double flow = 0.0;
  for (const auto& ln : net.lines) {
    if (!(ln.p_max > 0.0) || !std::isfinite(ln.p_max) || !(ln.q_max > 0.0) ||
        !std::isfinite(ln.q_max)) {
      throw ValidationError("big-M needs finite positive flow bounds on every line");
    }
    flow = std::max(flow, 2.0 * std::abs(ln.r) * ln.p_max + 2.0 * std::abs(ln.x) * ln.q_max);
  }
  return cfg.v_max * cfg.v_max - cfg.v_min * cfg.v_min + flow;
}

DayAheadModel build_day_ahead_model(const netmodel::Network& net, const scenario::ScenarioSet& scen_in,
                                    const std::vector<double>& weights, const DayAheadConfig& cfg,
                                    const ModelVariant& variant) {
  cfg.validate();
  scen_in.validate();
  if (weights.size() != net.pv_plants.size()) {
    throw ValidationError(fmt::format("{} weights given for {} PV plants", weights.size(),
                                      net.pv_plants.size()));
  }
  for (double lam : weights) {
    if (!(lam >= 0.0) || !std::isfinite(lam)) throw ValidationError("weights must be finite and >= 0");
  }
  if (scen_in.timestep_minutes > cfg.timestep_minutes) {
    throw ValidationError("scenario cadence is coarser than the day-ahead cadence");
  }
  const scenario::ScenarioSet scen = scenario::resample(scen_in, cfg.timestep_minutes);

  DayAheadModel m;
  m.scenarios = scen.scenarios.size();
  m.steps = scen.horizon();
  m.plants = net.pv_plants.size();
  m.buses = net.bus_count();
  m.lines = net.line_count();
  m.step_hours = cfg.timestep_minutes / 60.0;
  m.big_m = compute_big_m(net, cfg);
  auto& lp = m.lp;
  const double dt = m.step_hours;

  // Topology: switch statuses and orientations, shared by every slot.
  m.xi.resize(m.lines);
  for (std::size_t e = 0; e < m.lines; ++e) {
    const auto& ln = net.lines[e];
    if (variant.fixed_closed) {
      if (variant.fixed_closed->size() != m.lines) throw ValidationError("fixed topology size mismatch");
      if (!ln.switchable && !(*variant.fixed_closed)[e]) {
        throw ValidationError(fmt::format("line {} has no switch but is fixed open", e));
      }
    }
    const double xi_fixed = variant.fixed_closed && !(*variant.fixed_closed)[e] ? 0.0 : 1.0;
    const bool into_from_forbidden = net.is_slack(ln.from);
    const bool into_to_forbidden = net.is_slack(ln.to);
    m.d_forward.push_back(lp.add_variable(fmt::format("d[{}>]", e), 0.0, into_to_forbidden ? 0.0 : 1.0));
    m.d_backward.push_back(lp.add_variable(fmt::format("d[{}<]", e), 0.0, into_from_forbidden ? 0.0 : 1.0));
    if (ln.switchable) {
      VarId xi = lp.add_binary(fmt::format("xi[{}]", e));
      if (variant.fixed_closed) lp.set_bounds(xi, xi_fixed, xi_fixed);
      m.xi[e] = xi;
      lp.add_eq(fmt::format("rad.sw[{}]", e),
                {{m.d_forward[e], 1.0}, {m.d_backward[e], 1.0}, {xi, -1.0}}, 0.0);
    } else {
      lp.add_eq(fmt::format("rad.line[{}]", e), {{m.d_forward[e], 1.0}, {m.d_backward[e], 1.0}}, 1.0);
    }
  }
  for (std::size_t b = 0; b < m.buses; ++b) {
    if (net.is_slack(b)) continue;
    std::vector<Term> in;
    for (std::size_t e = 0; e < m.lines; ++e) {
      if (net.lines[e].to == b) in.push_back({m.d_forward[e], 1.0});
      if (net.lines[e].from == b) in.push_back({m.d_backward[e], 1.0});
    }
    if (in.empty()) throw ValidationError(fmt::format("bus {} has no line", net.buses[b].id));
    lp.add_eq(fmt::format("rad.in[{}]", b), std::move(in), 1.0);
  }

  const auto pv_polygon = [&](double s_max) { return polygonize_quadratic(s_max, cfg.polygon_segments); };
  const double vmin2 = cfg.v_min * cfg.v_min;
  const double vmax2 = cfg.v_max * cfg.v_max;

  const std::size_t slots = m.scenarios * m.steps;
  m.p.reserve(slots * m.plants);
  m.q.reserve(slots * m.plants);
  m.w.reserve(slots * m.buses);
  m.p_flow.reserve(slots * m.lines);

  std::vector<double> plant_energy(m.plants, 0.0);
  double offset = 0.0;

  for (std::size_t w_i = 0; w_i < m.scenarios; ++w_i) {
    const auto& prof = scen.scenarios[w_i];
    for (std::size_t t = 0; t < m.steps; ++t) {
      const std::string tag = fmt::format("{},{}", w_i, t);

      for (std::size_t b = 0; b < m.buses; ++b) {
        m.load_p.push_back(net.buses[b].load_p * prof.load_p_factor(b, t));
        m.load_q.push_back(net.buses[b].load_q * prof.load_q_factor(b, t));
        if (net.is_slack(b)) {
          m.w.emplace_back(std::nullopt);
        } else {
          m.w.emplace_back(lp.add_variable(fmt::format("w[{},{}]", tag, b), vmin2, vmax2));
        }
      }

      for (std::size_t i = 0; i < m.plants; ++i) {
        const auto& pv = net.pv_plants[i];
        const double mpp = pv.s_max * prof.pv_factor(i, t);
        const double p_ub = std::min(mpp, pv.s_max);
        const double q_ub = std::min(pv.s_max, pv.zeta() * p_ub);
        m.mpp.push_back(p_ub);
        VarId p = lp.add_variable(fmt::format("p[{},{}]", tag, i), 0.0, p_ub, -weights[i] * dt);
        VarId q = lp.add_variable(fmt::format("q[{},{}]", tag, i), -q_ub, q_ub);
        m.p.push_back(p);
        m.q.push_back(q);
        offset += weights[i] * dt * p_ub;
        plant_energy[i] += dt * p_ub;
        if (p_ub > 0.0) {
          lp.add_le(fmt::format("pf+[{},{}]", tag, i), {{q, 1.0}, {p, -pv.zeta()}}, 0.0);
          lp.add_ge(fmt::format("pf-[{},{}]", tag, i), {{q, 1.0}, {p, pv.zeta()}}, 0.0);
          for (const auto& h : pv_polygon(pv.s_max)) {
            // Skip planes already implied by the variable box.
            if (std::max(0.0, h.a) * p_ub + std::abs(h.b) * q_ub <= h.c) continue;
            lp.add_le(fmt::format("cap[{},{}]", tag, i), {{p, h.a}, {q, h.b}}, h.c);
          }
        }
      }

      // No line carries more than the whole feeder can import or export in
      // this slot, which bounds every flow far below the ratings off-peak.
      double load_pos = 0.0, load_neg = 0.0, loadq_pos = 0.0, loadq_neg = 0.0;
      for (std::size_t b = 0; b < m.buses; ++b) {
        const std::size_t k = m.slot(w_i, t) * m.buses + b;
        if (net.is_slack(b)) continue;
        (m.load_p[k] > 0.0 ? load_pos : load_neg) += std::abs(m.load_p[k]);
        (m.load_q[k] > 0.0 ? loadq_pos : loadq_neg) += std::abs(m.load_q[k]);
      }
      double pv_p = 0.0, pv_q = 0.0;
      for (std::size_t i = 0; i < m.plants; ++i) {
        const auto& v = lp.variable(m.q[m.slot(w_i, t) * m.plants + i]);
        pv_p += lp.variable(m.p[m.slot(w_i, t) * m.plants + i]).upper;
        pv_q += v.upper;
      }
      const double slot_p = std::max(pv_p + load_neg, load_pos) + 1e-6;
      const double slot_q = pv_q + std::max(loadq_pos, loadq_neg) + 1e-6;

      std::vector<std::vector<Term>> bal_p(m.buses), bal_q(m.buses);
      for (std::size_t e = 0; e < m.lines; ++e) {
        const auto& ln = net.lines[e];
        const double p_max = std::min(ln.p_max, slot_p);
        const double q_max = std::min(ln.q_max, slot_q);
        const double line_m = cfg.big_m ? *cfg.big_m
                                        : vmax2 - vmin2 + 2.0 * std::abs(ln.r) * p_max +
                                              2.0 * std::abs(ln.x) * q_max;
        const std::size_t base = m.slot(w_i, t) * m.buses;
        // Voltage-drop terms w_b − w_a + 2(r P + x Q) for flow (P, Q) sent
        // from a to b; slack v² = 1 is returned as a constant.
        auto drop = [&](std::size_t a, std::size_t b, VarId pp, VarId qq, double& constant) {
          std::vector<Term> terms{{pp, 2.0 * ln.r}, {qq, 2.0 * ln.x}};
          constant = 0.0;
          if (m.w[base + b]) {
            terms.push_back({*m.w[base + b], 1.0});
          } else {
            constant += 1.0;
          }
          if (m.w[base + a]) {
            terms.push_back({*m.w[base + a], -1.0});
          } else {
            constant -= 1.0;
          }
          return terms;
        };

        VarId pf = lp.add_variable(fmt::format("Pf[{},{}]", tag, e), -p_max, p_max);
        VarId qf = lp.add_variable(fmt::format("Qf[{},{}]", tag, e), -q_max, q_max);
        m.p_flow.push_back(pf);
        m.q_flow.push_back(qf);

        double c = 0.0;
        auto terms = drop(ln.from, ln.to, pf, qf, c);
        if (!ln.switchable) {
          // Closed in every topology: whichever way it is oriented, the drop
          // equation holds with the signed flow from `from` to `to`.
          lp.add_eq(fmt::format("vc=[{},{}]", tag, e), std::move(terms), -c);
        } else {
          // An open switch carries nothing and decouples its end voltages:
          // |P| <= ξ·P_max, |Q| <= ξ·Q_max, |drop| <= M (1 − ξ).
          const VarId xi = *m.xi[e];
          auto gate = [&](VarId v, double bound, const char* name) {
            lp.add_le(fmt::format("fb{}+[{},{}]", name, tag, e), {{v, 1.0}, {xi, -bound}}, 0.0);
            lp.add_ge(fmt::format("fb{}-[{},{}]", name, tag, e), {{v, 1.0}, {xi, bound}}, 0.0);
          };
          gate(pf, p_max, "p");
          gate(qf, q_max, "q");
          auto up = terms;
          up.push_back({xi, line_m});
          lp.add_le(fmt::format("vc+[{},{}]", tag, e), std::move(up), line_m - c);
          terms.push_back({xi, -line_m});
          lp.add_ge(fmt::format("vc-[{},{}]", tag, e), std::move(terms), -line_m - c);
        }
        bal_p[ln.from].push_back({pf, 1.0});
        bal_p[ln.to].push_back({pf, -1.0});
        bal_q[ln.from].push_back({qf, 1.0});
        bal_q[ln.to].push_back({qf, -1.0});

        // Ampacity, skipped when the flow box already lies inside the disc.
        const double amp = cfg.v_min * ln.i_max;
        if (p_max * p_max + q_max * q_max > amp * amp) {
          for (const auto& h : polygonize_quadratic(amp, cfg.polygon_segments)) {
            lp.add_le(fmt::format("amp[{},{}]", tag, e), {{pf, h.a}, {qf, h.b}}, h.c);
          }
        }

        // Loss epigraph, separable in P² and Q², each under-estimated by
        // tangents at ±ρ.
        auto epigraph = [&](VarId flow, double bound, const char* name) {
          VarId sq = lp.add_variable(fmt::format("{}[{},{}]", name, tag, e), 0.0, kInf,
                                     cfg.loss_weight * dt * ln.r);
          m.loss.push_back(sq);
          if (!(cfg.loss_weight > 0.0) || !(ln.r > 0.0)) return;
          for (double frac : cfg.loss_points) {
            const double rho = frac * bound;
            for (double sign : {1.0, -1.0}) {
              lp.add_ge(fmt::format("loss[{},{}]", tag, e), {{sq, 1.0}, {flow, -2.0 * sign * rho}},
                        -rho * rho);
            }
          }
        };
        epigraph(pf, p_max, "sqp");
        epigraph(qf, q_max, "sqq");
      }

      for (std::size_t b = 0; b < m.buses; ++b) {
        if (net.is_slack(b)) continue;
        const std::size_t load_at = m.slot(w_i, t) * m.buses + b;
        auto tp = std::move(bal_p[b]);
        auto tq = std::move(bal_q[b]);
        for (std::size_t i = 0; i < m.plants; ++i) {
          if (net.pv_plants[i].bus != b) continue;
          tp.push_back({m.p[m.slot(w_i, t) * m.plants + i], -1.0});
          tq.push_back({m.q[m.slot(w_i, t) * m.plants + i], -1.0});
        }
        lp.add_eq(fmt::format("bal.p[{},{}]", tag, b), std::move(tp), -m.load_p[load_at]);
        lp.add_eq(fmt::format("bal.q[{},{}]", tag, b), std::move(tq), -m.load_q[load_at]);
      }
    }
  }

  if (cfg.extra_objective_weight > 0.0) {
    double total = 0.0;
    for (double e : plant_energy) total += e;
    VarId eta = lp.add_variable("eta", 0.0, 1.0, cfg.extra_objective_weight * total);
    m.eta = eta;
    const auto prior = [&](const std::vector<double>& v, std::size_t i) {
      if (v.empty()) return 0.0;
      if (v.size() != m.plants) throw ValidationError("prior energies do not match the plant count");
      return static_cast<double>(m.scenarios) * v[i];
    };
    for (std::size_t i = 0; i < m.plants; ++i) {
      const double avail = plant_energy[i] + prior(cfg.prior_available, i);
      if (!(avail > 0.0)) continue;
      // η·(A + E_i) + Σ Δt·p >= C + E_i: curtailed share of plant i, earlier
      // days included (once per scenario), stays below η.
      std::vector<Term> terms{{eta, avail}};
      for (std::size_t s = 0; s < slots; ++s) terms.push_back({m.p[s * m.plants + i], dt});
      lp.add_ge(fmt::format("eta[{}]", i), std::move(terms),
                plant_energy[i] + prior(cfg.prior_curtailed, i));
    }
  }
  lp.set_objective_offset(offset);
  return m;
}

namespace {

LinearModel without_voltage_coupling(const LinearModel& src) {
  LinearModel out;
  for (const auto& v : src.variables()) out.add_variable(v.name, v.lower, v.upper, v.cost, v.integer);
  for (const auto& r : src.constraints()) {
    if (r.name.rfind("vc", 0) == 0) continue;
    out.add_constraint(r.name, r.terms, r.lower, r.upper);
  }
  return out;
}

std::string diagnose_infeasible(const DayAheadModel& model) {
  SolveOptions opts;
  opts.mip_gap = 1.0;
  opts.time_limit = 60.0;
  const auto relaxed = solve(without_voltage_coupling(model.lp), opts);
  if (relaxed.has_solution || relaxed.status == SolveStatus::kOptimal) {
    return "voltage box: no radial topology keeps every voltage within limits, even with full "
           "curtailment";
  }
  return "radiality: no radial configuration supplies every bus from a substation";
}

}  // namespace

DayAheadSolution solve_day_ahead(DayAheadModel& model, const netmodel::Network& net,
                                 const DayAheadConfig& cfg,
                                 const std::optional<std::vector<bool>>& hint) {
  SolveOptions opts;
  opts.mip_gap = cfg.mip_gap;
  opts.time_limit = cfg.time_limit;
  opts.node_limit = cfg.node_limit;
  opts.verbose = cfg.verbose;

  if (hint && hint->size() == model.lines) {
    std::vector<std::pair<double, double>> saved;
    for (std::size_t e = 0; e < model.lines; ++e) {
      if (!model.xi[e]) continue;
      const auto& v = model.lp.variable(*model.xi[e]);
      saved.emplace_back(v.lower, v.upper);
      // A switch already fixed by the variant keeps its status.
      if (v.lower != v.upper) {
        const double s = (*hint)[e] ? 1.0 : 0.0;
        model.lp.set_bounds(*model.xi[e], s, s);
      }
    }
    SolveOptions seed_opts;
    seed_opts.time_limit = cfg.time_limit;
    const SolveResult seeded = solve(model.lp, seed_opts);
    std::size_t k = 0;
    for (std::size_t e = 0; e < model.lines; ++e) {
      if (!model.xi[e]) continue;
      model.lp.set_bounds(*model.xi[e], saved[k].first, saved[k].second);
      ++k;
    }
    if (seeded.has_solution) opts.start = seeded.x;
  }

  DayAheadSolution sol;
  for (int attempt = 0;; ++attempt) {
    const SolveResult res = solve(model.lp, opts);
    if (res.status == SolveStatus::kInfeasible) {
      throw InfeasibleError("day-ahead model infeasible (" + diagnose_infeasible(model) + ")");
    }
    if (!res.has_solution) {
      throw InfeasibleError(std::string("day-ahead solve ended without an incumbent: ") +
                            to_string(res.status) + " (" + res.message + ")");
    }

    netmodel::Topology topo;
    topo.closed.assign(model.lines, true);
    topo.d_forward.resize(model.lines);
    topo.d_backward.resize(model.lines);
    sol.d_forward_raw.resize(model.lines);
    sol.d_backward_raw.resize(model.lines);
    for (std::size_t e = 0; e < model.lines; ++e) {
      if (model.xi[e]) topo.closed[e] = res.x[model.xi[e]->index] > 0.5;
      sol.d_forward_raw[e] = res.x[model.d_forward[e].index];
      sol.d_backward_raw[e] = res.x[model.d_backward[e].index];
      topo.d_forward[e] = sol.d_forward_raw[e] > 0.5 ? 1.0 : 0.0;
      topo.d_backward[e] = sol.d_backward_raw[e] > 0.5 ? 1.0 : 0.0;
    }
    const auto report = netmodel::validate_radiality(net, topo);
    if (!report.ok()) {
      if (attempt >= cfg.max_cuts) {
        throw InfeasibleError("day-ahead incumbents stay non-radial after " +
                              std::to_string(attempt) + " cuts: " + report.message);
      }
      // Exclude this switch pattern: Σ_{open} ξ + Σ_{closed} (1 − ξ) >= 1.
      std::vector<Term> terms;
      double rhs = 1.0;
      for (std::size_t e = 0; e < model.lines; ++e) {
        if (!model.xi[e]) continue;
        if (topo.closed[e]) {
          terms.push_back({*model.xi[e], -1.0});
          rhs -= 1.0;
        } else {
          terms.push_back({*model.xi[e], 1.0});
        }
      }
      if (terms.empty()) throw InfeasibleError("fixed topology is not radial: " + report.message);
      model.lp.add_ge(fmt::format("nogood[{}]", attempt), std::move(terms), rhs);
      ++sol.cuts;
      continue;
    }

    sol.topology = std::move(topo);
    sol.status = res.status;
    sol.objective = res.objective;
    sol.mip_gap = res.mip_gap;
    sol.p.reserve(model.p.size());
    for (auto v : model.p) sol.p.push_back(res.x[v.index]);
    for (auto v : model.q) sol.q.push_back(res.x[v.index]);
    for (const auto& v : model.w) sol.w.push_back(v ? res.x[v->index] : 1.0);
    sol.loss_term = 0.0;
    for (auto v : model.loss) sol.loss_term += model.lp.variable(v).cost * res.x[v.index];
    sol.curtailment.assign(model.plants, std::vector<double>(model.scenarios, 0.0));
    for (std::size_t s = 0; s < model.scenarios; ++s) {
      for (std::size_t t = 0; t < model.steps; ++t) {
        for (std::size_t i = 0; i < model.plants; ++i) {
          const std::size_t k = model.slot(s, t) * model.plants + i;
          sol.curtailment[i][s] += model.step_hours * std::max(0.0, model.mpp[k] - sol.p[k]);
        }
      }
    }
    return sol;
  }
}

}  // namespace pvfair::optmodel
