#include "pvfair/rtcontrol/controller.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pvfair/error.hpp"
#include "pvfair/optmodel/polygon.hpp"
#include "pvfair/optmodel/solver.hpp"

namespace pvfair::rtcontrol {

using optmodel::LinearModel;
using optmodel::Term;
using optmodel::VarId;

namespace {

constexpr double kBindTol = 1e-7;

// Rows that keep every monitored bus inside [v_min − s, v_max + s].
void add_voltage_rows(LinearModel& lp, const RtModel& m, std::optional<VarId> slack) {
  for (std::size_t b = 0; b < m.base.size(); ++b) {
    if (!m.monitored[b]) continue;
    std::vector<Term> terms;
    const auto row = static_cast<Eigen::Index>(b);
    for (std::size_t l = 0; l < m.p.size(); ++l) {
      const auto col = static_cast<Eigen::Index>(l);
      if (m.kp(row, col) != 0.0) terms.push_back({m.p[l], m.kp(row, col)});
      if (m.kq(row, col) != 0.0) terms.push_back({m.q[l], m.kq(row, col)});
    }
    if (slack) {
      auto lo = terms;
      lo.push_back({*slack, 1.0});
      lp.add_ge(fmt::format("vmin[{}]", b), std::move(lo), m.v_min - m.base[b]);
      terms.push_back({*slack, -1.0});
      lp.add_le(fmt::format("vmax[{}]", b), std::move(terms), m.v_max - m.base[b]);
    } else {
      lp.add_constraint(fmt::format("v[{}]", b), std::move(terms), m.v_min - m.base[b],
                        m.v_max - m.base[b]);
    }
  }
}

// Copy of `src` without its voltage rows (which come last).
LinearModel without_voltage_rows(const LinearModel& src, std::size_t voltage_begin) {
  LinearModel out;
  for (const auto& v : src.variables()) out.add_variable(v.name, v.lower, v.upper, v.cost, v.integer);
  const auto& rows = src.constraints();
  for (std::size_t r = 0; r < voltage_begin; ++r) {
    out.add_constraint(rows[r].name, rows[r].terms, rows[r].lower, rows[r].upper);
  }
  out.set_objective_offset(src.objective_offset());
  return out;
}

optmodel::SolveResult must_solve(const LinearModel& lp, const char* what) {
  auto res = optmodel::solve(lp);
  if (!res.has_solution || res.status != optmodel::SolveStatus::kOptimal) {
    throw InfeasibleError(fmt::format("real-time {} ended {} ({})", what, to_string(res.status),
                                      res.message));
  }
  return res;
}

// Keeps Σ cost·x within a relative tolerance of its optimum.
void pin_objective(LinearModel& lp, double optimum, const char* name) {
  std::vector<Term> terms;
  for (std::size_t j = 0; j < lp.variable_count(); ++j) {
    const double c = lp.variables()[j].cost;
    if (c != 0.0) terms.push_back({VarId{j}, c});
  }
  const double rhs = optimum - lp.objective_offset();
  lp.add_le(name, std::move(terms), rhs + 1e-7 * std::max(1.0, std::abs(rhs)));
}

void clear_costs(LinearModel& lp) {
  for (std::size_t j = 0; j < lp.variable_count(); ++j) lp.set_cost(VarId{j}, 0.0);
  lp.set_objective_offset(0.0);
}

// Second pass: among weighted optima, minimize the largest curtailment.
// Falls back to `x` when the pinned model proves numerically infeasible.
std::vector<double> min_max_curtailment(LinearModel lp, const RtModel& m, double optimum,
                                        std::vector<double> x) {
  pin_objective(lp, optimum, "opt");
  clear_costs(lp);
  VarId z = lp.add_variable("zmax", 0.0, optmodel::kInf, 1.0);
  for (std::size_t l = 0; l < m.p.size(); ++l) {
    // z >= p̂ − p
    lp.add_ge(fmt::format("z[{}]", l), {{z, 1.0}, {m.p[l], 1.0}}, m.mpp[l]);
  }
  auto res = optmodel::solve(lp);
  if (res.has_solution && res.status == optmodel::SolveStatus::kOptimal) return res.x;
  return x;
}

}  // namespace

RtModel build_rt_step(const netmodel::Network& net, const RtStepInput& in,
                      const powerflow::SensitivityMatrices& sens) {
  const std::size_t n = net.bus_count();
  const std::size_t np = net.pv_plants.size();
  if (in.prev_p.size() != np || in.prev_q.size() != np || in.mpp_forecast.size() != np ||
      in.weights.size() != np) {
    throw ValidationError("real-time input does not match the PV plant count");
  }
  if (in.load_forecast.size() != n || in.prev_state.bus_count() != n) {
    throw ValidationError("real-time input does not match the bus count");
  }
  const auto nn = static_cast<Eigen::Index>(n);
  if (sens.kp.rows() != nn || sens.kp.cols() != nn || sens.kq.rows() != nn || sens.kq.cols() != nn) {
    throw ValidationError(fmt::format("sensitivity matrices are {}x{}, network has {} buses",
                                      sens.kp.rows(), sens.kp.cols(), n));
  }
  if (!(in.v_min < in.v_max)) throw ValidationError("real-time voltage limits are inverted");

  RtModel m;
  m.v_min = in.v_min;
  m.v_max = in.v_max;
  m.weights = in.weights;
  m.kp = Eigen::MatrixXd::Zero(nn, static_cast<Eigen::Index>(np));
  m.kq = m.kp;
  for (std::size_t l = 0; l < np; ++l) {
    const auto bus = static_cast<Eigen::Index>(net.pv_plants[l].bus);
    m.kp.col(static_cast<Eigen::Index>(l)) = sens.kp.col(bus);
    m.kq.col(static_cast<Eigen::Index>(l)) = sens.kq.col(bus);
  }

  // Linearization point, optionally shifted by the forecast load change.
  const auto& st = in.prev_state;
  Eigen::VectorXd dp = Eigen::VectorXd::Zero(nn), dq = Eigen::VectorXd::Zero(nn);
  if (in.load_delta) {
    std::vector<Complex> pv_at(n);
    for (std::size_t l = 0; l < np; ++l) pv_at[net.pv_plants[l].bus] += Complex(in.prev_p[l], in.prev_q[l]);
    for (std::size_t b = 0; b < n; ++b) {
      if (!st.energized[b] || net.is_slack(b)) continue;
      const Complex prev_load = pv_at[b] - st.s_inj[b];
      const Complex delta = -(in.load_forecast[b] - prev_load);
      dp(static_cast<Eigen::Index>(b)) = delta.real();
      dq(static_cast<Eigen::Index>(b)) = delta.imag();
    }
  }
  const Eigen::VectorXd shift = sens.kp * dp + sens.kq * dq;
  m.base.resize(n);
  m.monitored.resize(n);
  for (std::size_t b = 0; b < n; ++b) {
    const auto row = static_cast<Eigen::Index>(b);
    m.monitored[b] = st.energized[b] && !net.is_slack(b);
    double v = st.v[b] + shift(row);
    for (std::size_t l = 0; l < np; ++l) {
      const auto col = static_cast<Eigen::Index>(l);
      v -= m.kp(row, col) * in.prev_p[l] + m.kq(row, col) * in.prev_q[l];
    }
    m.base[b] = v;
  }

  auto& lp = m.lp;
  double offset = 0.0;
  for (std::size_t l = 0; l < np; ++l) {
    const auto& pv = net.pv_plants[l];
    if (!(in.mpp_forecast[l] >= 0.0) || !std::isfinite(in.mpp_forecast[l])) {
      throw ValidationError(fmt::format("MPP forecast of plant {} is negative", l));
    }
    const bool live = st.energized[pv.bus];
    const double p_ub = live ? std::min(in.mpp_forecast[l], pv.s_max) : 0.0;
    const double q_ub = std::min(pv.s_max, pv.zeta() * p_ub);
    m.mpp.push_back(std::min(in.mpp_forecast[l], pv.s_max));
    m.p.push_back(lp.add_variable(fmt::format("p[{}]", l), 0.0, p_ub, -in.weights[l]));
    m.q.push_back(lp.add_variable(fmt::format("q[{}]", l), -q_ub, q_ub));
    offset += in.weights[l] * m.mpp[l];
    if (p_ub > 0.0) {
      lp.add_le(fmt::format("pf+[{}]", l), {{m.q[l], 1.0}, {m.p[l], -pv.zeta()}}, 0.0);
      lp.add_ge(fmt::format("pf-[{}]", l), {{m.q[l], 1.0}, {m.p[l], pv.zeta()}}, 0.0);
      for (const auto& h : optmodel::polygonize_quadratic(pv.s_max, in.polygon_segments)) {
        if (std::max(0.0, h.a) * p_ub + std::abs(h.b) * q_ub <= h.c) continue;
        lp.add_le(fmt::format("cap[{}]", l), {{m.p[l], h.a}, {m.q[l], h.b}}, h.c);
      }
    }
  }
  lp.set_objective_offset(offset);

  if (in.fairness) {
    const auto& f = *in.fairness;
    if (f.curtailed.size() != np || f.available.size() != np) {
      throw ValidationError("fairness record does not match the PV plant count");
    }
    m.eta = lp.add_variable("eta", 0.0, 1.0);
    for (std::size_t l = 0; l < np; ++l) {
      const double denom = f.available[l] + m.mpp[l] * f.step_hours;
      if (!(denom > 0.0)) continue;
      // η·E + Δt·p >= C + Δt·p̂
      lp.add_ge(fmt::format("eta[{}]", l), {{*m.eta, denom}, {m.p[l], f.step_hours}},
                f.curtailed[l] + m.mpp[l] * f.step_hours);
    }
  }
  add_voltage_rows(lp, m, std::nullopt);
  return m;
}

RtSetpoint solve_rt_step(const RtModel& m) {
  const std::size_t np = m.p.size();
  RtSetpoint out;
  std::vector<double> x;

  const bool night = std::all_of(m.mpp.begin(), m.mpp.end(), [](double v) { return v == 0.0; });
  if (night) {
    out.skipped = true;
    x.assign(m.lp.variable_count(), 0.0);
  } else {
    LinearModel lp = m.lp;
    if (m.eta) {
      // Fairness first: minimize η, then hold it.
      LinearModel first = lp;
      clear_costs(first);
      first.set_cost(*m.eta, 1.0);
      auto res = optmodel::solve(first);
      if (res.has_solution && res.status == optmodel::SolveStatus::kOptimal) {
        const double eta = res.x[m.eta->index];
        lp.set_bounds(*m.eta, 0.0, std::min(1.0, eta + 1e-7));
      }
    }
    auto res = optmodel::solve(lp);
    if (res.status == optmodel::SolveStatus::kOptimal && res.has_solution) {
      x = min_max_curtailment(lp, m, res.objective, res.x);
    } else if (res.status == optmodel::SolveStatus::kInfeasible) {
      // Limits unreachable: minimize the worst violation, then curtailment.
      std::size_t voltage_begin = 0;
      const auto& rows = m.lp.constraints();
      while (voltage_begin < rows.size() && rows[voltage_begin].name.rfind("v[", 0) != 0) ++voltage_begin;
      LinearModel relaxed = without_voltage_rows(m.lp, voltage_begin);
      if (m.eta) relaxed.set_bounds(*m.eta, 0.0, 1.0);
      LinearModel worst = relaxed;
      clear_costs(worst);
      VarId s = worst.add_variable("slack", 0.0, optmodel::kInf, 1.0);
      add_voltage_rows(worst, m, s);
      const auto first = must_solve(worst, "violation pass");
      out.fallback = true;
      out.violation = first.x[s.index];
      VarId s2 = relaxed.add_variable("slack", 0.0, out.violation * (1 + 1e-7) + 1e-9, 0.0);
      add_voltage_rows(relaxed, m, s2);
      const auto second = must_solve(relaxed, "fallback pass");
      x = second.x;
    } else {
      throw InfeasibleError(fmt::format("real-time step ended {} ({})", to_string(res.status),
                                        res.message));
    }
  }

  out.p.resize(np);
  out.q.resize(np);
  out.curtailed.resize(np);
  for (std::size_t l = 0; l < np; ++l) {
    const double ub = m.lp.variable(m.p[l]).upper;
    const double qb = m.lp.variable(m.q[l]).upper;
    // Clip solver noise back into the box.
    out.p[l] = std::clamp(x[m.p[l].index], 0.0, ub);
    out.q[l] = std::clamp(x[m.q[l].index], -qb, qb);
    out.curtailed[l] = m.mpp[l] - out.p[l];
  }
  out.predicted_v.resize(m.base.size());
  for (std::size_t b = 0; b < m.base.size(); ++b) {
    if (!m.monitored[b]) {
      out.predicted_v[b] = m.base[b];
      continue;
    }
    double v = m.base[b];
    const auto row = static_cast<Eigen::Index>(b);
    for (std::size_t l = 0; l < np; ++l) {
      const auto col = static_cast<Eigen::Index>(l);
      v += m.kp(row, col) * out.p[l] + m.kq(row, col) * out.q[l];
    }
    out.predicted_v[b] = v;
    if (v >= m.v_max - kBindTol || v <= m.v_min + kBindTol) out.binding_buses.push_back(b);
    if (v > m.v_max + kBindTol || v < m.v_min - kBindTol) out.violating_buses.push_back(b);
  }
  return out;
}

}  // namespace pvfair::rtcontrol
