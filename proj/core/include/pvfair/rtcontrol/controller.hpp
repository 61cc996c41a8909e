#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "pvfair/netmodel/network.hpp"
#include "pvfair/optmodel/linear_model.hpp"
#include "pvfair/powerflow/power_flow.hpp"
#include "pvfair/powerflow/sensitivity.hpp"

namespace pvfair::rtcontrol {

using powerflow::Complex;

/// Cumulative record used by the extra-objective baseline: the step LP first
/// minimizes the largest normalized curtailment (curtailed + this step) /
/// (available + this step) over all plants, then the weighted curtailment.
struct FairnessTarget {
  std::vector<double> curtailed;  ///< per plant, p.u.·h so far
  std::vector<double> available;  ///< per plant, MPP energy so far
  double step_hours = 0.25;
};

struct RtStepInput {
  netmodel::Topology topology;
  powerflow::PowerFlowState prev_state;
  std::vector<double> prev_p;  ///< setpoints applied at the previous step
  std::vector<double> prev_q;
  std::vector<double> mpp_forecast;   ///< p̂ per plant
  std::vector<Complex> load_forecast; ///< demand per bus (consumption positive)
  std::vector<double> weights;        ///< λ per plant
  double v_min = 0.95;
  double v_max = 1.05;
  int polygon_segments = 12;
  /// Adds K·Δinjection for the change between the measured and forecast
  /// loads to the voltage prediction.
  bool load_delta = true;
  std::optional<FairnessTarget> fairness;
};

struct RtSetpoint {
  std::vector<double> p;
  std::vector<double> q;
  std::vector<double> predicted_v;  ///< per bus, linear model
  std::vector<double> curtailed;    ///< p̂ − p per plant
  std::vector<std::size_t> binding_buses;
  /// Set when the limits were unreachable and the worst violation was
  /// minimized instead; `violating_buses` lists the predicted offenders.
  bool fallback = false;
  double violation = 0.0;
  std::vector<std::size_t> violating_buses;
  bool skipped = false;  ///< night step, no LP solved
};

/// Per-step linear program around the previous operating point.
struct RtModel {
  optmodel::LinearModel lp;
  std::vector<optmodel::VarId> p;
  std::vector<optmodel::VarId> q;
  std::optional<optmodel::VarId> eta;
  std::vector<double> mpp;     ///< p̂ capped at s_max
  std::vector<double> weights;
  /// predicted v = base + Σ_l kp(m, l)·p_l + kq(m, l)·q_l, per bus m.
  std::vector<double> base;
  Eigen::MatrixXd kp;  ///< bus × plant
  Eigen::MatrixXd kq;
  std::vector<bool> monitored;  ///< energized non-slack buses
  double v_min = 0.95;
  double v_max = 1.05;
};

/// Throws ValidationError on size mismatches between input, sensitivities
/// and network, or on a negative MPP forecast.
RtModel build_rt_step(const netmodel::Network& net, const RtStepInput& input,
                      const powerflow::SensitivityMatrices& sens);

/// Weighted curtailment minimization followed by a second pass that keeps
/// the optimum and minimizes the largest per-plant curtailment. With every
/// p̂ = 0 the step is skipped and all setpoints are zero.
RtSetpoint solve_rt_step(const RtModel& model);

}  // namespace pvfair::rtcontrol
