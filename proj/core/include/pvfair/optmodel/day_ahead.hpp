#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pvfair/netmodel/network.hpp"
#include "pvfair/optmodel/linear_model.hpp"
#include "pvfair/optmodel/solver.hpp"
#include "pvfair/scenario/scenario.hpp"

namespace pvfair::optmodel {

struct DayAheadConfig {
  double v_min = 0.95;
  double v_max = 1.05;
  std::optional<double> big_m;  ///< p.u.²; computed by compute_big_m when empty
  int polygon_segments = 12;
  int timestep_minutes = 60;
  double loss_weight = 1.0;
  /// Points, as fractions of a line's flow bound, where the loss epigraph
  /// takes tangents to P² and Q² (mirrored to ±).
  std::vector<double> loss_points = {0.25, 0.75};
  /// When positive, adds weight · (total MPP energy) · η to the objective,
  /// where η bounds every plant's normalized curtailed energy from above.
  double extra_objective_weight = 0.0;
  /// Curtailed and available energy per plant from earlier days (p.u.·h),
  /// counted into η's ratio when the extra objective is active.
  std::vector<double> prior_curtailed;
  std::vector<double> prior_available;
  double mip_gap = 1e-4;
  double time_limit = 600.0;  ///< seconds per solve
  /// Branch-and-bound nodes per solve, 0 for no limit. Unlike the time
  /// limit this stops at the same incumbent on every machine.
  int node_limit = 0;
  int max_cuts = 64;          ///< re-solves allowed after a non-radial incumbent
  bool verbose = false;       ///< forward the solver log to stdout

  void validate() const;
};

/// (v_max² − v_min²) + max over lines of 2|r|·p_max + 2|x|·q_max, or
/// cfg.big_m when set. Throws ValidationError when a flow bound is not a
/// positive finite number.
double compute_big_m(const netmodel::Network& net, const DayAheadConfig& cfg);

struct ModelVariant {
  /// Holds every switch at the given status (indexed by line) instead of
  /// optimizing it. Non-switchable lines must be listed as closed.
  std::optional<std::vector<bool>> fixed_closed;
};

/// The assembled mixed-integer program plus the column of every modelled
/// quantity. Time-indexed arrays are flattened as [(ω·T + t)·N + i].
struct DayAheadModel {
  LinearModel lp;
  std::size_t scenarios = 0;
  std::size_t steps = 0;
  std::size_t plants = 0;
  std::size_t buses = 0;
  std::size_t lines = 0;
  double step_hours = 1.0;
  double big_m = 0.0;

  std::vector<std::optional<VarId>> xi;  ///< per line; empty for fixed lines
  std::vector<VarId> d_forward;
  std::vector<VarId> d_backward;

  std::vector<VarId> p;                ///< per (ω, t, plant)
  std::vector<VarId> q;
  std::vector<double> mpp;             ///< p̂ per (ω, t, plant)
  std::vector<std::optional<VarId>> w; ///< v² per (ω, t, bus); empty at slacks
  std::vector<double> load_p;          ///< per (ω, t, bus)
  std::vector<double> load_q;
  /// Signed flow from lines[e].from towards lines[e].to, per (ω, t, line).
  std::vector<VarId> p_flow;
  std::vector<VarId> q_flow;
  std::vector<VarId> loss;             ///< P² and Q² epigraphs, two per (ω, t, line)
  std::optional<VarId> eta;

  std::size_t slot(std::size_t scenario, std::size_t t) const { return scenario * steps + t; }
};

/// Builds the reconfiguration program over the day-ahead scenarios of
/// `scen` (resampled to cfg.timestep_minutes when finer). `weights` holds
/// one λ per PV plant.
DayAheadModel build_day_ahead_model(const netmodel::Network& net, const scenario::ScenarioSet& scen,
                                    const std::vector<double>& weights, const DayAheadConfig& cfg,
                                    const ModelVariant& variant = {});

struct DayAheadSolution {
  netmodel::Topology topology;
  std::vector<double> d_forward_raw;  ///< solver values before rounding
  std::vector<double> d_backward_raw;
  std::vector<double> p;  ///< per (ω, t, plant), as in DayAheadModel
  std::vector<double> q;
  std::vector<double> w;  ///< v² per (ω, t, bus), 1 at slacks
  /// Curtailed energy Σ_t Δt·(p̂ − p) in p.u.·h, indexed [plant][scenario].
  std::vector<std::vector<double>> curtailment;
  double objective = 0.0;
  double loss_term = 0.0;
  double mip_gap = 0.0;
  SolveStatus status = SolveStatus::kError;
  int cuts = 0;  ///< no-good cuts added to exclude non-radial incumbents
};

/// Solves the model, rounds ξ and d at 0.5 and checks the topology with
/// validate_radiality. A non-radial incumbent (e.g. a loop detached from the
/// substation) is excluded by a no-good cut on ξ and the model re-solved.
///
/// Throws InfeasibleError when no feasible point exists, naming whether the
/// voltage box or the radiality constraints are responsible, and when the
/// time limit passes without an incumbent.
///
/// A radial `hint` (typically yesterday's topology) is evaluated first with
/// the switches held, and its solution seeds the search as an incumbent.
DayAheadSolution solve_day_ahead(DayAheadModel& model, const netmodel::Network& net,
                                 const DayAheadConfig& cfg,
                                 const std::optional<std::vector<bool>>& hint = std::nullopt);

}  // namespace pvfair::optmodel
