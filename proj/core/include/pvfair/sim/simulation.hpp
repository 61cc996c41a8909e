#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pvfair/error.hpp"
#include "pvfair/fairness/fairness.hpp"
#include "pvfair/netmodel/network.hpp"
#include "pvfair/optmodel/day_ahead.hpp"
#include "pvfair/scenario/scenario.hpp"

namespace pvfair::sim {

enum class RunMode { kReconfigure, kFixedTopology, kExtraObjective };
enum class PlantMode { kAc, kLinearSelfFeedback };

const char* to_string(RunMode m);
const char* to_string(PlantMode m);
RunMode parse_run_mode(const std::string& s);
PlantMode parse_plant_mode(const std::string& s);

/// Where each day's scenarios come from.
struct ScenarioSource {
  enum class Kind { kFixture, kSynthetic } kind = Kind::kFixture;
  std::string fixture_dir;  ///< repeated every day
  double cloudiness = 0.0;  ///< synthetic only
  scenario::SynthOptions synth;
};

/// Everything a run needs. Paths are resolved against the config file.
///
/// TOML layout (every key but `grid` and `[scenario]` is optional):
///
///     name = "deterministic"
///     grid = "../grids/case33_pv.toml"
///     days = 30
///     seed = 1
///     mode = "reconfigure"          # reconfigure | fixed-topology | extra-objective
///     fixed_topology = "base"       # base | open:21-8,9-15,...
///     plant_mode = "ac"             # ac | linear-self-feedback
///     v_min = 0.95                  # defaults to the grid config
///     v_max = 1.05
///     [scenario]
///     source = "fixture"            # fixture | synthetic
///     dir = "../fixtures/deterministic"
///     cloudiness = 0.6              # synthetic
///     [policy]
///     name = "inverse"              # uniform | inverse | shrinking | rolling | log | difference
///     horizon_days = 30
///     rolling_days = 15
///     floor = 1e-3
///     [day_ahead]
///     big_m = "auto"                # or a number in p.u.²
///     polygon_segments = 12
///     timestep_minutes = 60
///     loss_weight = 1.0
///     mip_gap = 1e-4
///     time_limit = 600
///     node_limit = 0                # branch-and-bound nodes, 0 = unlimited
///     extra_objective_weight = 1.0  # extra-objective mode only
///     [realtime]
///     polygon_segments = 12
///     load_delta = true
struct SimulationConfig {
  std::string name = "run";
  std::string grid_path;
  ScenarioSource scenario;
  int days = 30;
  std::uint64_t seed = 1;
  RunMode mode = RunMode::kReconfigure;
  std::string fixed_topology = "base";
  PlantMode plant_mode = PlantMode::kAc;
  std::optional<double> v_min;  ///< override the grid's limits
  std::optional<double> v_max;
  fairness::WeightPolicy policy = fairness::WeightPolicy::kInverse;
  fairness::WeightParams policy_params;
  optmodel::DayAheadConfig day_ahead;
  double extra_objective_weight = 1.0;
  int rt_polygon_segments = 12;
  bool rt_load_delta = true;

  /// Throws ValidationError on out-of-range values.
  void validate() const;
};

SimulationConfig parse_simulation_config(const std::string& toml_text, const std::string& base_dir = ".");
/// Throws ConfigNotFound when the file does not exist.
SimulationConfig load_simulation_config(const std::string& path);

class ConfigNotFound : public Error {
 public:
  using Error::Error;
};

/// Resolves `fixed_topology` ("base" or "open:a-b,c-d" by bus id) to line
/// statuses. Throws ValidationError for unknown lines or a non-radial result.
netmodel::Topology resolve_topology(const netmodel::Network& net, const std::string& spec);
/// "open:" form of a topology, switches in line order.
std::string describe_topology(const netmodel::Network& net, const netmodel::Topology& topo);

struct StepTrace {
  std::size_t step = 0;
  std::vector<double> mpp;
  std::vector<double> p;
  std::vector<double> q;
  std::vector<std::size_t> binding_buses;
  bool fallback = false;
  bool skipped = false;
  double v_max = 0.0;  ///< realized, over energized buses
  double v_min = 0.0;
};

struct DayResult {
  std::size_t day = 0;
  netmodel::Topology topology;
  std::vector<double> lambda;
  std::vector<double> realized;  ///< per plant, p.u.·h
  std::vector<double> mpp;
  double da_objective = 0.0;
  double da_gap = 0.0;
  bool da_solved = false;  ///< false in fixed-topology mode
  /// AC re-simulation of the day-ahead setpoints on every scenario step.
  double da_ac_v_max = 0.0;
  double da_ac_v_min = 0.0;
  double rt_v_max = 0.0;
  double rt_v_min = 0.0;
  int fallback_steps = 0;
  int night_nonzero = 0;  ///< night steps with a non-zero setpoint
  std::vector<StepTrace> steps;
};

/// Weights from the ledger, day-ahead solve (unless the topology is held),
/// then 96 real-time steps on the realization; appends the day to `ledger`.
/// `previous` seeds the day-ahead search. Solver failures are rethrown as
/// InfeasibleError naming the day (and step).
DayResult run_day(std::size_t d, const netmodel::Network& net, const scenario::ScenarioSet& scen,
                  fairness::CurtailmentLedger& ledger, const SimulationConfig& cfg,
                  const std::optional<netmodel::Topology>& previous = std::nullopt);

struct DaySummary {
  std::size_t day = 0;
  double jfi_day = 1.0;
  double jfi_cumulative = 1.0;
  double curtailed_day = 0.0;         ///< 1 − Σ realized / Σ mpp over the day
  double curtailed_cumulative = 0.0;  ///< same over days 1..d
  std::vector<double> e_day;          ///< ℰ per plant
  std::vector<double> e_cumulative;
};

struct SimulationReport {
  SimulationConfig config;
  netmodel::Network network;
  fairness::CurtailmentLedger ledger;
  std::vector<DayResult> days;
  std::vector<DaySummary> summary;
  double final_jfi = 1.0;
  double total_curtailment = 0.0;
};

SimulationReport run_horizon(const SimulationConfig& cfg);
/// Same, on an already built network and per-day scenarios.
SimulationReport run_horizon(const SimulationConfig& cfg, const netmodel::Network& net,
                             const std::vector<scenario::ScenarioSet>& days);

/// Scenario sets for cfg.days days as configured.
std::vector<scenario::ScenarioSet> load_scenarios(const SimulationConfig& cfg);

/// Writes report.json, per_day.csv, per_plant.csv, switch_status.csv,
/// rt_trace.csv and ledger.csv into `dir` (created if needed).
void write_report(const SimulationReport& report, const std::string& dir);

/// Headline numbers read back from a report directory.
struct ReportSummary {
  std::string name;
  std::string mode;
  std::string policy;
  std::string fixed_topology;
  std::size_t days = 0;
  double final_jfi = 0.0;
  double total_curtailment = 0.0;
};
ReportSummary read_report_summary(const std::string& dir);

}  // namespace pvfair::sim
