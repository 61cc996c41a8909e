// pvfair: run fairness-aware reconfiguration experiments and compare them.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pvfair/error.hpp"
#include "pvfair/netmodel/grid_config.hpp"
#include "pvfair/netmodel/radiality.hpp"
#include "pvfair/optmodel/day_ahead.hpp"
#include "pvfair/sim/simulation.hpp"

namespace fs = std::filesystem;
using namespace pvfair;

namespace {

struct RunArgs {
  std::string config;
  std::string out = "report";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> policy;
  std::optional<std::string> fixed_topology;
  std::optional<std::string> mode;
  std::optional<int> days;
  std::optional<std::string> plant_mode;
};

sim::SimulationConfig load_with_overrides(const RunArgs& a) {
  auto cfg = sim::load_simulation_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.policy) cfg.policy = fairness::parse_policy(*a.policy);
  if (a.mode) cfg.mode = sim::parse_run_mode(*a.mode);
  if (a.fixed_topology) {
    cfg.mode = sim::RunMode::kFixedTopology;
    cfg.fixed_topology = *a.fixed_topology;
  }
  if (a.days) cfg.days = *a.days;
  if (a.plant_mode) cfg.plant_mode = sim::parse_plant_mode(*a.plant_mode);
  cfg.validate();
  return cfg;
}

int cmd_run(const RunArgs& a) {
  const auto cfg = load_with_overrides(a);
  const auto rep = sim::run_horizon(cfg);
  sim::write_report(rep, a.out);
  std::cout << fmt::format("{} ({}): {} days, final JFI {:.4f}, PV curtailed {:.4f}\n", cfg.name,
                           sim::to_string(cfg.mode), rep.days.size(), rep.final_jfi,
                           rep.total_curtailment);
  std::cout << "report written to " << a.out << "\n";
  return 0;
}

std::string case_label(const sim::ReportSummary& s) {
  if (s.mode == "fixed-topology") return fmt::format("{} fixed {}", s.name, s.fixed_topology);
  if (s.mode == "extra-objective") return fmt::format("{} extra objective", s.name);
  return fmt::format("{} reconfiguration ({})", s.name, s.policy);
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& csv_path) {
  if (dirs.size() < 2) throw ValidationError("compare needs at least two report directories");
  std::vector<sim::ReportSummary> rows;
  for (const auto& d : dirs) {
    if (!fs::is_directory(d)) throw Error(fmt::format("report directory not found: {}", d));
    rows.push_back(sim::read_report_summary(d));
  }
  std::size_t width = 4;
  for (const auto& r : rows) width = std::max(width, case_label(r).size() + 2);
  std::cout << fmt::format("{:<{}} {:>6} {:>13}\n", "Case", width, "JFI", "PV curtailed");
  for (const auto& r : rows) {
    const bool flag = r.mode == "reconfigure";
    std::cout << fmt::format("{:<{}} {:>6.2f} {:>13.2f}\n", case_label(r) + (flag ? " *" : ""), width,
                             r.final_jfi, r.total_curtailment);
  }
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw Error(fmt::format("cannot write {}", csv_path));
    out << "case,mode,policy,jfi,pv_curtailed,reconfiguration\n";
    for (const auto& r : rows) {
      out << fmt::format("\"{}\",{},{},{:.17g},{:.17g},{}\n", case_label(r), r.mode, r.policy,
                         r.final_jfi, r.total_curtailment, r.mode == "reconfigure" ? 1 : 0);
    }
  }
  return 0;
}

int cmd_validate(const RunArgs& a, const std::string& export_prefix) {
  const auto cfg = load_with_overrides(a);
  auto net = netmodel::build_network(netmodel::load_grid_config(cfg.grid_path));
  const auto base = netmodel::case_topology(net);
  const auto report = netmodel::validate_radiality(net, base);
  std::cout << fmt::format("{}: {} buses, {} lines ({} switchable), {} PV plants\n", net.name,
                           net.bus_count(), net.line_count(), net.switchable_lines().size(),
                           net.pv_plants.size());
  std::cout << "base topology: " << (report.ok() ? "radial" : "NOT radial: " + report.message) << "\n";
  if (!report.ok()) return 1;
  if (cfg.mode == sim::RunMode::kFixedTopology) {
    const auto topo = sim::resolve_topology(net, cfg.fixed_topology);
    std::cout << "fixed topology " << sim::describe_topology(net, topo) << ": radial\n";
  }
  const auto days = sim::load_scenarios(cfg);
  std::cout << fmt::format("scenarios: {} days, {} steps at {} min\n", days.size(),
                           days.front().horizon(), days.front().timestep_minutes);
  if (!export_prefix.empty()) {
    auto dac = cfg.day_ahead;
    dac.v_min = cfg.v_min.value_or(net.limits.v_min);
    dac.v_max = cfg.v_max.value_or(net.limits.v_max);
    const auto model = optmodel::build_day_ahead_model(
        net, days.front(), std::vector<double>(net.pv_plants.size(), 1.0), dac);
    if (const auto dir = fs::path(export_prefix).parent_path(); !dir.empty()) fs::create_directories(dir);
    std::ofstream mps(export_prefix + ".mps");
    optmodel::write_mps(model.lp, mps, cfg.name);
    std::ofstream map(export_prefix + ".json");
    map << optmodel::variable_map_json(model.lp);
    if (!mps || !map) throw Error("cannot write model export " + export_prefix);
    std::cout << fmt::format("day-1 model ({} rows, {} columns) exported to {}.mps/.json\n",
                             model.lp.constraint_count(), model.lp.variable_count(), export_prefix);
  }
  std::cout << "ok\n";
  return 0;
}

void add_run_flags(CLI::App* app, RunArgs& a) {
  app->add_option("--config", a.config, "simulation config (TOML)")->required();
  app->add_option("--seed", a.seed, "seed for synthetic scenarios");
  app->add_option("--policy", a.policy, "uniform|inverse|shrinking|rolling|log|difference");
  app->add_option("--fixed-topology", a.fixed_topology, "hold a topology: base or open:a-b;c-d");
  app->add_option("--mode", a.mode, "reconfigure|fixed-topology|extra-objective");
  app->add_option("--days", a.days, "number of days")->check(CLI::PositiveNumber);
  app->add_option("--plant-mode", a.plant_mode, "ac|linear-self-feedback");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness-aware PV curtailment with daily network reconfiguration"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "run a multi-day simulation and write a report directory");
  add_run_flags(run, run_args);
  run->add_option("--out", run_args.out, "report directory");

  std::vector<std::string> dirs;
  std::string csv;
  auto* compare = app.add_subcommand("compare", "tabulate JFI and curtailment of report directories");
  compare->add_option("reports", dirs, "report directories")->required();
  compare->add_option("--csv", csv, "also write the table as CSV");

  RunArgs val_args;
  std::string export_prefix;
  auto* validate = app.add_subcommand("validate", "parse a config and check radiality");
  add_run_flags(validate, val_args);
  validate->add_option("--export", export_prefix, "write the day-1 model as PREFIX.mps and PREFIX.json");

  CLI11_PARSE(app, argc, argv);

  const RunArgs& a = run->parsed() ? run_args : val_args;
  try {
    if (run->parsed()) return cmd_run(a);
    if (compare->parsed()) return cmd_compare(dirs, csv);
    return cmd_validate(a, export_prefix);
  } catch (const sim::ConfigNotFound& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
