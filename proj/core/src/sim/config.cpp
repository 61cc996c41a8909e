#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <toml.hpp>

#include "pvfair/netmodel/radiality.hpp"
#include "pvfair/sim/simulation.hpp"

namespace pvfair::sim {

namespace fs = std::filesystem;

const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::kReconfigure: return "reconfigure";
    case RunMode::kFixedTopology: return "fixed-topology";
    case RunMode::kExtraObjective: return "extra-objective";
  }
  return "unknown";
}

const char* to_string(PlantMode m) {
  return m == PlantMode::kAc ? "ac" : "linear-self-feedback";
}

RunMode parse_run_mode(const std::string& s) {
  if (s == "reconfigure") return RunMode::kReconfigure;
  if (s == "fixed-topology" || s == "fixed") return RunMode::kFixedTopology;
  if (s == "extra-objective") return RunMode::kExtraObjective;
  throw ValidationError(fmt::format("unknown run mode '{}'", s));
}

PlantMode parse_plant_mode(const std::string& s) {
  if (s == "ac") return PlantMode::kAc;
  if (s == "linear-self-feedback" || s == "linear") return PlantMode::kLinearSelfFeedback;
  throw ValidationError(fmt::format("unknown plant mode '{}'", s));
}

void SimulationConfig::validate() const {
  if (days < 1) throw ValidationError("days must be at least 1");
  if (grid_path.empty()) throw ValidationError("simulation config needs a grid path");
  if (scenario.kind == ScenarioSource::Kind::kFixture && scenario.fixture_dir.empty()) {
    throw ValidationError("fixture scenarios need a directory");
  }
  if (!(scenario.cloudiness >= 0.0 && scenario.cloudiness <= 1.0)) {
    throw ValidationError("cloudiness must lie in [0, 1]");
  }
  if (rt_polygon_segments < 3) throw ValidationError("realtime polygon_segments must be at least 3");
  if (!(extra_objective_weight >= 0.0)) throw ValidationError("extra_objective_weight must be >= 0");
  if (v_min && v_max && !(*v_min < *v_max)) throw ValidationError("v_min must be below v_max");
  day_ahead.validate();
}

namespace {

std::string resolve(const std::string& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path.string() : (fs::path(base) / path).lexically_normal().string();
}

template <class T>
T get_or(const toml::node_view<const toml::node>& n, T fallback, const char* key) {
  if (!n) return fallback;
  if (auto v = n.value<T>()) return *v;
  throw ParseError(fmt::format("config key '{}' has the wrong type", key));
}

}  // namespace

SimulationConfig parse_simulation_config(const std::string& text, const std::string& base_dir) {
  toml::table doc;
  try {
    doc = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw ParseError(std::string(e.description()), static_cast<int>(e.source().begin.line),
                     static_cast<int>(e.source().begin.column));
  }
  const toml::node_view<const toml::node> root{doc};
  SimulationConfig c;
  c.name = get_or<std::string>(root["name"], c.name, "name");
  auto grid = root["grid"].value<std::string>();
  if (!grid) throw ParseError("simulation config needs 'grid'");
  c.grid_path = resolve(base_dir, *grid);
  c.days = static_cast<int>(get_or<int64_t>(root["days"], c.days, "days"));
  c.seed = static_cast<std::uint64_t>(get_or<int64_t>(root["seed"], 1, "seed"));
  c.mode = parse_run_mode(get_or<std::string>(root["mode"], "reconfigure", "mode"));
  c.fixed_topology = get_or<std::string>(root["fixed_topology"], c.fixed_topology, "fixed_topology");
  c.plant_mode = parse_plant_mode(get_or<std::string>(root["plant_mode"], "ac", "plant_mode"));
  if (root["v_min"]) c.v_min = get_or<double>(root["v_min"], 0.0, "v_min");
  if (root["v_max"]) c.v_max = get_or<double>(root["v_max"], 0.0, "v_max");

  const auto sc = root["scenario"];
  if (!sc) throw ParseError("simulation config needs a [scenario] table");
  const auto source = get_or<std::string>(sc["source"], "fixture", "scenario.source");
  if (source == "fixture") {
    c.scenario.kind = ScenarioSource::Kind::kFixture;
    auto dir = sc["dir"].value<std::string>();
    if (!dir) throw ParseError("fixture scenarios need 'dir'");
    c.scenario.fixture_dir = resolve(base_dir, *dir);
  } else if (source == "synthetic") {
    c.scenario.kind = ScenarioSource::Kind::kSynthetic;
    c.scenario.cloudiness = get_or<double>(sc["cloudiness"], 0.0, "scenario.cloudiness");
    auto& so = c.scenario.synth;
    so.load_base = get_or<double>(sc["load_base"], so.load_base, "scenario.load_base");
    so.load_morning_peak = get_or<double>(sc["load_morning_peak"], so.load_morning_peak, "load_morning_peak");
    so.load_evening_peak = get_or<double>(sc["load_evening_peak"], so.load_evening_peak, "load_evening_peak");
    so.load_noise = get_or<double>(sc["load_noise"], so.load_noise, "scenario.load_noise");
    so.forecast_spread = get_or<double>(sc["forecast_spread"], so.forecast_spread, "forecast_spread");
  } else {
    throw ParseError(fmt::format("unknown scenario source '{}'", source));
  }

  const auto pol = root["policy"];
  c.policy = fairness::parse_policy(get_or<std::string>(pol["name"], "inverse", "policy.name"));
  c.policy_params.horizon_days =
      static_cast<int>(get_or<int64_t>(pol["horizon_days"], c.policy_params.horizon_days, "horizon_days"));
  c.policy_params.rolling_days =
      static_cast<int>(get_or<int64_t>(pol["rolling_days"], c.policy_params.rolling_days, "rolling_days"));
  c.policy_params.floor = get_or<double>(pol["floor"], c.policy_params.floor, "policy.floor");

  const auto da = root["day_ahead"];
  auto& d = c.day_ahead;
  if (auto m = da["big_m"]; m) {
    if (auto s = m.value<std::string>()) {
      if (*s != "auto") throw ParseError("big_m must be a number or \"auto\"");
    } else {
      d.big_m = get_or<double>(m, 0.0, "big_m");
    }
  }
  d.polygon_segments = static_cast<int>(get_or<int64_t>(da["polygon_segments"], d.polygon_segments, "polygon_segments"));
  d.timestep_minutes = static_cast<int>(get_or<int64_t>(da["timestep_minutes"], d.timestep_minutes, "timestep_minutes"));
  d.loss_weight = get_or<double>(da["loss_weight"], d.loss_weight, "loss_weight");
  d.mip_gap = get_or<double>(da["mip_gap"], d.mip_gap, "mip_gap");
  d.time_limit = get_or<double>(da["time_limit"], d.time_limit, "time_limit");
  d.node_limit = static_cast<int>(get_or<int64_t>(da["node_limit"], d.node_limit, "node_limit"));
  c.extra_objective_weight = get_or<double>(da["extra_objective_weight"], c.extra_objective_weight,
                                            "extra_objective_weight");

  const auto rt = root["realtime"];
  c.rt_polygon_segments = static_cast<int>(get_or<int64_t>(rt["polygon_segments"], c.rt_polygon_segments, "realtime.polygon_segments"));
  c.rt_load_delta = get_or<bool>(rt["load_delta"], c.rt_load_delta, "realtime.load_delta");

  c.validate();
  return c;
}

SimulationConfig load_simulation_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigNotFound(fmt::format("config file not found: {}", path));
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_simulation_config(buf.str(), fs::path(path).parent_path().string());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

netmodel::Topology resolve_topology(const netmodel::Network& net, const std::string& spec) {
  std::vector<bool> closed;
  if (spec == "base") {
    closed = netmodel::case_topology(net).closed;
  } else if (spec.rfind("open:", 0) == 0) {
    closed.assign(net.line_count(), true);
    std::string list = spec.substr(5);
    for (char& ch : list) {
      if (ch == ';') ch = ',';
    }
    std::istringstream items(list);
    std::string item;
    while (std::getline(items, item, ',')) {
      if (item.empty()) continue;
      const auto dash = item.find('-');
      if (dash == std::string::npos) throw ValidationError(fmt::format("bad line '{}' in topology", item));
      int a = 0, b = 0;
      try {
        a = std::stoi(item.substr(0, dash));
        b = std::stoi(item.substr(dash + 1));
      } catch (const std::exception&) {
        throw ValidationError(fmt::format("bad line '{}' in topology", item));
      }
      const auto e = net.find_line(net.bus_index(a), net.bus_index(b));
      if (!e) throw ValidationError(fmt::format("no line {}-{}", a, b));
      if (!net.lines[*e].switchable) throw ValidationError(fmt::format("line {}-{} has no switch", a, b));
      closed[*e] = false;
    }
  } else {
    throw ValidationError(fmt::format("topology '{}' is neither 'base' nor 'open:...'", spec));
  }
  auto topo = netmodel::orient_topology(net, closed);
  const auto report = netmodel::validate_radiality(net, topo);
  if (!report.ok()) throw ValidationError(fmt::format("topology '{}' is not radial: {}", spec, report.message));
  return topo;
}

std::string describe_topology(const netmodel::Network& net, const netmodel::Topology& topo) {
  std::string out = "open:";
  bool first = true;
  for (std::size_t e = 0; e < net.line_count(); ++e) {
    if (topo.closed[e]) continue;
    if (!first) out += ';';
    first = false;
    out += fmt::format("{}-{}", net.buses[net.lines[e].from].id, net.buses[net.lines[e].to].id);
  }
  return out;
}

}  // namespace pvfair::sim
