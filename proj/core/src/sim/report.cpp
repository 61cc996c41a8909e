#include <filesystem>
#include <fstream>
#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pvfair/sim/simulation.hpp"

namespace pvfair::sim {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", p.string()));
  return out;
}

std::string line_name(const netmodel::Network& net, std::size_t e) {
  return fmt::format("{}-{}", net.buses[net.lines[e].from].id, net.buses[net.lines[e].to].id);
}

}  // namespace

void write_report(const SimulationReport& rep, const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root);
  const auto& net = rep.network;
  const auto& cfg = rep.config;
  const auto switches = net.switchable_lines();

  {
    auto out = open_out(root / "per_day.csv");
    out << "day,topology,jfi_day,jfi_cumulative,curtailed_day,curtailed_cumulative,"
           "da_objective,da_gap,da_ac_v_min,da_ac_v_max,rt_v_min,rt_v_max,fallback_steps,night_nonzero\n";
    for (std::size_t k = 0; k < rep.days.size(); ++k) {
      const auto& d = rep.days[k];
      const auto& s = rep.summary[k];
      out << fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{}\n",
                         d.day, describe_topology(net, d.topology), s.jfi_day, s.jfi_cumulative,
                         s.curtailed_day, s.curtailed_cumulative, d.da_objective, d.da_gap,
                         d.da_solved ? d.da_ac_v_min : 0.0, d.da_solved ? d.da_ac_v_max : 0.0,
                         d.rt_v_min, d.rt_v_max, d.fallback_steps, d.night_nonzero);
    }
  }
  {
    auto out = open_out(root / "per_plant.csv");
    out << "day,plant,bus,lambda,realized,mpp,curtailed_day,curtailed_cumulative\n";
    for (std::size_t k = 0; k < rep.days.size(); ++k) {
      const auto& d = rep.days[k];
      for (std::size_t l = 0; l < net.pv_plants.size(); ++l) {
        out << fmt::format("{},{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", d.day, l,
                           net.buses[net.pv_plants[l].bus].id, d.lambda[l], d.realized[l], d.mpp[l],
                           rep.summary[k].e_day[l], rep.summary[k].e_cumulative[l]);
      }
    }
  }
  {
    auto out = open_out(root / "switch_status.csv");
    out << "day";
    for (auto e : switches) out << ',' << line_name(net, e);
    out << '\n';
    for (const auto& d : rep.days) {
      out << d.day;
      for (auto e : switches) out << ',' << (d.topology.closed[e] ? 1 : 0);
      out << '\n';
    }
  }
  {
    auto out = open_out(root / "rt_trace.csv");
    out << "day,step,plant,mpp,p,q,binding_buses,fallback\n";
    for (const auto& d : rep.days) {
      for (const auto& st : d.steps) {
        if (st.skipped) continue;
        std::string binding;
        for (auto b : st.binding_buses) {
          if (!binding.empty()) binding += ';';
          binding += std::to_string(net.buses[b].id);
        }
        for (std::size_t l = 0; l < st.p.size(); ++l) {
          out << fmt::format("{},{},{},{:.17g},{:.17g},{:.17g},{},{}\n", d.day, st.step, l, st.mpp[l],
                             st.p[l], st.q[l], binding, st.fallback ? 1 : 0);
        }
      }
    }
  }
  {
    auto out = open_out(root / "ledger.csv");
    rep.ledger.write_csv(out);
  }

  nlohmann::ordered_json j;
  j["name"] = cfg.name;
  j["mode"] = to_string(cfg.mode);
  j["policy"] = cfg.mode == RunMode::kExtraObjective ? "uniform" : fairness::to_string(cfg.policy);
  j["plant_mode"] = to_string(cfg.plant_mode);
  j["fixed_topology"] = cfg.mode == RunMode::kFixedTopology ? cfg.fixed_topology : "";
  j["network"] = net.name;
  j["days"] = rep.days.size();
  j["seed"] = cfg.seed;
  j["final_jfi"] = rep.final_jfi;
  j["total_curtailment"] = rep.total_curtailment;
  nlohmann::ordered_json plants = nlohmann::ordered_json::array();
  for (std::size_t l = 0; l < net.pv_plants.size(); ++l) {
    plants.push_back({{"bus", net.buses[net.pv_plants[l].bus].id},
                      {"capacity", net.pv_plants[l].s_max},
                      {"curtailed_cumulative", rep.summary.empty() ? 0.0 : rep.summary.back().e_cumulative[l]}});
  }
  j["plants"] = plants;
  std::map<std::string, int> topo_count;
  std::vector<std::string> topo_order;
  int fallback = 0, night_nonzero = 0;
  double v_hi = -1e300, v_lo = 1e300, da_hi = -1e300, da_lo = 1e300;
  for (const auto& d : rep.days) {
    const auto t = describe_topology(net, d.topology);
    if (topo_count[t]++ == 0) topo_order.push_back(t);
    fallback += d.fallback_steps;
    night_nonzero += d.night_nonzero;
    v_hi = std::max(v_hi, d.rt_v_max);
    v_lo = std::min(v_lo, d.rt_v_min);
    if (d.da_solved) {
      da_hi = std::max(da_hi, d.da_ac_v_max);
      da_lo = std::min(da_lo, d.da_ac_v_min);
    }
  }
  nlohmann::ordered_json topos = nlohmann::ordered_json::array();
  for (const auto& t : topo_order) topos.push_back({{"topology", t}, {"days", topo_count[t]}});
  j["topologies"] = topos;
  j["fallback_steps"] = fallback;
  j["night_nonzero_steps"] = night_nonzero;
  j["rt_v_max"] = v_hi;
  j["rt_v_min"] = v_lo;
  if (da_hi > -1e300) {
    j["da_ac_v_max"] = da_hi;
    j["da_ac_v_min"] = da_lo;
  }
  auto out = open_out(root / "report.json");
  out << j.dump(2) << '\n';
}

ReportSummary read_report_summary(const std::string& dir) {
  const fs::path p = fs::path(dir) / "report.json";
  std::ifstream in(p);
  if (!in) throw Error(fmt::format("no report at {}", p.string()));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    ReportSummary s;
    s.name = j.at("name").get<std::string>();
    s.mode = j.at("mode").get<std::string>();
    s.policy = j.at("policy").get<std::string>();
    s.fixed_topology = j.value("fixed_topology", "");
    s.days = j.at("days").get<std::size_t>();
    s.final_jfi = j.at("final_jfi").get<double>();
    s.total_curtailment = j.at("total_curtailment").get<double>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("{}: {}", p.string(), e.what()));
  }
}

}  // namespace pvfair::sim
