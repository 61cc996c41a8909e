#include "pvfair/netmodel/grid_config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <toml.hpp>

#include "pvfair/error.hpp"
#include "pvfair/netmodel/case_file.hpp"

namespace pvfair::netmodel {
namespace {

double number_or(const toml::node_view<const toml::node>& node, double fallback) {
  if (!node) return fallback;
  if (auto v = node.value<double>()) return *v;
  throw ParseError("expected a number for key in grid config");
}

int require_int(const toml::table& t, const char* key, const char* where) {
  auto v = t[key].value<int64_t>();
  if (!v) throw ParseError(std::string(where) + " needs an integer '" + key + "'");
  return static_cast<int>(*v);
}

}  // namespace

GridConfig parse_grid_config(const std::string& toml_text, const std::string& base_dir) {
  toml::table doc;
  try {
    doc = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    throw ParseError(std::string(e.description()), static_cast<int>(e.source().begin.line),
                     static_cast<int>(e.source().begin.column));
  }

  GridConfig cfg;
  auto case_path = doc["case"].value<std::string>();
  if (!case_path) throw ParseError("grid config needs a 'case' path");
  std::filesystem::path p(*case_path);
  cfg.case_path = p.is_absolute() ? p.string() : (std::filesystem::path(base_dir) / p).string();

  const toml::node_view<const toml::node> root{doc};
  cfg.limits.v_min = number_or(root["v_min"], cfg.limits.v_min);
  cfg.limits.v_max = number_or(root["v_max"], cfg.limits.v_max);
  cfg.default_i_max = number_or(root["line_defaults"]["i_max"], cfg.default_i_max);
  cfg.default_p_max = number_or(root["line_defaults"]["p_max"], cfg.default_p_max);
  cfg.default_q_max = number_or(root["line_defaults"]["q_max"], cfg.default_q_max);

  if (auto arr = doc["switchable"].as_array()) {
    for (const auto& item : *arr) {
      const auto* pair = item.as_array();
      if (!pair || pair->size() != 2) throw ParseError("switchable entries must be [from, to] pairs");
      auto a = (*pair)[0].value<int64_t>();
      auto b = (*pair)[1].value<int64_t>();
      if (!a || !b) throw ParseError("switchable entries must be integer bus ids");
      cfg.switchable.emplace_back(static_cast<int>(*a), static_cast<int>(*b));
    }
  }
  if (auto arr = doc["extra_line"].as_array()) {
    for (const auto& item : *arr) {
      const auto* t = item.as_table();
      if (!t) throw ParseError("extra_line entries must be tables");
      ExtraLine ln;
      ln.from = require_int(*t, "from", "extra_line");
      ln.to = require_int(*t, "to", "extra_line");
      ln.r_ohm = t->get("r_ohm") ? (*t)["r_ohm"].value_or(0.0) : 0.0;
      ln.x_ohm = t->get("x_ohm") ? (*t)["x_ohm"].value_or(0.0) : 0.0;
      ln.closed = (*t)["closed"].value_or(false);
      cfg.extra_lines.push_back(ln);
    }
  }
  if (auto arr = doc["pv"].as_array()) {
    for (const auto& item : *arr) {
      const auto* t = item.as_table();
      if (!t) throw ParseError("pv entries must be tables");
      PvPlacement pv;
      pv.bus_id = require_int(*t, "bus", "pv");
      pv.capacity = (*t)["capacity"].value_or(0.0);
      pv.pf_min = (*t)["pf_min"].value_or(0.95);
      cfg.pv.push_back(pv);
    }
  }
  return cfg;
}

GridConfig load_grid_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open grid config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_grid_config(ss.str(), std::filesystem::path(path).parent_path().string());
}

Network apply_grid_config(Network net, const GridConfig& cfg) {
  net.limits = cfg.limits;
  const double z_base = net.base_voltage * net.base_voltage / net.base_power;
  for (const auto& extra : cfg.extra_lines) {
    Line ln;
    ln.from = net.bus_index(extra.from);
    ln.to = net.bus_index(extra.to);
    if (!(z_base > 0.0)) throw ValidationError("extra lines need the case baseKV");
    ln.r = extra.r_ohm / z_base;
    ln.x = extra.x_ohm / z_base;
    ln.closed_in_case = extra.closed;
    net.lines.push_back(ln);
  }
  for (auto& ln : net.lines) {
    if (ln.rate_a > 0.0) continue;
    ln.i_max = cfg.default_i_max;
    ln.p_max = cfg.default_p_max;
    ln.q_max = cfg.default_q_max;
  }
  for (const auto& [a, b] : cfg.switchable) {
    auto e = net.find_line(net.bus_index(a), net.bus_index(b));
    if (!e) {
      throw ValidationError("no line between buses " + std::to_string(a) + " and " +
                            std::to_string(b) + " to mark switchable");
    }
    net.lines[*e].switchable = true;
  }
  net = augment_pv(net, cfg.pv);
  net.validate();
  return net;
}

Network build_network(const GridConfig& cfg) {
  return apply_grid_config(load_case_file(cfg.case_path), cfg);
}

}  // namespace pvfair::netmodel
