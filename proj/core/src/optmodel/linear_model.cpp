#include "pvfair/optmodel/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pvfair/error.hpp"

namespace pvfair::optmodel {

VarId LinearModel::add_variable(std::string name, double lower, double upper, double cost,
                                bool integer) {
  if (lower > upper) throw ValidationError("variable " + name + " has lower > upper");
  vars_.push_back(Variable{std::move(name), lower, upper, cost, integer});
  return VarId{vars_.size() - 1};
}

void LinearModel::add_constraint(std::string name, std::vector<Term> terms, double lower,
                                 double upper) {
  if (!std::isfinite(lower) && !std::isfinite(upper)) {
    throw ValidationError("constraint " + name + " has no finite side");
  }
  if (lower > upper) throw ValidationError("constraint " + name + " has lower > upper");
  for (const auto& t : terms) {
    if (t.var.index >= vars_.size()) {
      throw ValidationError("constraint " + name + " references an undeclared variable");
    }
  }
  // Merge duplicate columns so that every row is a proper sparse vector.
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return a.var.index < b.var.index; });
  std::vector<Term> merged;
  for (const auto& t : terms) {
    if (!merged.empty() && merged.back().var == t.var) {
      merged.back().coef += t.coef;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  rows_.push_back(Constraint{std::move(name), std::move(merged), lower, upper});
}

void LinearModel::set_bounds(VarId v, double lower, double upper) {
  auto& var = vars_.at(v.index);
  if (lower > upper) throw ValidationError("variable " + var.name + " has lower > upper");
  var.lower = lower;
  var.upper = upper;
}

std::size_t LinearModel::integer_count() const {
  return static_cast<std::size_t>(
      std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) { return v.integer; }));
}

double LinearModel::evaluate_objective(const std::vector<double>& x) const {
  double obj = offset_;
  for (std::size_t j = 0; j < vars_.size(); ++j) obj += vars_[j].cost * x.at(j);
  return obj;
}

double LinearModel::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    worst = std::max({worst, vars_[j].lower - x.at(j), x.at(j) - vars_[j].upper});
  }
  for (const auto& row : rows_) {
    double act = 0.0;
    for (const auto& t : row.terms) act += t.coef * x.at(t.var.index);
    worst = std::max({worst, row.lower - act, act - row.upper});
  }
  return worst;
}

std::string mps_column_name(const LinearModel& model, std::size_t index) {
  (void)model;
  return fmt::format("C{:07d}", index);
}

namespace {

std::string row_name(std::size_t index) { return fmt::format("R{:07d}", index); }

std::string num(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

void write_mps(const LinearModel& model, std::ostream& out, const std::string& name) {
  const auto& vars = model.variables();
  const auto& rows = model.constraints();

  out << "NAME          " << name << "\n";
  out << "ROWS\n";
  out << " N  COST\n";
  // Ranged rows are written as L rows with a RANGES entry.
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const bool has_lo = std::isfinite(r.lower);
    const bool has_up = std::isfinite(r.upper);
    char type = 'G';
    if (has_lo && has_up) {
      type = r.lower == r.upper ? 'E' : 'L';
    } else if (has_up) {
      type = 'L';
    }
    out << " " << type << "  " << row_name(i) << "\n";
  }

  // Column-major transposition of the row storage.
  std::vector<std::vector<std::pair<std::size_t, double>>> columns(vars.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& t : rows[i].terms) columns[t.var.index].emplace_back(i, t.coef);
  }

  out << "COLUMNS\n";
  bool in_integer_block = false;
  int marker = 0;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (vars[j].integer != in_integer_block) {
      out << "    MARKER" << marker++ << "  'MARKER'  "
          << (vars[j].integer ? "'INTORG'" : "'INTEND'") << "\n";
      in_integer_block = vars[j].integer;
    }
    const auto col = mps_column_name(model, j);
    if (vars[j].cost != 0.0) out << "    " << col << "  COST  " << num(vars[j].cost) << "\n";
    for (const auto& [row, coef] : columns[j]) {
      out << "    " << col << "  " << row_name(row) << "  " << num(coef) << "\n";
    }
    if (vars[j].cost == 0.0 && columns[j].empty()) out << "    " << col << "  COST  0\n";
  }
  if (in_integer_block) out << "    MARKER" << marker++ << "  'MARKER'  'INTEND'\n";

  out << "RHS\n";
  if (model.objective_offset() != 0.0) {
    out << "    RHS  COST  " << num(-model.objective_offset()) << "\n";
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    double rhs = 0.0;
    if (std::isfinite(r.upper)) {
      rhs = r.upper;
    } else if (std::isfinite(r.lower)) {
      rhs = r.lower;
    }
    if (rhs != 0.0) out << "    RHS  " << row_name(i) << "  " << num(rhs) << "\n";
  }

  bool ranges_header = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (std::isfinite(r.lower) && std::isfinite(r.upper) && r.lower != r.upper) {
      if (!ranges_header) {
        out << "RANGES\n";
        ranges_header = true;
      }
      out << "    RNG  " << row_name(i) << "  " << num(r.upper - r.lower) << "\n";
    }
  }

  out << "BOUNDS\n";
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const auto& v = vars[j];
    const auto col = mps_column_name(model, j);
    const bool lo_inf = !std::isfinite(v.lower);
    const bool up_inf = !std::isfinite(v.upper);
    if (v.integer && v.lower == 0.0 && v.upper == 1.0) {
      out << " BV BND  " << col << "\n";
      continue;
    }
    if (!lo_inf && !up_inf && v.lower == v.upper) {
      out << " FX BND  " << col << "  " << num(v.lower) << "\n";
      continue;
    }
    if (lo_inf && up_inf) {
      out << " FR BND  " << col << "\n";
      continue;
    }
    if (lo_inf) {
      out << " MI BND  " << col << "\n";
    } else if (v.lower != 0.0) {
      out << " LO BND  " << col << "  " << num(v.lower) << "\n";
    }
    if (!up_inf) out << " UP BND  " << col << "  " << num(v.upper) << "\n";
  }
  out << "ENDATA\n";
}

std::string variable_map_json(const LinearModel& model) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json cols = nlohmann::ordered_json::object();
  for (std::size_t j = 0; j < model.variable_count(); ++j) {
    cols[mps_column_name(model, j)] = {{"index", j}, {"name", model.variables()[j].name}};
  }
  nlohmann::ordered_json rows = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < model.constraint_count(); ++i) {
    rows[row_name(i)] = {{"index", i}, {"name", model.constraints()[i].name}};
  }
  doc["columns"] = std::move(cols);
  doc["rows"] = std::move(rows);
  doc["objective_offset"] = model.objective_offset();
  return doc.dump(2);
}

}  // namespace pvfair::optmodel
