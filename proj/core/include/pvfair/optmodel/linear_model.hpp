#pragma once

#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace pvfair::optmodel {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct VarId {
  std::size_t index = 0;
  bool operator==(const VarId&) const = default;
};

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  double cost = 0.0;
  bool integer = false;
};

struct Term {
  VarId var;
  double coef;
};

/// Row `lower <= Σ coef·x <= upper` (either side may be infinite).
struct Constraint {
  std::string name;
  std::vector<Term> terms;
  double lower = -kInf;
  double upper = kInf;
};

/// Sparse minimization model with continuous and integer columns.
class LinearModel {
 public:
  VarId add_variable(std::string name, double lower, double upper, double cost = 0.0,
                     bool integer = false);
  VarId add_binary(std::string name, double cost = 0.0) {
    return add_variable(std::move(name), 0.0, 1.0, cost, true);
  }

  void add_constraint(std::string name, std::vector<Term> terms, double lower, double upper);
  void add_le(std::string name, std::vector<Term> terms, double rhs) {
    add_constraint(std::move(name), std::move(terms), -kInf, rhs);
  }
  void add_ge(std::string name, std::vector<Term> terms, double rhs) {
    add_constraint(std::move(name), std::move(terms), rhs, kInf);
  }
  void add_eq(std::string name, std::vector<Term> terms, double rhs) {
    add_constraint(std::move(name), std::move(terms), rhs, rhs);
  }

  void set_cost(VarId v, double cost) { vars_.at(v.index).cost = cost; }
  void add_cost(VarId v, double cost) { vars_.at(v.index).cost += cost; }
  void set_bounds(VarId v, double lower, double upper);
  void set_objective_offset(double offset) { offset_ = offset; }

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  const Variable& variable(VarId v) const { return vars_.at(v.index); }
  double objective_offset() const { return offset_; }

  std::size_t variable_count() const { return vars_.size(); }
  std::size_t constraint_count() const { return rows_.size(); }
  std::size_t integer_count() const;

  /// Objective value Σ cost·x + offset for a full primal vector.
  double evaluate_objective(const std::vector<double>& x) const;
  /// Largest bound or row violation of `x` (0 when feasible).
  double max_violation(const std::vector<double>& x) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  double offset_ = 0.0;
};

/// Writes the model in fixed-name free MPS (column names are the variable
/// names with whitespace replaced). Integer columns are wrapped in MARKER
/// lines; the objective offset becomes a negated RHS entry on the cost row.
void write_mps(const LinearModel& model, std::ostream& out, const std::string& name = "PVFAIR");

/// JSON object mapping MPS column/row names to model indices, so that an
/// external solver's solution file can be mapped back onto the model.
std::string variable_map_json(const LinearModel& model);

/// Name used for variable `index` in write_mps (sanitized, unique).
std::string mps_column_name(const LinearModel& model, std::size_t index);

}  // namespace pvfair::optmodel
