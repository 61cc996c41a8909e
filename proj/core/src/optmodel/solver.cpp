#include "pvfair/optmodel/solver.hpp"

#include <cmath>
#include <cstdlib>

#include <Highs.h>

namespace pvfair::optmodel {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kTimeLimit: return "time-limit";
    case SolveStatus::kError: return "error";
  }
  return "unknown";
}

namespace {

double clamp_inf(double v) {
  if (v == kInf) return kHighsInf;
  if (v == -kInf) return -kHighsInf;
  return v;
}

}  // namespace

SolveResult solve(const LinearModel& model, const SolveOptions& opts) {
  const auto& vars = model.variables();
  const auto& rows = model.constraints();

  HighsLp lp;
  lp.num_col_ = static_cast<HighsInt>(vars.size());
  lp.num_row_ = static_cast<HighsInt>(rows.size());
  lp.sense_ = ObjSense::kMinimize;
  lp.offset_ = model.objective_offset();
  lp.col_cost_.reserve(vars.size());
  bool any_integer = false;
  for (const auto& v : vars) {
    lp.col_cost_.push_back(v.cost);
    lp.col_lower_.push_back(clamp_inf(v.lower));
    lp.col_upper_.push_back(clamp_inf(v.upper));
    lp.integrality_.push_back(v.integer ? HighsVarType::kInteger : HighsVarType::kContinuous);
    any_integer = any_integer || v.integer;
  }
  if (!any_integer) lp.integrality_.clear();

  // Column-wise constraint matrix.
  std::vector<HighsInt> col_count(vars.size() + 1, 0);
  for (const auto& r : rows) {
    lp.row_lower_.push_back(clamp_inf(r.lower));
    lp.row_upper_.push_back(clamp_inf(r.upper));
    for (const auto& t : r.terms) ++col_count[t.var.index + 1];
  }
  for (std::size_t j = 0; j < vars.size(); ++j) col_count[j + 1] += col_count[j];
  lp.a_matrix_.format_ = MatrixFormat::kColwise;
  lp.a_matrix_.num_col_ = lp.num_col_;
  lp.a_matrix_.num_row_ = lp.num_row_;
  lp.a_matrix_.start_ = col_count;
  lp.a_matrix_.index_.resize(static_cast<std::size_t>(col_count.back()));
  lp.a_matrix_.value_.resize(lp.a_matrix_.index_.size());
  std::vector<HighsInt> fill(col_count.begin(), col_count.end() - 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& t : rows[i].terms) {
      const auto k = static_cast<std::size_t>(fill[t.var.index]++);
      lp.a_matrix_.index_[k] = static_cast<HighsInt>(i);
      lp.a_matrix_.value_[k] = t.coef;
    }
  }

  Highs highs;
  highs.setOptionValue("output_flag", opts.verbose);
  highs.setOptionValue("mip_rel_gap", opts.mip_gap);
  highs.setOptionValue("time_limit", opts.time_limit);
  highs.setOptionValue("primal_feasibility_tolerance", opts.feasibility_tolerance);
  highs.setOptionValue("mip_feasibility_tolerance", opts.feasibility_tolerance);
  highs.setOptionValue("threads", 1);
  highs.setOptionValue("random_seed", 0);
  if (opts.node_limit > 0) highs.setOptionValue("mip_max_nodes", static_cast<HighsInt>(opts.node_limit));
  if (const char* f = std::getenv("PVFAIR_HIGHS_OPTIONS")) highs.readOptions(f);

  SolveResult out;
  if (highs.passModel(std::move(lp)) == HighsStatus::kError) {
    out.message = "the solver rejected the model";
    return out;
  }
  if (opts.start && opts.start->size() == vars.size() && any_integer) {
    HighsSolution start;
    start.col_value = *opts.start;
    start.value_valid = true;
    highs.setSolution(start);
  }
  const HighsStatus run_status = highs.run();
  const HighsModelStatus ms = highs.getModelStatus();
  const HighsInfo& info = highs.getInfo();

  switch (ms) {
    case HighsModelStatus::kOptimal: out.status = SolveStatus::kOptimal; break;
    case HighsModelStatus::kInfeasible: out.status = SolveStatus::kInfeasible; break;
    case HighsModelStatus::kUnbounded:
    case HighsModelStatus::kUnboundedOrInfeasible: out.status = SolveStatus::kUnbounded; break;
    case HighsModelStatus::kTimeLimit:
    case HighsModelStatus::kIterationLimit:
    case HighsModelStatus::kSolutionLimit:
    case HighsModelStatus::kInterrupt: out.status = SolveStatus::kTimeLimit; break;
    default: out.status = SolveStatus::kError; break;
  }
  if (ms == HighsModelStatus::kUnboundedOrInfeasible) {
    // Presolve could not tell the two apart; a zero objective settles it.
    Highs probe;
    probe.setOptionValue("output_flag", false);
    probe.setOptionValue("threads", 1);
    HighsLp copy = highs.getLp();
    copy.col_cost_.assign(copy.col_cost_.size(), 0.0);
    probe.passModel(std::move(copy));
    probe.run();
    if (probe.getModelStatus() == HighsModelStatus::kInfeasible) {
      out.status = SolveStatus::kInfeasible;
    }
  }
  out.message = highs.modelStatusToString(ms);
  if (run_status == HighsStatus::kError && out.status == SolveStatus::kOptimal) {
    out.status = SolveStatus::kError;
  }

  out.has_solution = info.primal_solution_status == kSolutionStatusFeasible;
  if (out.has_solution) {
    out.x = highs.getSolution().col_value;
    out.objective = info.objective_function_value;
    out.mip_gap = any_integer ? info.mip_gap : 0.0;
    if (!std::isfinite(out.mip_gap)) out.mip_gap = 0.0;
  }
  return out;
}

}  // namespace pvfair::optmodel
