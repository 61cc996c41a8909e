#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pvfair/optmodel/linear_model.hpp"

namespace pvfair::optmodel {

enum class SolveStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kTimeLimit,  ///< stopped early; `x` holds the incumbent if one exists
  kError,
};

const char* to_string(SolveStatus s);

struct SolveOptions {
  double mip_gap = 1e-4;     ///< relative gap at which branch-and-bound stops
  double time_limit = 1e30;  ///< seconds
  int node_limit = 0;        ///< 0: unlimited
  bool verbose = false;
  double feasibility_tolerance = 1e-9;
  /// Optional starting point for branch-and-bound (full primal vector).
  std::optional<std::vector<double>> start;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kError;
  std::vector<double> x;
  double objective = 0.0;
  double mip_gap = 0.0;
  bool has_solution = false;
  std::string message;
};

/// Solves `model` in-process with the HiGHS library.
SolveResult solve(const LinearModel& model, const SolveOptions& opts = {});

}  // namespace pvfair::optmodel
