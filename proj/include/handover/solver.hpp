#pragma once

#include <limits>
#include <string>
#include <vector>

#include "handover/nlp.hpp"

namespace handover {

enum class SolveStatus { Converged, MaxIterations, TimeBudgetExceeded, NumericalFailure };

std::string to_string(SolveStatus s);

struct SolverOptions {
  int max_outer = 50;
  int max_inner = 200;            // quasi-Newton iterations per outer round
  double constraint_tol = 1e-6;
  double optimality_tol = 1e-6;   // on the projected gradient
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  int memory = 20;                // L-BFGS pair count
  double time_budget_s = 60.0;
  // Below this initial violation the starting multipliers are estimated by
  // least squares, so re-solving from a solution costs almost nothing.
  double multiplier_estimation_threshold = 1e-3;
  bool record_trace = false;
};

struct OuterTrace {
  int outer = 0;
  int inner_iterations = 0;
  double objective = 0.0;
  double violation = 0.0;
  double penalty = 0.0;
  bool accepted = false;
};

struct SolveReport {
  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;  // cumulative accepted inner quasi-Newton iterations
  double wall_time_s = 0.0;
  double objective = std::numeric_limits<double>::quiet_NaN();
  CostBreakdown cost;
  double max_violation = std::numeric_limits<double>::infinity();
  VectorXd solution;
  std::vector<OuterTrace> trace;  // filled when options.record_trace
};

// Augmented-Lagrangian solve with a bound-projected L-BFGS inner loop.
// Deterministic for fixed inputs except the wall_time_s field (and the
// status in the rare case a run straddles the time budget).
SolveReport solve(const SmoothProblem& problem, const VectorXd& initial_guess,
                  const SolverOptions& options);

struct FeasibilityReport {
  struct Family {
    std::string name;
    double max_violation = 0.0;
  };
  std::vector<Family> families;
  double bounds_violation = 0.0;
  // Telescoped progress identity residual (handover problems only):
  // kappa_N - kappa_0 + sum(eps) - sum(recursion residuals) == 0.
  double progress_identity_error = 0.0;

  double max_violation() const;
  bool feasible(double tol) const;
};

// Max violation per constraint family plus the box-bound violation.
FeasibilityReport feasibility_check(const SmoothProblem& problem, const VectorXd& z,
                                    double tol = 1e-6);

// One row per outer round: outer, inner_iterations, objective, violation,
// penalty, accepted.
std::string trace_to_csv(const std::vector<OuterTrace>& trace);

}  // namespace handover
