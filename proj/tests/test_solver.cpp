#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "handover/config.hpp"
#include "handover/dataset.hpp"
#include "handover/solver.hpp"

using namespace handover;

namespace {

class BoundQuadratic final : public SmoothProblem {
 public:
  BoundQuadratic() {
    lo_ = VectorXd::Constant(1, -1e20);
    hi_ = VectorXd::Constant(1, 1.0);
  }
  int num_vars() const override { return 1; }
  const VectorXd& lower() const override { return lo_; }
  const VectorXd& upper() const override { return hi_; }
  double objective(const VectorXd& z) const override { return (z[0] - 2.0) * (z[0] - 2.0); }
  void objective_gradient(const VectorXd& z, VectorXd& g) const override {
    g.resize(1);
    g[0] = 2.0 * (z[0] - 2.0);
  }

 private:
  VectorXd lo_, hi_;
};

class Rosenbrock final : public SmoothProblem {
 public:
  Rosenbrock() {
    lo_ = VectorXd::Constant(2, -1e20);
    hi_ = VectorXd::Constant(2, 1e20);
  }
  int num_vars() const override { return 2; }
  const VectorXd& lower() const override { return lo_; }
  const VectorXd& upper() const override { return hi_; }
  double objective(const VectorXd& z) const override {
    const double a = 1.0 - z[0];
    const double b = z[1] - z[0] * z[0];
    return a * a + 100.0 * b * b;
  }
  void objective_gradient(const VectorXd& z, VectorXd& g) const override {
    g.resize(2);
    const double b = z[1] - z[0] * z[0];
    g[0] = -2.0 * (1.0 - z[0]) - 400.0 * z[0] * b;
    g[1] = 200.0 * b;
  }

 private:
  VectorXd lo_, hi_;
};

// min |x|^2 subject to x1 + x2 = 1
class EqualityQp final : public SmoothProblem {
 public:
  EqualityQp() {
    lo_ = VectorXd::Constant(2, -1e20);
    hi_ = VectorXd::Constant(2, 1e20);
  }
  int num_vars() const override { return 2; }
  int num_eq() const override { return 1; }
  const VectorXd& lower() const override { return lo_; }
  const VectorXd& upper() const override { return hi_; }
  double objective(const VectorXd& z) const override { return z.squaredNorm(); }
  void objective_gradient(const VectorXd& z, VectorXd& g) const override { g = 2.0 * z; }
  void eq_residuals(const VectorXd& z, VectorXd& r) const override {
    r.resize(1);
    r[0] = z[0] + z[1] - 1.0;
  }
  void init_eq_jacobian(SparseJacobian& jac) const override {
    jac = SparseJacobian{};
    jac.num_rows = 1;
    jac.num_cols = 2;
    jac.add_entry(0, 0);
    jac.add_entry(0, 1);
    jac.values = VectorXd::Ones(2);
  }
  void eq_jacobian_values(const VectorXd&, SparseJacobian& jac) const override {
    jac.values[0] = 1.0;
    jac.values[1] = 1.0;
  }

 private:
  VectorXd lo_, hi_;
};

// min (x+1)^2 subject to x >= 0 expressed as the inequality -x <= 0
class InequalityQp final : public SmoothProblem {
 public:
  InequalityQp() {
    lo_ = VectorXd::Constant(1, -1e20);
    hi_ = VectorXd::Constant(1, 1e20);
  }
  int num_vars() const override { return 1; }
  int num_ineq() const override { return 1; }
  const VectorXd& lower() const override { return lo_; }
  const VectorXd& upper() const override { return hi_; }
  double objective(const VectorXd& z) const override { return (z[0] + 1.0) * (z[0] + 1.0); }
  void objective_gradient(const VectorXd& z, VectorXd& g) const override {
    g.resize(1);
    g[0] = 2.0 * (z[0] + 1.0);
  }
  void ineq_residuals(const VectorXd& z, VectorXd& r) const override {
    r.resize(1);
    r[0] = -z[0];
  }
  void init_ineq_jacobian(SparseJacobian& jac) const override {
    jac = SparseJacobian{};
    jac.num_rows = 1;
    jac.num_cols = 1;
    jac.add_entry(0, 0);
    jac.values = VectorXd::Constant(1, -1.0);
  }
  void ineq_jacobian_values(const VectorXd&, SparseJacobian& jac) const override {
    jac.values[0] = -1.0;
  }

 private:
  VectorXd lo_, hi_;
};

TaskSpec nearby_task() {
  TaskSpec t;
  t.uav_start.position = Vec3(1.0, 1.0, 1.0);
  t.uav_goal.position = Vec3(2.0, 1.6, 1.2);
  t.ugv_start.position = Vec2(1.5, 0.8);
  t.ugv_goal.position = Vec2(1.2, 1.8);
  return t;
}

}  // namespace

TEST_CASE("bound-constrained quadratic finds the active bound") {
  BoundQuadratic p;
  SolveReport rep = solve(p, VectorXd::Zero(1), SolverOptions{});
  CHECK(rep.status == SolveStatus::Converged);
  CHECK(rep.solution[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("rosenbrock from the classic start") {
  Rosenbrock p;
  VectorXd guess(2);
  guess << -1.2, 1.0;
  SolverOptions opts;
  opts.max_inner = 500;
  SolveReport rep = solve(p, guess, opts);
  CHECK(rep.status == SolveStatus::Converged);
  CHECK(std::abs(rep.solution[0] - 1.0) < 1e-5);
  CHECK(std::abs(rep.solution[1] - 1.0) < 1e-5);
}

TEST_CASE("equality-constrained qp reaches the kkt point") {
  EqualityQp p;
  SolverOptions opts;
  opts.constraint_tol = 1e-9;
  opts.optimality_tol = 1e-9;
  SolveReport rep = solve(p, VectorXd::Zero(2), opts);
  CHECK(rep.status == SolveStatus::Converged);
  CHECK(std::abs(rep.solution[0] - 0.5) < 1e-7);
  CHECK(std::abs(rep.solution[1] - 0.5) < 1e-7);
}

TEST_CASE("inequality constraint becomes active") {
  InequalityQp p;
  SolverOptions opts;
  opts.constraint_tol = 1e-8;
  VectorXd guess(1);
  guess << 2.0;
  SolveReport rep = solve(p, guess, opts);
  CHECK(rep.status == SolveStatus::Converged);
  CHECK(std::abs(rep.solution[0]) < 1e-6);
}

TEST_CASE("solver is deterministic") {
  Rosenbrock p;
  VectorXd guess(2);
  guess << -1.2, 1.0;
  SolverOptions opts;
  opts.max_inner = 500;
  const SolveReport a = solve(p, guess, opts);
  const SolveReport b = solve(p, guess, opts);
  CHECK(a.iterations == b.iterations);
  CHECK(a.objective == b.objective);
  CHECK((a.solution - b.solution).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("full handover problem: cold solve, trace invariants, warm restart") {
  RunConfig config;
  config.horizon.intervals = 20;
  const BoundsSet bounds = config.bounds();
  const TaskSpec task = nearby_task();
  const HandoverNlp problem = build_problem(task, bounds, config.weights, config.handover,
                                            config.horizon, config.quad, config.ugv);
  const VectorXd guess = cold_start_guess(task, config.horizon, bounds, config.quad);

  // the naive guess is infeasible in the defect family
  const FeasibilityReport guess_rep = feasibility_check(problem, guess);
  REQUIRE(guess_rep.families.size() == 4);
  CHECK(guess_rep.families[0].name == "defects");
  CHECK(guess_rep.families[0].max_violation > 0.0);

  SolverOptions opts = config.solver;
  opts.record_trace = true;
  const SolveReport cold = solve(problem, guess, opts);
  REQUIRE(cold.status == SolveStatus::Converged);
  CHECK(cold.max_violation <= opts.constraint_tol);

  // converged solutions pass the family checker
  const FeasibilityReport rep = feasibility_check(problem, cold.solution);
  CHECK(rep.feasible(1e-6));
  CHECK(rep.progress_identity_error < 1e-12);

  // violation is non-increasing across accepted outer rounds
  double last = std::numeric_limits<double>::infinity();
  int total_inner = 0;
  for (const auto& row : cold.trace) {
    if (row.accepted) {
      CHECK(row.violation <= last);
      last = row.violation;
    }
    total_inner += row.inner_iterations;
  }
  CHECK(total_inner == cold.iterations);

  // restarting from the solution costs at most 10% of the cold iterations
  const SolveReport warm = solve(problem, cold.solution, opts);
  REQUIRE(warm.status == SolveStatus::Converged);
  CHECK(warm.iterations <= cold.iterations / 10);
}

TEST_CASE("feasibility check on a hand-built feasible point") {
  RunConfig config;
  config.horizon.intervals = 8;
  const int n = 8;
  // hover exactly on the lifted deck point: every family is exactly zero
  TaskSpec task;
  task.uav_start.position = Vec3(1.5, 1.5, config.handover.hover_height);
  task.uav_goal = task.uav_start;
  task.ugv_start.position = Vec2(1.5, 1.5);
  task.ugv_goal = task.ugv_start;

  const BoundsSet bounds = config.bounds();
  const HandoverNlp problem = build_problem(task, bounds, config.weights, config.handover,
                                            config.horizon, config.quad, config.ugv);

  Trajectory t = Trajectory::zero(n);
  const Vec4 hover = Vec4::Constant(config.quad.mass * config.quad.gravity / 4.0);
  for (int k = 0; k <= n; ++k) {
    t.uav_states.col(k) = task.uav_start.to_vector();
    t.ugv_states.col(k) = task.ugv_start.to_vector();
    t.dt[k] = 0.1;
    t.progress[k] = k == 0 ? 1.0 : 0.0;
    if (k < n) {
      t.uav_inputs.col(k) = hover;
      t.event_weight[k] = k == 0 ? 1.0 : 0.0;
    }
  }
  const FeasibilityReport rep = feasibility_check(problem, pack(t, problem.layout()));
  for (const auto& fam : rep.families) CHECK(fam.max_violation == 0.0);
  CHECK(rep.bounds_violation == 0.0);
}

TEST_CASE("numerical failure surfaces as a status") {
  class Nasty final : public SmoothProblem {
   public:
    Nasty() {
      lo_ = VectorXd::Constant(1, -1e20);
      hi_ = VectorXd::Constant(1, 1e20);
    }
    int num_vars() const override { return 1; }
    const VectorXd& lower() const override { return lo_; }
    const VectorXd& upper() const override { return hi_; }
    double objective(const VectorXd&) const override {
      return std::numeric_limits<double>::quiet_NaN();
    }
    void objective_gradient(const VectorXd&, VectorXd& g) const override {
      g.resize(1);
      g[0] = 0.0;
    }

   private:
    VectorXd lo_, hi_;
  };
  Nasty p;
  const SolveReport rep = solve(p, VectorXd::Zero(1), SolverOptions{});
  CHECK(rep.status == SolveStatus::NumericalFailure);
}

TEST_CASE("trace csv export") {
  std::vector<OuterTrace> trace = {{1, 10, 3.5, 0.25, 10.0, true}};
  const std::string csv = trace_to_csv(trace);
  CHECK(csv.find("outer,inner_iterations,objective,violation,penalty,accepted") !=
        std::string::npos);
  CHECK(csv.find("1,10,3.5,0.25,10,1") != std::string::npos);
}
