#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <stdexcept>
#include <string>
#include <vector>

#include "handover/dynamics.hpp"

namespace handover {

using Eigen::VectorXd;

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct InfeasibleTask : std::runtime_error {
  explicit InfeasibleTask(const std::string& what) : std::runtime_error(what) {}
};

struct HorizonConfig {
  int intervals = 40;  // N; the trajectory has N+1 knots
};

struct TaskSpec {
  QuadrotorState uav_start, uav_goal;
  UgvState ugv_start, ugv_goal;
};

// Componentwise box bounds for states, inputs, the rendezvous slack and the
// free time steps.
struct BoundsSet {
  Vec12 uav_state_lo, uav_state_hi;
  Vec4 ugv_state_lo, ugv_state_hi;
  Vec4 uav_input_lo, uav_input_hi;
  Vec2 ugv_input_lo, ugv_input_hi;
  double slack_max = 0.0025;  // m^2, cap on the proximity slack
  double dt_min = 0.01;       // s
  double dt_max = 0.5;        // s

  // Workspace box [0,4]x[0,4], UAV altitude [0.5,4], with a 0.5 m position
  // margin; tilt <= 0.6 rad, |v| <= 3 m/s, |omega| <= 4 rad/s, per-rotor
  // thrust in [0, 0.75 m g]; UGV |v| <= 1.5 m/s, force in [0, 10] N.
  static BoundsSet defaults(const QuadrotorParams& p);
};

struct CostWeights {
  double time_weight = 10.0;     // 1/s, on the total mission time
  double progress_weight = 1.0;  // on the remaining-handover sum
  double state_weight = 1.0;     // 1/m^2, on the squared UAV state norm
};

// Rendezvous-event configuration. The proximity constraint compares the UAV
// position against the UGV position lifted by hover_height; the gating is
// proportional to the event weight, so knots carrying no selection mass are
// unconstrained. deactivation_distance must exceed the workspace diameter
// and is used for sanity checks and warm-start construction.
struct HandoverConfig {
  double hover_height = 0.3;            // m above the UGV deck
  double deactivation_distance = 10.0;  // m
};

// Flat layout of the decision vector. Knot-major; for k < N each knot holds
// [uav_state(12) | ugv_state(4) | uav_input(4) | ugv_input(2) |
//  event_weight | progress | slack | dt] = 26 scalars, the final knot holds
// [uav_state(12) | ugv_state(4) | progress | dt] = 18 scalars.
class DecisionLayout {
 public:
  explicit DecisionLayout(int intervals);

  int intervals() const { return intervals_; }
  int size() const { return 26 * intervals_ + 18; }

  int uav_state(int k) const { return knot(k); }
  int ugv_state(int k) const { return knot(k) + 12; }
  int uav_input(int k) const { return interior(k) + 16; }
  int ugv_input(int k) const { return interior(k) + 20; }
  int event_weight(int k) const { return interior(k) + 22; }
  int progress(int k) const { return k == intervals_ ? knot(k) + 16 : knot(k) + 23; }
  int slack(int k) const { return interior(k) + 24; }
  int dt(int k) const { return k == intervals_ ? knot(k) + 17 : knot(k) + 25; }

 private:
  int knot(int k) const;
  int interior(int k) const;  // valid only for k < N
  int intervals_;
};

// Unpacked view of a decision vector.
struct Trajectory {
  Eigen::MatrixXd uav_states;  // 12 x (N+1)
  Eigen::MatrixXd ugv_states;  // 4 x (N+1)
  Eigen::MatrixXd uav_inputs;  // 4 x N
  Eigen::MatrixXd ugv_inputs;  // 2 x N
  VectorXd event_weight;       // N
  VectorXd progress;           // N+1
  VectorXd slack;              // N
  VectorXd dt;                 // N+1

  static Trajectory zero(int intervals);
};

VectorXd pack(const Trajectory& t, const DecisionLayout& layout);
Trajectory unpack(const VectorXd& z, const DecisionLayout& layout);

// Fixed sparsity pattern plus the value array recomputed per evaluation.
struct SparseJacobian {
  int num_rows = 0, num_cols = 0;
  std::vector<int> rows, cols;
  VectorXd values;

  void reserve_pattern(int nnz) {
    rows.reserve(nnz);
    cols.reserve(nnz);
  }
  int add_entry(int r, int c) {
    rows.push_back(r);
    cols.push_back(c);
    return static_cast<int>(rows.size()) - 1;
  }
  Eigen::SparseMatrix<double> to_sparse() const;
  // out += scale * J^T * w
  void transpose_multiply_add(const VectorXd& w, double scale, VectorXd& out) const;
};

struct CostBreakdown {
  double time_term = 0.0;
  double progress_term = 0.0;
  double state_term = 0.0;
  double total() const { return time_term + progress_term + state_term; }
};

// Named row ranges for per-family feasibility reporting.
struct ConstraintFamily {
  std::string name;
  bool is_equality = true;
  int begin = 0, end = 0;  // row range in the stacked residual vector
};

// Generic smooth NLP with box bounds, smooth equalities c(z) = 0 and
// inequalities g(z) <= 0, consumed by the augmented-Lagrangian solver.
class SmoothProblem {
 public:
  virtual ~SmoothProblem() = default;

  virtual int num_vars() const = 0;
  virtual int num_eq() const { return 0; }
  virtual int num_ineq() const { return 0; }
  virtual const VectorXd& lower() const = 0;
  virtual const VectorXd& upper() const = 0;

  virtual double objective(const VectorXd& z) const = 0;
  virtual void objective_gradient(const VectorXd& z, VectorXd& grad) const = 0;
  virtual void eq_residuals(const VectorXd& z, VectorXd& r) const;
  virtual void ineq_residuals(const VectorXd& z, VectorXd& r) const;

  // Jacobians share a fixed pattern; init_*_jacobian builds the pattern and
  // *_jacobian_values refreshes the value array for a new point.
  virtual void init_eq_jacobian(SparseJacobian& jac) const;
  virtual void init_ineq_jacobian(SparseJacobian& jac) const;
  virtual void eq_jacobian_values(const VectorXd& z, SparseJacobian& jac) const;
  virtual void ineq_jacobian_values(const VectorXd& z, SparseJacobian& jac) const;

  // Combined residual + Jacobian refresh for one point; the default calls
  // the split evaluators, subclasses can share intermediate work.
  virtual void eval_eq(const VectorXd& z, VectorXd& r, SparseJacobian& jac) const;
  virtual void eval_ineq(const VectorXd& z, VectorXd& r, SparseJacobian& jac) const;

  virtual std::vector<ConstraintFamily> families() const;
  virtual CostBreakdown cost_components(const VectorXd& z) const;
};

// The discrete-time rendezvous trajectory optimization problem.
//
// Equality rows, in order:
//   [0, 16N)        dynamics defects, 16 per interval (12 UAV + 4 UGV)
//   [16N, 16N+32)   boundary conditions on both endpoint states
//   then the event rows:
//     selector sum            sum_k eps_k = 1
//     progress start          kappa_0 = 1
//     progress recursion      kappa_{k+1} = kappa_k - eps_k   (N rows)
//     selector concentration  sum_k eps_k^2 = 1
// The concentration row together with the simplex rows forces a one-hot
// selector at feasible points. Inequality rows: N proximity rows then N
// velocity-matching rows, gated by the event weight:
//     |p_uav - lift(p_ugv)|^2 eps_k <= nu_k,  |dv|^2 eps_k <= nu_k
// so selection mass can only sit where the robots actually meet; at one-hot
// points this coincides with requiring proximity within nu at the selected
// knot and releasing every other knot.
class HandoverNlp final : public SmoothProblem {
 public:
  HandoverNlp(TaskSpec task, BoundsSet bounds, CostWeights weights, HandoverConfig handover,
              HorizonConfig horizon, QuadrotorParams quad, UgvParams ugv);

  int num_vars() const override { return layout_.size(); }
  int num_eq() const override;
  int num_ineq() const override;
  const VectorXd& lower() const override { return lower_; }
  const VectorXd& upper() const override { return upper_; }

  double objective(const VectorXd& z) const override;
  void objective_gradient(const VectorXd& z, VectorXd& grad) const override;
  void eq_residuals(const VectorXd& z, VectorXd& r) const override;
  void ineq_residuals(const VectorXd& z, VectorXd& r) const override;
  void init_eq_jacobian(SparseJacobian& jac) const override;
  void init_ineq_jacobian(SparseJacobian& jac) const override;
  void eq_jacobian_values(const VectorXd& z, SparseJacobian& jac) const override;
  void ineq_jacobian_values(const VectorXd& z, SparseJacobian& jac) const override;
  void eval_eq(const VectorXd& z, VectorXd& r, SparseJacobian& jac) const override;
  void eval_ineq(const VectorXd& z, VectorXd& r, SparseJacobian& jac) const override;

  std::vector<ConstraintFamily> families() const override;
  CostBreakdown cost_components(const VectorXd& z) const override;

  const DecisionLayout& layout() const { return layout_; }
  const TaskSpec& task() const { return task_; }
  const BoundsSet& bounds() const { return bounds_; }
  const CostWeights& weights() const { return weights_; }
  const HandoverConfig& handover() const { return handover_; }
  const QuadrotorParams& quad_params() const { return quad_; }
  const UgvParams& ugv_params() const { return ugv_; }

  // Dimension/sparsity summary for diagnostics.
  std::string describe() const;

 private:
  int defect_rows() const { return 16 * layout_.intervals(); }
  int boundary_rows() const { return 32; }
  int event_eq_rows() const { return layout_.intervals() + 3; }

  TaskSpec task_;
  BoundsSet bounds_;
  CostWeights weights_;
  HandoverConfig handover_;
  QuadrotorParams quad_;
  UgvParams ugv_;
  DecisionLayout layout_;
  VectorXd lower_, upper_;
};

// Convenience constructor that validates the task endpoints against the
// bounds; throws InfeasibleTask when an endpoint lies outside its box.
HandoverNlp build_problem(const TaskSpec& task, const BoundsSet& bounds,
                          const CostWeights& weights, const HandoverConfig& handover,
                          const HorizonConfig& horizon, const QuadrotorParams& quad,
                          const UgvParams& ugv);

}  // namespace handover
