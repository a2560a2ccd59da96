#include "handover/nlp.hpp"

#include <cmath>
#include <sstream>

namespace handover {

namespace {
constexpr double kInf = 1e20;
}

BoundsSet BoundsSet::defaults(const QuadrotorParams& p) {
  BoundsSet b;
  const double margin = 0.5;
  const double xy_lo = 0.0 - margin, xy_hi = 4.0 + margin;
  const double z_lo = 0.5 - margin, z_hi = 4.0 + margin;
  const double tilt = 0.6, vel = 3.0, omega = 4.0;
  const double yaw = M_PI;
  const double thrust_hi = 0.75 * p.mass * p.gravity;

  b.uav_state_lo << xy_lo, xy_lo, z_lo, -tilt, -tilt, -yaw, -vel, -vel, -vel, -omega, -omega,
      -omega;
  b.uav_state_hi << xy_hi, xy_hi, z_hi, tilt, tilt, yaw, vel, vel, vel, omega, omega, omega;
  b.ugv_state_lo << xy_lo, xy_lo, -1.5, -1.5;
  b.ugv_state_hi << xy_hi, xy_hi, 1.5, 1.5;
  b.uav_input_lo.setZero();
  b.uav_input_hi.setConstant(thrust_hi);
  b.ugv_input_lo << 0.0, -M_PI;
  b.ugv_input_hi << 10.0, M_PI;
  return b;
}

DecisionLayout::DecisionLayout(int intervals) : intervals_(intervals) {
  if (intervals < 2) throw DimensionMismatch("horizon needs at least 2 intervals");
}

int DecisionLayout::knot(int k) const {
  if (k < 0 || k > intervals_) throw DimensionMismatch("knot index out of range");
  return 26 * k;
}

int DecisionLayout::interior(int k) const {
  if (k < 0 || k >= intervals_) throw DimensionMismatch("interior knot index out of range");
  return 26 * k;
}

Trajectory Trajectory::zero(int n) {
  Trajectory t;
  t.uav_states = Eigen::MatrixXd::Zero(12, n + 1);
  t.ugv_states = Eigen::MatrixXd::Zero(4, n + 1);
  t.uav_inputs = Eigen::MatrixXd::Zero(4, n);
  t.ugv_inputs = Eigen::MatrixXd::Zero(2, n);
  t.event_weight = VectorXd::Zero(n);
  t.progress = VectorXd::Zero(n + 1);
  t.slack = VectorXd::Zero(n);
  t.dt = VectorXd::Zero(n + 1);
  return t;
}

VectorXd pack(const Trajectory& t, const DecisionLayout& layout) {
  const int n = layout.intervals();
  if (t.uav_states.rows() != 12 || t.uav_states.cols() != n + 1 || t.ugv_states.rows() != 4 ||
      t.ugv_states.cols() != n + 1 || t.uav_inputs.rows() != 4 || t.uav_inputs.cols() != n ||
      t.ugv_inputs.rows() != 2 || t.ugv_inputs.cols() != n || t.event_weight.size() != n ||
      t.progress.size() != n + 1 || t.slack.size() != n || t.dt.size() != n + 1) {
    throw DimensionMismatch("trajectory dimensions do not match the horizon");
  }
  VectorXd z(layout.size());
  for (int k = 0; k <= n; ++k) {
    z.segment<12>(layout.uav_state(k)) = t.uav_states.col(k);
    z.segment<4>(layout.ugv_state(k)) = t.ugv_states.col(k);
    z[layout.progress(k)] = t.progress[k];
    z[layout.dt(k)] = t.dt[k];
    if (k < n) {
      z.segment<4>(layout.uav_input(k)) = t.uav_inputs.col(k);
      z.segment<2>(layout.ugv_input(k)) = t.ugv_inputs.col(k);
      z[layout.event_weight(k)] = t.event_weight[k];
      z[layout.slack(k)] = t.slack[k];
    }
  }
  return z;
}

Trajectory unpack(const VectorXd& z, const DecisionLayout& layout) {
  const int n = layout.intervals();
  if (z.size() != layout.size()) throw DimensionMismatch("decision vector has wrong length");
  Trajectory t = Trajectory::zero(n);
  for (int k = 0; k <= n; ++k) {
    t.uav_states.col(k) = z.segment<12>(layout.uav_state(k));
    t.ugv_states.col(k) = z.segment<4>(layout.ugv_state(k));
    t.progress[k] = z[layout.progress(k)];
    t.dt[k] = z[layout.dt(k)];
    if (k < n) {
      t.uav_inputs.col(k) = z.segment<4>(layout.uav_input(k));
      t.ugv_inputs.col(k) = z.segment<2>(layout.ugv_input(k));
      t.event_weight[k] = z[layout.event_weight(k)];
      t.slack[k] = z[layout.slack(k)];
    }
  }
  return t;
}

Eigen::SparseMatrix<double> SparseJacobian::to_sparse() const {
  Eigen::SparseMatrix<double> m(num_rows, num_cols);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) trips.emplace_back(rows[i], cols[i], values[i]);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

void SparseJacobian::transpose_multiply_add(const VectorXd& w, double scale, VectorXd& out) const {
  const size_t nnz = rows.size();
  for (size_t i = 0; i < nnz; ++i) out[cols[i]] += scale * values[i] * w[rows[i]];
}

void SmoothProblem::eq_residuals(const VectorXd&, VectorXd& r) const { r.resize(0); }
void SmoothProblem::ineq_residuals(const VectorXd&, VectorXd& r) const { r.resize(0); }
void SmoothProblem::init_eq_jacobian(SparseJacobian& jac) const {
  jac = SparseJacobian{};
  jac.num_rows = num_eq();
  jac.num_cols = num_vars();
}
void SmoothProblem::init_ineq_jacobian(SparseJacobian& jac) const {
  jac = SparseJacobian{};
  jac.num_rows = num_ineq();
  jac.num_cols = num_vars();
}
void SmoothProblem::eq_jacobian_values(const VectorXd&, SparseJacobian&) const {}
void SmoothProblem::ineq_jacobian_values(const VectorXd&, SparseJacobian&) const {}

void SmoothProblem::eval_eq(const VectorXd& z, VectorXd& r, SparseJacobian& jac) const {
  eq_residuals(z, r);
  eq_jacobian_values(z, jac);
}

void SmoothProblem::eval_ineq(const VectorXd& z, VectorXd& r, SparseJacobian& jac) const {
  ineq_residuals(z, r);
  ineq_jacobian_values(z, jac);
}

std::vector<ConstraintFamily> SmoothProblem::families() const {
  std::vector<ConstraintFamily> f;
  if (num_eq() > 0) f.push_back({"equalities", true, 0, num_eq()});
  if (num_ineq() > 0) f.push_back({"inequalities", false, 0, num_ineq()});
  return f;
}

CostBreakdown SmoothProblem::cost_components(const VectorXd& z) const {
  CostBreakdown c;
  c.state_term = objective(z);
  return c;
}

HandoverNlp::HandoverNlp(TaskSpec task, BoundsSet bounds, CostWeights weights,
                         HandoverConfig handover, HorizonConfig horizon, QuadrotorParams quad,
                         UgvParams ugv)
    : task_(std::move(task)),
      bounds_(bounds),
      weights_(weights),
      handover_(handover),
      quad_(quad),
      ugv_(ugv),
      layout_(horizon.intervals) {
  const int n = layout_.intervals();
  lower_ = VectorXd::Constant(layout_.size(), -kInf);
  upper_ = VectorXd::Constant(layout_.size(), kInf);
  for (int k = 0; k <= n; ++k) {
    lower_.segment<12>(layout_.uav_state(k)) = bounds_.uav_state_lo;
    upper_.segment<12>(layout_.uav_state(k)) = bounds_.uav_state_hi;
    lower_.segment<4>(layout_.ugv_state(k)) = bounds_.ugv_state_lo;
    upper_.segment<4>(layout_.ugv_state(k)) = bounds_.ugv_state_hi;
    lower_[layout_.dt(k)] = bounds_.dt_min;
    upper_[layout_.dt(k)] = bounds_.dt_max;
    // progress stays unbounded; the recursion and selector rows pin it
    if (k < n) {
      lower_.segment<4>(layout_.uav_input(k)) = bounds_.uav_input_lo;
      upper_.segment<4>(layout_.uav_input(k)) = bounds_.uav_input_hi;
      lower_.segment<2>(layout_.ugv_input(k)) = bounds_.ugv_input_lo;
      upper_.segment<2>(layout_.ugv_input(k)) = bounds_.ugv_input_hi;
      lower_[layout_.event_weight(k)] = 0.0;
      upper_[layout_.event_weight(k)] = 1.0;
      lower_[layout_.slack(k)] = 0.0;
      upper_[layout_.slack(k)] = bounds_.slack_max;
    }
  }
}

int HandoverNlp::num_eq() const { return defect_rows() + boundary_rows() + event_eq_rows(); }
int HandoverNlp::num_ineq() const { return 2 * layout_.intervals(); }

double HandoverNlp::objective(const VectorXd& z) const {
  const CostBreakdown c = cost_components(z);
  return c.total();
}

CostBreakdown HandoverNlp::cost_components(const VectorXd& z) const {
  const int n = layout_.intervals();
  CostBreakdown c;
  for (int k = 0; k <= n; ++k) {
    c.time_term += z[layout_.dt(k)];
    c.progress_term += z[layout_.progress(k)];
    c.state_term += z.segment<12>(layout_.uav_state(k)).squaredNorm();
  }
  c.time_term *= weights_.time_weight;
  c.progress_term *= weights_.progress_weight;
  c.state_term *= weights_.state_weight;
  return c;
}

void HandoverNlp::objective_gradient(const VectorXd& z, VectorXd& grad) const {
  const int n = layout_.intervals();
  grad.setZero(layout_.size());
  for (int k = 0; k <= n; ++k) {
    grad[layout_.dt(k)] = weights_.time_weight;
    grad[layout_.progress(k)] = weights_.progress_weight;
    grad.segment<12>(layout_.uav_state(k)) =
        2.0 * weights_.state_weight * z.segment<12>(layout_.uav_state(k));
  }
}

namespace {

// Emits either the fixed pattern (init pass) or the value array; both passes
// share the exact same emission order.
struct JacobianSink {
  SparseJacobian* jac = nullptr;
  bool init = false;
  int cursor = 0;
  std::vector<double> init_values;

  void emit(int r, int c, double v) {
    if (!jac) return;
    if (init) {
      jac->add_entry(r, c);
      init_values.push_back(v);
    } else {
      jac->values[cursor++] = v;
    }
  }
  void finish(int rows, int cols) {
    if (!jac) return;
    if (init) {
      jac->num_rows = rows;
      jac->num_cols = cols;
      jac->values = Eigen::Map<const VectorXd>(init_values.data(),
                                               static_cast<Eigen::Index>(init_values.size()));
    }
  }
};

}  // namespace

void HandoverNlp::eq_residuals(const VectorXd& z, VectorXd& r) const {
  const int n = layout_.intervals();
  r.resize(num_eq());

  for (int k = 0; k < n; ++k) {
    const double dt = z[layout_.dt(k)];
    const Vec12 xq = z.segment<12>(layout_.uav_state(k));
    const Vec4 uq = z.segment<4>(layout_.uav_input(k));
    r.segment<12>(16 * k) = z.segment<12>(layout_.uav_state(k + 1)) -
                            rk2_step_quad(xq, uq, dt, quad_);
    const Vec4 xg = z.segment<4>(layout_.ugv_state(k));
    const Vec2 ug = z.segment<2>(layout_.ugv_input(k));
    r.segment<4>(16 * k + 12) = z.segment<4>(layout_.ugv_state(k + 1)) -
                                rk2_step_ugv(xg, ug, dt, ugv_);
  }

  int row = defect_rows();
  r.segment<12>(row) = z.segment<12>(layout_.uav_state(0)) - task_.uav_start.to_vector();
  r.segment<4>(row + 12) = z.segment<4>(layout_.ugv_state(0)) - task_.ugv_start.to_vector();
  r.segment<12>(row + 16) = z.segment<12>(layout_.uav_state(n)) - task_.uav_goal.to_vector();
  r.segment<4>(row + 28) = z.segment<4>(layout_.ugv_state(n)) - task_.ugv_goal.to_vector();

  row += boundary_rows();
  double sum = 0.0, sum_sq = 0.0;
  for (int k = 0; k < n; ++k) {
    const double e = z[layout_.event_weight(k)];
    sum += e;
    sum_sq += e * e;
  }
  r[row] = sum - 1.0;
  r[row + 1] = z[layout_.progress(0)] - 1.0;
  for (int k = 0; k < n; ++k) {
    r[row + 2 + k] =
        z[layout_.progress(k + 1)] - z[layout_.progress(k)] + z[layout_.event_weight(k)];
  }
  r[row + 2 + n] = sum_sq - 1.0;
}

void HandoverNlp::ineq_residuals(const VectorXd& z, VectorXd& r) const {
  const int n = layout_.intervals();
  r.resize(num_ineq());
  for (int k = 0; k < n; ++k) {
    const double eps = z[layout_.event_weight(k)];
    const double nu = z[layout_.slack(k)];

    const Vec3 p_uav = z.segment<3>(layout_.uav_state(k));
    const Vec2 p_ugv = z.segment<2>(layout_.ugv_state(k));
    const Vec3 lifted(p_ugv[0], p_ugv[1], handover_.hover_height);
    r[k] = (p_uav - lifted).squaredNorm() * eps - nu;

    const Vec2 v_uav = z.segment<2>(layout_.uav_state(k) + 6);
    const Vec2 v_ugv = z.segment<2>(layout_.ugv_state(k) + 2);
    r[n + k] = (v_uav - v_ugv).squaredNorm() * eps - nu;
  }
}

void HandoverNlp::init_eq_jacobian(SparseJacobian& jac) const {
  jac = SparseJacobian{};
  JacobianSink sink{&jac, true, 0, {}};
  const int n = layout_.intervals();

  // A defect block touches x_k, u_k, dt_k and x_{k+1}; entries are dense
  // within the block, so the pattern is emitted with placeholder values.
  sink.init_values.reserve(static_cast<size_t>(n) * 420 + 200);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < 12; ++i) {
      const int row = 16 * k + i;
      for (int j = 0; j < 12; ++j) sink.emit(row, layout_.uav_state(k) + j, 0.0);
      for (int j = 0; j < 4; ++j) sink.emit(row, layout_.uav_input(k) + j, 0.0);
      sink.emit(row, layout_.dt(k), 0.0);
      sink.emit(row, layout_.uav_state(k + 1) + i, 1.0);
    }
    for (int i = 0; i < 4; ++i) {
      const int row = 16 * k + 12 + i;
      for (int j = 0; j < 4; ++j) sink.emit(row, layout_.ugv_state(k) + j, 0.0);
      for (int j = 0; j < 2; ++j) sink.emit(row, layout_.ugv_input(k) + j, 0.0);
      sink.emit(row, layout_.dt(k), 0.0);
      sink.emit(row, layout_.ugv_state(k + 1) + i, 1.0);
    }
  }
  // Boundary
  int row = defect_rows();
  for (int i = 0; i < 12; ++i) sink.emit(row + i, layout_.uav_state(0) + i, 1.0);
  for (int i = 0; i < 4; ++i) sink.emit(row + 12 + i, layout_.ugv_state(0) + i, 1.0);
  for (int i = 0; i < 12; ++i) sink.emit(row + 16 + i, layout_.uav_state(n) + i, 1.0);
  for (int i = 0; i < 4; ++i) sink.emit(row + 28 + i, layout_.ugv_state(n) + i, 1.0);
  // Event rows
  row += boundary_rows();
  for (int k = 0; k < n; ++k) sink.emit(row, layout_.event_weight(k), 1.0);
  sink.emit(row + 1, layout_.progress(0), 1.0);
  for (int k = 0; k < n; ++k) {
    sink.emit(row + 2 + k, layout_.progress(k + 1), 1.0);
    sink.emit(row + 2 + k, layout_.progress(k), -1.0);
    sink.emit(row + 2 + k, layout_.event_weight(k), 1.0);
  }
  for (int k = 0; k < n; ++k) sink.emit(row + 2 + n, layout_.event_weight(k), 0.0);

  sink.finish(num_eq(), num_vars());
}

void HandoverNlp::eval_eq(const VectorXd& z, VectorXd& r, SparseJacobian& jac) const {
  const int n = layout_.intervals();
  r.resize(num_eq());
  JacobianSink sink{&jac, false, 0, {}};

  Vec12 xq_next;
  Mat12 dq_state;
  Mat12x4 dq_input;
  Vec12 dq_dt;
  Vec4 xg_next;
  Mat4 dg_state;
  Mat4x2 dg_input;
  Vec4 dg_dt;

  for (int k = 0; k < n; ++k) {
    const double dt = z[layout_.dt(k)];
    const Vec12 xq = z.segment<12>(layout_.uav_state(k));
    const Vec4 uq = z.segment<4>(layout_.uav_input(k));
    rk2_step_quad_jacobians(xq, uq, dt, quad_, xq_next, dq_state, dq_input, dq_dt);
    r.segment<12>(16 * k) = z.segment<12>(layout_.uav_state(k + 1)) - xq_next;
    for (int i = 0; i < 12; ++i) {
      const int row = 16 * k + i;
      for (int j = 0; j < 12; ++j) sink.emit(row, 0, -dq_state(i, j));
      for (int j = 0; j < 4; ++j) sink.emit(row, 0, -dq_input(i, j));
      sink.emit(row, 0, -dq_dt[i]);
      sink.emit(row, 0, 1.0);
    }
    const Vec4 xg = z.segment<4>(layout_.ugv_state(k));
    const Vec2 ug = z.segment<2>(layout_.ugv_input(k));
    rk2_step_ugv_jacobians(xg, ug, dt, ugv_, xg_next, dg_state, dg_input, dg_dt);
    r.segment<4>(16 * k + 12) = z.segment<4>(layout_.ugv_state(k + 1)) - xg_next;
    for (int i = 0; i < 4; ++i) {
      const int row = 16 * k + 12 + i;
      for (int j = 0; j < 4; ++j) sink.emit(row, 0, -dg_state(i, j));
      for (int j = 0; j < 2; ++j) sink.emit(row, 0, -dg_input(i, j));
      sink.emit(row, 0, -dg_dt[i]);
      sink.emit(row, 0, 1.0);
    }
  }

  int row = defect_rows();
  r.segment<12>(row) = z.segment<12>(layout_.uav_state(0)) - task_.uav_start.to_vector();
  r.segment<4>(row + 12) = z.segment<4>(layout_.ugv_state(0)) - task_.ugv_start.to_vector();
  r.segment<12>(row + 16) = z.segment<12>(layout_.uav_state(n)) - task_.uav_goal.to_vector();
  r.segment<4>(row + 28) = z.segment<4>(layout_.ugv_state(n)) - task_.ugv_goal.to_vector();
  for (int i = 0; i < 32; ++i) sink.emit(0, 0, 1.0);

  row += boundary_rows();
  double sum = 0.0, sum_sq = 0.0;
  for (int k = 0; k < n; ++k) {
    const double e = z[layout_.event_weight(k)];
    sum += e;
    sum_sq += e * e;
    sink.emit(0, 0, 1.0);
  }
  r[row] = sum - 1.0;
  r[row + 1] = z[layout_.progress(0)] - 1.0;
  sink.emit(0, 0, 1.0);
  for (int k = 0; k < n; ++k) {
    r[row + 2 + k] =
        z[layout_.progress(k + 1)] - z[layout_.progress(k)] + z[layout_.event_weight(k)];
    sink.emit(0, 0, 1.0);
    sink.emit(0, 0, -1.0);
    sink.emit(0, 0, 1.0);
  }
  r[row + 2 + n] = sum_sq - 1.0;
  for (int k = 0; k < n; ++k) sink.emit(0, 0, 2.0 * z[layout_.event_weight(k)]);
}

void HandoverNlp::eq_jacobian_values(const VectorXd& z, SparseJacobian& jac) const {
  VectorXd scratch;
  eval_eq(z, scratch, jac);
}

void HandoverNlp::init_ineq_jacobian(SparseJacobian& jac) const {
  jac = SparseJacobian{};
  JacobianSink sink{&jac, true, 0, {}};
  const int n = layout_.intervals();
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < 3; ++j) sink.emit(k, layout_.uav_state(k) + j, 0.0);
    for (int j = 0; j < 2; ++j) sink.emit(k, layout_.ugv_state(k) + j, 0.0);
    sink.emit(k, layout_.slack(k), 0.0);
    sink.emit(k, layout_.event_weight(k), 0.0);
  }
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < 2; ++j) sink.emit(n + k, layout_.uav_state(k) + 6 + j, 0.0);
    for (int j = 0; j < 2; ++j) sink.emit(n + k, layout_.ugv_state(k) + 2 + j, 0.0);
    sink.emit(n + k, layout_.slack(k), 0.0);
    sink.emit(n + k, layout_.event_weight(k), 0.0);
  }
  sink.finish(num_ineq(), num_vars());
}

void HandoverNlp::eval_ineq(const VectorXd& z, VectorXd& r, SparseJacobian& jac) const {
  const int n = layout_.intervals();
  r.resize(num_ineq());
  JacobianSink sink{&jac, false, 0, {}};
  for (int k = 0; k < n; ++k) {
    const double eps = z[layout_.event_weight(k)];
    const Vec3 p_uav = z.segment<3>(layout_.uav_state(k));
    const Vec2 p_ugv = z.segment<2>(layout_.ugv_state(k));
    const Vec3 lifted(p_ugv[0], p_ugv[1], handover_.hover_height);
    const Vec3 d = p_uav - lifted;
    r[k] = d.squaredNorm() * eps - z[layout_.slack(k)];
    for (int j = 0; j < 3; ++j) sink.emit(0, 0, 2.0 * d[j] * eps);
    for (int j = 0; j < 2; ++j) sink.emit(0, 0, -2.0 * d[j] * eps);
    sink.emit(0, 0, -1.0);
    sink.emit(0, 0, d.squaredNorm());
  }
  for (int k = 0; k < n; ++k) {
    const double eps = z[layout_.event_weight(k)];
    const Vec2 dv = z.segment<2>(layout_.uav_state(k) + 6) - z.segment<2>(layout_.ugv_state(k) + 2);
    r[n + k] = dv.squaredNorm() * eps - z[layout_.slack(k)];
    for (int j = 0; j < 2; ++j) sink.emit(0, 0, 2.0 * dv[j] * eps);
    for (int j = 0; j < 2; ++j) sink.emit(0, 0, -2.0 * dv[j] * eps);
    sink.emit(0, 0, -1.0);
    sink.emit(0, 0, dv.squaredNorm());
  }
}

void HandoverNlp::ineq_jacobian_values(const VectorXd& z, SparseJacobian& jac) const {
  VectorXd scratch;
  eval_ineq(z, scratch, jac);
}

std::vector<ConstraintFamily> HandoverNlp::families() const {
  const int n = layout_.intervals();
  std::vector<ConstraintFamily> f;
  f.push_back({"defects", true, 0, defect_rows()});
  f.push_back({"boundary", true, defect_rows(), defect_rows() + boundary_rows()});
  f.push_back({"handover_eq", true, defect_rows() + boundary_rows(), num_eq()});
  f.push_back({"handover_ineq", false, 0, 2 * n});
  return f;
}

std::string HandoverNlp::describe() const {
  const int n = layout_.intervals();
  SparseJacobian eq_jac, ineq_jac;
  init_eq_jacobian(eq_jac);
  init_ineq_jacobian(ineq_jac);
  std::ostringstream out;
  out << "variables: " << num_vars() << "\n"
      << "equalities: " << num_eq() << " (defects " << defect_rows() << ", boundary "
      << boundary_rows() << ", handover " << event_eq_rows() << ")\n"
      << "inequalities: " << num_ineq() << "\n"
      << "eq jacobian nnz: " << eq_jac.rows.size() << "\n"
      << "ineq jacobian nnz: " << ineq_jac.rows.size() << "\n"
      << "intervals: " << n << "\n";
  return out.str();
}

HandoverNlp build_problem(const TaskSpec& task, const BoundsSet& bounds,
                          const CostWeights& weights, const HandoverConfig& handover,
                          const HorizonConfig& horizon, const QuadrotorParams& quad,
                          const UgvParams& ugv) {
  auto check = [](const VectorXd& x, const VectorXd& lo, const VectorXd& hi,
                  const std::string& name) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] < lo[i] || x[i] > hi[i]) {
        throw InfeasibleTask(name + " component " + std::to_string(i) + " = " +
                             std::to_string(x[i]) + " violates its bound");
      }
    }
  };
  check(task.uav_start.to_vector(), bounds.uav_state_lo, bounds.uav_state_hi, "uav_start");
  check(task.uav_goal.to_vector(), bounds.uav_state_lo, bounds.uav_state_hi, "uav_goal");
  check(task.ugv_start.to_vector(), bounds.ugv_state_lo, bounds.ugv_state_hi, "ugv_start");
  check(task.ugv_goal.to_vector(), bounds.ugv_state_lo, bounds.ugv_state_hi, "ugv_goal");
  return HandoverNlp(task, bounds, weights, handover, horizon, quad, ugv);
}

}  // namespace handover
