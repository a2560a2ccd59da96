#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "handover/nlp.hpp"
#include "test_util.hpp"

using namespace handover;
using testutil::rel_err;
using testutil::uniform;

namespace {

TaskSpec simple_task() {
  TaskSpec t;
  t.uav_start.position = Vec3(0.5, 0.8, 1.2);
  t.uav_goal.position = Vec3(3.2, 2.9, 1.6);
  t.ugv_start.position = Vec2(2.8, 0.4);
  t.ugv_goal.position = Vec2(1.0, 3.3);
  return t;
}

HandoverNlp make_problem(int intervals) {
  QuadrotorParams quad;
  UgvParams ugv;
  return build_problem(simple_task(), BoundsSet::defaults(quad), CostWeights{}, HandoverConfig{},
                       HorizonConfig{intervals}, quad, ugv);
}

// Uniform sample strictly inside the box bounds; keeps attitudes and rates
// in a range where the midpoint integrator stays far from the pitch
// singularity.
VectorXd random_decision(std::mt19937_64& rng, const HandoverNlp& p) {
  const VectorXd& lo = p.lower();
  const VectorXd& hi = p.upper();
  VectorXd z(p.num_vars());
  for (int i = 0; i < p.num_vars(); ++i) {
    const double a = std::max(lo[i], -2.0);
    const double b = std::min(hi[i], 2.0);
    z[i] = uniform(rng, a, b);
  }
  const auto& layout = p.layout();
  for (int k = 0; k <= layout.intervals(); ++k) {
    z[layout.dt(k)] = uniform(rng, 0.02, 0.2);
    z[layout.progress(k)] = uniform(rng, 0.0, 1.0);
  }
  return z;
}

}  // namespace

TEST_CASE("decision vector length") {
  CHECK(DecisionLayout(40).size() == 1058);
  CHECK(DecisionLayout(2).size() == 70);
  CHECK_THROWS_AS(DecisionLayout(1), DimensionMismatch);
}

TEST_CASE("pack/unpack is a bijection") {
  std::mt19937_64 rng(5);
  const DecisionLayout layout(7);
  VectorXd z(layout.size());
  for (int i = 0; i < z.size(); ++i) z[i] = uniform(rng, -3, 3);
  const Trajectory t = unpack(z, layout);
  const VectorXd back = pack(t, layout);
  CHECK((back - z).cwiseAbs().maxCoeff() == 0.0);

  Trajectory bad = t;
  bad.dt = VectorXd::Zero(3);
  CHECK_THROWS_AS(pack(bad, layout), DimensionMismatch);
  CHECK_THROWS_AS(unpack(VectorXd::Zero(10), layout), DimensionMismatch);
}

TEST_CASE("objective direct evaluations") {
  HandoverNlp p = make_problem(40);
  const DecisionLayout& layout = p.layout();

  VectorXd z = VectorXd::Zero(layout.size());
  for (int k = 0; k <= 40; ++k) z[layout.dt(k)] = 0.1;
  CHECK(p.objective(z) == doctest::Approx(41.0).epsilon(1e-14));

  CHECK(p.objective(VectorXd::Zero(layout.size())) == 0.0);

  // independent naive re-summation on a random vector
  std::mt19937_64 rng(17);
  z = random_decision(rng, p);
  const Trajectory t = unpack(z, layout);
  double expect = 0.0;
  for (int k = 0; k <= 40; ++k) {
    expect += 10.0 * t.dt[k] + 1.0 * t.progress[k] + 1.0 * t.uav_states.col(k).squaredNorm();
  }
  CHECK(rel_err(p.objective(z), expect) < 1e-12);

  const CostBreakdown c = p.cost_components(z);
  CHECK(rel_err(c.total(), expect) < 1e-12);
}

TEST_CASE("dynamics defects vanish on a simulated trajectory") {
  HandoverNlp p = make_problem(12);
  const DecisionLayout& layout = p.layout();
  const int n = layout.intervals();

  Trajectory t = Trajectory::zero(n);
  QuadrotorParams quad;
  UgvParams ugv;
  Vec12 xq = simple_task().uav_start.to_vector();
  Vec4 xg = simple_task().ugv_start.to_vector();
  const Vec4 hover = Vec4::Constant(quad.mass * quad.gravity / 4.0);
  std::mt19937_64 rng(3);
  for (int k = 0; k <= n; ++k) {
    t.uav_states.col(k) = xq;
    t.ugv_states.col(k) = xg;
    t.dt[k] = 0.1;
    t.progress[k] = 1.0 - static_cast<double>(k) / n;
    if (k < n) {
      Vec4 uq = hover + Vec4::Constant(uniform(rng, -0.02, 0.02));
      Vec2 ug(uniform(rng, 0.0, 0.5), uniform(rng, -1.0, 1.0));
      t.uav_inputs.col(k) = uq;
      t.ugv_inputs.col(k) = ug;
      t.event_weight[k] = 1.0 / n;
      t.slack[k] = 0.0;
      xq = rk2_step_quad(xq, uq, 0.1, quad);
      xg = rk2_step_ugv(xg, ug, 0.1, ugv);
    }
  }
  const VectorXd z = pack(t, layout);
  VectorXd r;
  p.eq_residuals(z, r);
  CHECK(r.head(16 * n).cwiseAbs().maxCoeff() < 1e-14);

  // perturbing one input entry touches exactly one defect block
  VectorXd z2 = z;
  z2[layout.uav_input(4)] += 0.05;
  VectorXd r2;
  p.eq_residuals(z2, r2);
  for (int k = 0; k < n; ++k) {
    const double diff = (r2.segment(16 * k, 16) - r.segment(16 * k, 16)).cwiseAbs().maxCoeff();
    if (k == 4) {
      CHECK(diff > 0.0);
    } else {
      CHECK(diff == 0.0);
    }
  }

  // perturbing a mid-horizon state touches only the two adjacent blocks
  VectorXd z3 = z;
  z3[layout.uav_state(5) + 2] += 0.01;
  VectorXd r3;
  p.eq_residuals(z3, r3);
  for (int k = 0; k < n; ++k) {
    const double diff = (r3.segment(16 * k, 16) - r.segment(16 * k, 16)).cwiseAbs().maxCoeff();
    if (k == 4 || k == 5) {
      CHECK(diff > 0.0);
    } else {
      CHECK(diff == 0.0);
    }
  }
}

TEST_CASE("handover constraint examples") {
  HandoverNlp p = make_problem(10);
  const DecisionLayout& layout = p.layout();
  const int n = 10;
  const int kstar = 6;

  Trajectory t = Trajectory::zero(n);
  t.dt.setConstant(0.1);
  for (int k = 0; k <= n; ++k) {
    t.uav_states.col(k).head(3) = Vec3(1.0, 2.0, 0.3);  // hover at the lifted deck point
    t.ugv_states.col(k).head(2) = Vec2(1.0, 2.0);
    t.uav_states.col(k).segment(6, 2) = Vec2(0.4, -0.2);
    t.ugv_states.col(k).tail(2) = Vec2(0.4, -0.2);
    t.progress[k] = k <= kstar ? 1.0 : 0.0;
  }
  for (int k = 0; k < n; ++k) t.event_weight[k] = (k == kstar) ? 1.0 : 0.0;

  const VectorXd z = pack(t, layout);
  VectorXd g;
  p.ineq_residuals(z, g);
  CHECK(g.maxCoeff() <= 1e-12);  // exact rendezvous is feasible

  VectorXd c;
  p.eq_residuals(z, c);
  const int base = 16 * n + 32;
  CHECK(std::abs(c[base]) < 1e-14);       // selector sum
  CHECK(std::abs(c[base + 1]) < 1e-14);   // progress start
  for (int k = 0; k < n; ++k) CHECK(std::abs(c[base + 2 + k]) < 1e-14);
  CHECK(std::abs(c[base + 2 + n]) < 1e-14);  // concentration

  // kappa telescoping under a one-hot selector
  CHECK(t.progress.sum() == doctest::Approx(kstar + 1.0));

  // robots 1 m apart at the selected knot with the slack at its cap
  Trajectory far = t;
  for (int k = 0; k <= n; ++k) far.uav_states.col(k).head(3) = Vec3(2.0, 2.0, 0.3);
  for (int k = 0; k < n; ++k) far.slack[k] = 0.0025;
  p.ineq_residuals(pack(far, layout), g);
  CHECK(g[kstar] == doctest::Approx(1.0 - 0.0025).epsilon(1e-12));
}

TEST_CASE("boundary residuals") {
  HandoverNlp p = make_problem(8);
  const DecisionLayout& layout = p.layout();
  const TaskSpec task = simple_task();

  Trajectory t = Trajectory::zero(8);
  t.dt.setConstant(0.1);
  for (int k = 0; k <= 8; ++k) {
    t.uav_states.col(k) = task.uav_start.to_vector();
    t.ugv_states.col(k) = task.ugv_start.to_vector();
  }
  t.uav_states.col(8) = task.uav_goal.to_vector();
  t.ugv_states.col(8) = task.ugv_goal.to_vector();

  VectorXd c;
  p.eq_residuals(pack(t, layout), c);
  CHECK(c.segment(16 * 8, 32).cwiseAbs().maxCoeff() < 1e-14);

  // a goal perturbation of delta in one entry shows up as a single -delta
  TaskSpec moved = task;
  moved.uav_goal.position[1] += 0.25;
  QuadrotorParams quad;
  UgvParams ugv;
  HandoverNlp p2 = build_problem(moved, BoundsSet::defaults(quad), CostWeights{}, HandoverConfig{},
                                 HorizonConfig{8}, quad, ugv);
  VectorXd c2;
  p2.eq_residuals(pack(t, layout), c2);
  VectorXd diff = c2 - c;
  CHECK(diff[16 * 8 + 16 + 1] == doctest::Approx(-0.25));
  diff[16 * 8 + 16 + 1] = 0.0;
  CHECK(diff.cwiseAbs().maxCoeff() == 0.0);

  // random point: residual equals the endpoint difference computed directly
  std::mt19937_64 rng(9);
  const VectorXd z = random_decision(rng, p);
  p.eq_residuals(z, c);
  const Trajectory tz = unpack(z, layout);
  CHECK((c.segment(16 * 8, 12) - (tz.uav_states.col(0) - task.uav_start.to_vector()))
            .cwiseAbs()
            .maxCoeff() < 1e-15);
  CHECK((c.segment(16 * 8 + 16, 12) - (tz.uav_states.col(8) - task.uav_goal.to_vector()))
            .cwiseAbs()
            .maxCoeff() < 1e-15);
}

TEST_CASE("problem dimensions and infeasible task") {
  HandoverNlp p = make_problem(40);
  CHECK(p.num_vars() == 1058);
  CHECK(p.num_eq() == 16 * 40 + 32 + (40 + 3));
  CHECK(p.num_ineq() == 2 * 40);

  TaskSpec bad = simple_task();
  bad.uav_goal.position[0] = 9.0;
  QuadrotorParams quad;
  UgvParams ugv;
  CHECK_THROWS_AS(build_problem(bad, BoundsSet::defaults(quad), CostWeights{}, HandoverConfig{},
                                HorizonConfig{40}, quad, ugv),
                  InfeasibleTask);
}

TEST_CASE("objective gradient matches finite differences") {
  HandoverNlp p = make_problem(5);
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    const VectorXd z = random_decision(rng, p);
    VectorXd grad;
    p.objective_gradient(z, grad);
    const VectorXd fd = testutil::fd_gradient([&](const VectorXd& zz) { return p.objective(zz); }, z);
    double worst = 0.0;
    for (int i = 0; i < z.size(); ++i) worst = std::max(worst, rel_err(grad[i], fd[i]));
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("constraint jacobians match finite differences") {
  HandoverNlp p = make_problem(5);
  std::mt19937_64 rng(37);

  SparseJacobian eq_jac, ineq_jac;
  p.init_eq_jacobian(eq_jac);
  p.init_ineq_jacobian(ineq_jac);

  for (int trial = 0; trial < 3; ++trial) {
    const VectorXd z = random_decision(rng, p);

    p.eq_jacobian_values(z, eq_jac);
    Eigen::MatrixXd dense = Eigen::MatrixXd(eq_jac.to_sparse());
    auto eq_fn = [&](const VectorXd& zz) {
      VectorXd r;
      p.eq_residuals(zz, r);
      return r;
    };
    CHECK(testutil::max_jacobian_rel_err(eq_fn, z, dense) < 1e-6);

    p.ineq_jacobian_values(z, ineq_jac);
    dense = Eigen::MatrixXd(ineq_jac.to_sparse());
    auto ineq_fn = [&](const VectorXd& zz) {
      VectorXd r;
      p.ineq_residuals(zz, r);
      return r;
    };
    CHECK(testutil::max_jacobian_rel_err(ineq_fn, z, dense) < 1e-6);
  }
}

TEST_CASE("combined evaluation matches the split evaluators") {
  HandoverNlp p = make_problem(6);
  std::mt19937_64 rng(43);
  const VectorXd z = random_decision(rng, p);

  SparseJacobian jac1, jac2;
  p.init_eq_jacobian(jac1);
  p.init_eq_jacobian(jac2);
  VectorXd r1, r2;
  p.eq_residuals(z, r1);
  p.eval_eq(z, r2, jac2);
  p.eq_jacobian_values(z, jac1);
  CHECK((r1 - r2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((jac1.values - jac2.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("problem description reports dimensions") {
  HandoverNlp p = make_problem(40);
  const std::string text = p.describe();
  CHECK(text.find("variables: 1058") != std::string::npos);
  CHECK(text.find("inequalities: 80") != std::string::npos);
}
