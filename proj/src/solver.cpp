#include "handover/solver.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <sstream>

#include "handover/textio.hpp"

namespace handover {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

VectorXd clamp(const VectorXd& x, const VectorXd& lo, const VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

// Augmented Lagrangian with equality multipliers lambda and inequality
// multipliers mu. Inequalities g(z) <= 0 enter through the slack-shifted
// form (rho/2) [max(0, mu/rho + g)^2 - (mu/rho)^2], whose gradient is
// Jg^T max(0, mu + rho g).
class AugmentedLagrangian {
 public:
  AugmentedLagrangian(const SmoothProblem& p) : problem_(p) {
    problem_.init_eq_jacobian(jac_eq_);
    problem_.init_ineq_jacobian(jac_ineq_);
    lambda_ = VectorXd::Zero(p.num_eq());
    mu_ = VectorXd::Zero(p.num_ineq());
    rho_ = 1.0;
  }

  bool value(const VectorXd& z, double& out) {
    double f;
    try {
      f = problem_.objective(z);
      if (problem_.num_eq() > 0) problem_.eq_residuals(z, c_);
      if (problem_.num_ineq() > 0) problem_.ineq_residuals(z, g_);
    } catch (const std::exception&) {
      return false;
    }
    if (!std::isfinite(f)) return false;
    double acc = f;
    for (Eigen::Index i = 0; i < c_.size(); ++i) {
      acc += lambda_[i] * c_[i] + 0.5 * rho_ * c_[i] * c_[i];
    }
    for (Eigen::Index i = 0; i < g_.size(); ++i) {
      const double shifted = mu_[i] / rho_ + g_[i];
      if (shifted > 0.0) acc += 0.5 * rho_ * (shifted * shifted - (mu_[i] / rho_) * (mu_[i] / rho_));
      else acc -= 0.5 * mu_[i] * mu_[i] / rho_;
    }
    if (!std::isfinite(acc)) return false;
    out = acc;
    return true;
  }

  // Value and gradient at z; also leaves the residuals of z in c_/g_.
  bool value_and_gradient(const VectorXd& z, double& out, VectorXd& grad) {
    double f;
    try {
      f = problem_.objective(z);
      problem_.objective_gradient(z, grad);
      if (problem_.num_eq() > 0) problem_.eval_eq(z, c_, jac_eq_);
      if (problem_.num_ineq() > 0) problem_.eval_ineq(z, g_, jac_ineq_);
    } catch (const std::exception&) {
      return false;
    }
    if (!std::isfinite(f) || !grad.allFinite()) return false;

    double acc = f;
    if (c_.size() > 0) {
      w_eq_ = lambda_ + rho_ * c_;
      acc += lambda_.dot(c_) + 0.5 * rho_ * c_.squaredNorm();
      jac_eq_.transpose_multiply_add(w_eq_, 1.0, grad);
    }
    if (g_.size() > 0) {
      w_ineq_ = (mu_ + rho_ * g_).cwiseMax(0.0);
      for (Eigen::Index i = 0; i < g_.size(); ++i) {
        const double shifted = mu_[i] / rho_ + g_[i];
        if (shifted > 0.0) acc += 0.5 * rho_ * (shifted * shifted - (mu_[i] / rho_) * (mu_[i] / rho_));
        else acc -= 0.5 * mu_[i] * mu_[i] / rho_;
      }
      jac_ineq_.transpose_multiply_add(w_ineq_, 1.0, grad);
    }
    if (!std::isfinite(acc) || !grad.allFinite()) return false;
    out = acc;
    return true;
  }

  // Residual-only refresh; returns max violation, or infinity on failure.
  double violation(const VectorXd& z) {
    try {
      if (problem_.num_eq() > 0) problem_.eq_residuals(z, c_);
      if (problem_.num_ineq() > 0) problem_.ineq_residuals(z, g_);
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
    double v = 0.0;
    if (c_.size() > 0) v = c_.cwiseAbs().maxCoeff();
    if (g_.size() > 0) v = std::max(v, g_.maxCoeff());
    return std::max(v, 0.0);
  }

  void update_multipliers() {
    if (c_.size() > 0) lambda_ += rho_ * c_;
    if (g_.size() > 0) mu_ = (mu_ + rho_ * g_).cwiseMax(0.0);
  }

  // Gauss-Newton diagonal of the AL Hessian, rho * sum_r J_ri^2 over
  // equality rows and active inequality rows, from the Jacobians of the
  // last value_and_gradient point. Used to precondition the inner loop.
  void hessian_diag(VectorXd& diag) const {
    diag.setConstant(problem_.num_vars(), 1e-8);
    const size_t n_eq = jac_eq_.rows.size();
    for (size_t i = 0; i < n_eq; ++i) {
      const double v = jac_eq_.values[static_cast<Eigen::Index>(i)];
      diag[jac_eq_.cols[i]] += rho_ * v * v;
    }
    if (g_.size() > 0) {
      const size_t n_in = jac_ineq_.rows.size();
      for (size_t i = 0; i < n_in; ++i) {
        const int r = jac_ineq_.rows[i];
        if (mu_[r] + rho_ * g_[r] > 0.0) {
          const double v = jac_ineq_.values[static_cast<Eigen::Index>(i)];
          diag[jac_ineq_.cols[i]] += rho_ * v * v;
        }
      }
    }
  }

  // Least-squares multipliers from the free-variable stationarity system;
  // used when the initial point is already nearly feasible.
  void estimate_multipliers(const VectorXd& z, const VectorXd& lo, const VectorXd& hi) {
    const int n = problem_.num_vars();
    VectorXd grad_f(n);
    VectorXd g;
    try {
      problem_.objective_gradient(z, grad_f);
      if (problem_.num_eq() > 0) problem_.eq_jacobian_values(z, jac_eq_);
      if (problem_.num_ineq() > 0) {
        problem_.ineq_residuals(z, g);
        problem_.ineq_jacobian_values(z, jac_ineq_);
      }
    } catch (const std::exception&) {
      return;
    }

    std::vector<char> free_var(static_cast<size_t>(n), 1);
    for (int i = 0; i < n; ++i) {
      if (z[i] - lo[i] < 1e-9 || hi[i] - z[i] < 1e-9) free_var[static_cast<size_t>(i)] = 0;
    }
    std::vector<int> active_ineq;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (g[i] > -1e-6) active_ineq.push_back(static_cast<int>(i));
    }
    const int m_eq = problem_.num_eq();
    const int m = m_eq + static_cast<int>(active_ineq.size());
    if (m == 0) return;

    std::vector<int> ineq_row_of(static_cast<size_t>(problem_.num_ineq()), -1);
    for (size_t i = 0; i < active_ineq.size(); ++i) {
      ineq_row_of[static_cast<size_t>(active_ineq[i])] = m_eq + static_cast<int>(i);
    }

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(jac_eq_.rows.size() + jac_ineq_.rows.size());
    for (size_t i = 0; i < jac_eq_.rows.size(); ++i) {
      if (free_var[static_cast<size_t>(jac_eq_.cols[i])])
        trips.emplace_back(jac_eq_.rows[i], jac_eq_.cols[i], jac_eq_.values[i]);
    }
    for (size_t i = 0; i < jac_ineq_.rows.size(); ++i) {
      const int r = ineq_row_of[static_cast<size_t>(jac_ineq_.rows[i])];
      if (r >= 0 && free_var[static_cast<size_t>(jac_ineq_.cols[i])])
        trips.emplace_back(r, jac_ineq_.cols[i], jac_ineq_.values[i]);
    }
    Eigen::SparseMatrix<double> a(m, n);
    a.setFromTriplets(trips.begin(), trips.end());

    VectorXd grad_free = grad_f;
    for (int i = 0; i < n; ++i)
      if (!free_var[static_cast<size_t>(i)]) grad_free[i] = 0.0;

    Eigen::SparseMatrix<double> normal = (a * a.transpose()).pruned();
    for (int i = 0; i < m; ++i) normal.coeffRef(i, i) += 1e-8;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(normal);
    if (ldlt.info() != Eigen::Success) return;
    const VectorXd sol = ldlt.solve(-(a * grad_free));
    if (!sol.allFinite()) return;

    lambda_ = sol.head(m_eq);
    for (size_t i = 0; i < active_ineq.size(); ++i) {
      mu_[active_ineq[i]] = std::max(0.0, sol[m_eq + static_cast<Eigen::Index>(i)]);
    }
  }

  const SmoothProblem& problem_;
  SparseJacobian jac_eq_, jac_ineq_;
  VectorXd lambda_, mu_, c_, g_, w_eq_, w_ineq_;
  double rho_;
};

struct InnerResult {
  int iterations = 0;
  double pg_norm = std::numeric_limits<double>::infinity();
  bool converged = false;
  bool failed = false;
};

// Quasi-Newton memory that survives across outer rounds while the
// subproblem (multipliers and penalty) stays the same.
struct LbfgsState {
  std::deque<VectorXd> s, y;
  std::deque<double> rho;
  VectorXd precond;  // Gauss-Newton diagonal of the AL Hessian

  void clear() {
    s.clear();
    y.clear();
    rho.clear();
  }
};

// Bound-projected L-BFGS with a backtracking Armijo search along the
// projected path. Gradient components pushing into an active bound are
// masked out of the two-loop recursion, and the implicit initial matrix is
// the inverse Gauss-Newton diagonal, which absorbs the scale disparity the
// penalty term creates between variable groups.
InnerResult minimize_inner(AugmentedLagrangian& al, VectorXd& x, const VectorXd& lo,
                           const VectorXd& hi, double tol, int max_iters, int mem,
                           LbfgsState& state, bool reset, Clock::time_point t0, double budget_s) {
  InnerResult res;
  const int n = static_cast<int>(x.size());
  x = clamp(x, lo, hi);

  double f;
  VectorXd grad(n);
  if (!al.value_and_gradient(x, f, grad)) {
    res.failed = true;
    return res;
  }
  if (reset) {
    state.clear();
    al.hessian_diag(state.precond);
  }

  VectorXd masked(n), d(n), x_trial(n), grad_trial(n);
  std::vector<double> alpha_buf;

  auto projected_gradient_norm = [&]() {
    double nrm = 0.0;
    for (int i = 0; i < n; ++i) {
      const double step = x[i] - std::clamp(x[i] - grad[i], lo[i], hi[i]);
      nrm = std::max(nrm, std::abs(step));
    }
    return nrm;
  };

  for (int it = 0; it < max_iters; ++it) {
    res.pg_norm = projected_gradient_norm();
    if (res.pg_norm <= tol) {
      res.converged = true;
      return res;
    }
    if (budget_s > 0 && seconds_since(t0) > budget_s) return res;

    // mask gradient components that push into an active bound
    for (int i = 0; i < n; ++i) {
      const bool at_lo = x[i] - lo[i] <= 0.0 && grad[i] > 0.0;
      const bool at_hi = hi[i] - x[i] <= 0.0 && grad[i] < 0.0;
      masked[i] = (at_lo || at_hi) ? 0.0 : grad[i];
    }

    // two-loop recursion on the masked gradient
    d = -masked;
    const int h = static_cast<int>(state.s.size());
    alpha_buf.assign(static_cast<size_t>(h), 0.0);
    for (int i = h - 1; i >= 0; --i) {
      alpha_buf[static_cast<size_t>(i)] =
          state.rho[static_cast<size_t>(i)] * state.s[static_cast<size_t>(i)].dot(d);
      d -= alpha_buf[static_cast<size_t>(i)] * state.y[static_cast<size_t>(i)];
    }
    d.array() /= state.precond.array();
    if (h > 0) {
      const VectorXd& ylast = state.y.back();
      const double denom = ylast.dot(VectorXd(ylast.array() / state.precond.array()));
      if (denom > 0.0) d *= state.s.back().dot(ylast) / denom;
    }
    for (int i = 0; i < h; ++i) {
      const double beta =
          state.rho[static_cast<size_t>(i)] * state.y[static_cast<size_t>(i)].dot(d);
      d += (alpha_buf[static_cast<size_t>(i)] - beta) * state.s[static_cast<size_t>(i)];
    }
    for (int i = 0; i < n; ++i) {
      const bool at_lo = x[i] - lo[i] <= 0.0 && grad[i] > 0.0;
      const bool at_hi = hi[i] - x[i] <= 0.0 && grad[i] < 0.0;
      if (at_lo || at_hi) d[i] = 0.0;
    }

    double directional = grad.dot(d);
    if (!(directional < 0.0)) {
      state.clear();
      d = VectorXd(-masked.array() / state.precond.array());
      directional = grad.dot(d);
      if (!(directional < 0.0)) {
        res.converged = true;  // stationary up to masking
        return res;
      }
    }

    // backtracking Armijo on the projected path
    double alpha = 1.0;
    bool step_taken = false;
    double f_trial = 0.0;
    for (int ls = 0; ls < 40; ++ls) {
      x_trial = clamp(x + alpha * d, lo, hi);
      const VectorXd dx = x_trial - x;
      if (dx.cwiseAbs().maxCoeff() == 0.0) break;
      if (al.value(x_trial, f_trial) && f_trial <= f + 1e-4 * grad.dot(dx)) {
        step_taken = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!step_taken) {
      if (!state.s.empty()) {
        state.clear();
        continue;  // retry from preconditioned steepest descent
      }
      res.converged = true;  // line search exhausted at the current point
      return res;
    }

    if (!al.value_and_gradient(x_trial, f_trial, grad_trial)) {
      res.failed = true;
      return res;
    }

    const VectorXd s = x_trial - x;
    const VectorXd y = grad_trial - grad;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      state.s.push_back(s);
      state.y.push_back(y);
      state.rho.push_back(1.0 / sy);
      if (static_cast<int>(state.s.size()) > mem) {
        state.s.pop_front();
        state.y.pop_front();
        state.rho.pop_front();
      }
    }
    x = x_trial;
    f = f_trial;
    grad.swap(grad_trial);
    ++res.iterations;
  }
  res.pg_norm = projected_gradient_norm();
  return res;
}

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::TimeBudgetExceeded: return "time_budget_exceeded";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

SolveReport solve(const SmoothProblem& problem, const VectorXd& initial_guess,
                  const SolverOptions& options) {
  const auto t0 = Clock::now();
  SolveReport report;
  if (initial_guess.size() != problem.num_vars()) {
    throw DimensionMismatch("initial guess has wrong dimension");
  }

  AugmentedLagrangian al(problem);
  al.rho_ = options.initial_penalty;

  VectorXd x = clamp(initial_guess, problem.lower(), problem.upper());
  double v = al.violation(x);
  if (!std::isfinite(v)) {
    report.status = SolveStatus::NumericalFailure;
    report.solution = x;
    report.wall_time_s = seconds_since(t0);
    return report;
  }
  if (v <= options.multiplier_estimation_threshold) {
    al.estimate_multipliers(x, problem.lower(), problem.upper());
  }

  double inner_tol = std::max(options.optimality_tol, std::min(1e-2, 0.1 * v));
  double v_accepted = std::numeric_limits<double>::infinity();
  report.status = SolveStatus::MaxIterations;

  for (int outer = 1; outer <= options.max_outer; ++outer) {
    const InnerResult inner =
        minimize_inner(al, x, problem.lower(), problem.upper(), inner_tol, options.max_inner,
                       options.memory, t0, options.time_budget_s);
    report.iterations += inner.iterations;
    if (inner.failed) {
      report.status = SolveStatus::NumericalFailure;
      break;
    }

    v = al.violation(x);
    if (!std::isfinite(v)) {
      report.status = SolveStatus::NumericalFailure;
      break;
    }

    // An unfinished subproblem carries over; multipliers and the penalty
    // only move once the inner loop has genuinely converged at this tol.
    const bool accepted = inner.converged && v <= v_accepted;
    if (options.record_trace) {
      report.trace.push_back({outer, inner.iterations, problem.objective(x), v, al.rho_, accepted});
    }

    bool done = false;
    if (accepted) {
      const double v_prev = v_accepted;
      v_accepted = v;
      al.update_multipliers();
      if (v <= options.constraint_tol && inner.pg_norm <= options.optimality_tol &&
          inner_tol <= options.optimality_tol) {
        report.status = SolveStatus::Converged;
        done = true;
      } else if (v > 0.5 * v_prev && v > options.constraint_tol) {
        al.rho_ = std::min(al.rho_ * options.penalty_growth, 1e8);
      }
      inner_tol = std::max(options.optimality_tol, std::min(inner_tol * 0.2, 0.1 * v));
    } else if (inner.converged) {
      al.rho_ = std::min(al.rho_ * options.penalty_growth, 1e8);
    }
    if (done) break;
    if (options.time_budget_s > 0 && seconds_since(t0) > options.time_budget_s) {
      report.status = SolveStatus::TimeBudgetExceeded;
      break;
    }
  }

  report.solution = x;
  report.max_violation = al.violation(x);
  try {
    report.objective = problem.objective(x);
    report.cost = problem.cost_components(x);
  } catch (const std::exception&) {
    report.status = SolveStatus::NumericalFailure;
  }
  report.wall_time_s = seconds_since(t0);
  return report;
}

double FeasibilityReport::max_violation() const {
  double v = bounds_violation;
  for (const auto& f : families) v = std::max(v, f.max_violation);
  return v;
}

bool FeasibilityReport::feasible(double tol) const { return max_violation() <= tol; }

FeasibilityReport feasibility_check(const SmoothProblem& problem, const VectorXd& z,
                                    double /*tol*/) {
  FeasibilityReport rep;
  VectorXd c, g;
  if (problem.num_eq() > 0) problem.eq_residuals(z, c);
  if (problem.num_ineq() > 0) problem.ineq_residuals(z, g);

  for (const auto& fam : problem.families()) {
    double v = 0.0;
    const VectorXd& r = fam.is_equality ? c : g;
    for (int i = fam.begin; i < fam.end; ++i) {
      v = std::max(v, fam.is_equality ? std::abs(r[i]) : std::max(0.0, r[i]));
    }
    rep.families.push_back({fam.name, v});
  }

  const VectorXd& lo = problem.lower();
  const VectorXd& hi = problem.upper();
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    rep.bounds_violation = std::max(rep.bounds_violation, lo[i] - z[i]);
    rep.bounds_violation = std::max(rep.bounds_violation, z[i] - hi[i]);
  }
  rep.bounds_violation = std::max(rep.bounds_violation, 0.0);

  if (const auto* nlp = dynamic_cast<const HandoverNlp*>(&problem)) {
    const auto& layout = nlp->layout();
    const int n = layout.intervals();
    const int base = 16 * n + 32;
    double eps_sum = 0.0, rec_sum = 0.0;
    for (int k = 0; k < n; ++k) {
      eps_sum += z[layout.event_weight(k)];
      rec_sum += c[base + 2 + k];
    }
    // kappa_N = kappa_0 - sum(eps) + sum(recursion residuals), identically
    rep.progress_identity_error = std::abs(z[layout.progress(n)] - z[layout.progress(0)] +
                                           eps_sum - rec_sum);
  }
  return rep;
}

std::string trace_to_csv(const std::vector<OuterTrace>& trace) {
  std::ostringstream out;
  out << "outer,inner_iterations,objective,violation,penalty,accepted\n";
  for (const auto& row : trace) {
    out << row.outer << ',' << row.inner_iterations << ',' << format_double(row.objective) << ','
        << format_double(row.violation) << ',' << format_double(row.penalty) << ','
        << (row.accepted ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace handover
