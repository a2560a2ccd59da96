#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

namespace testutil {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

inline Eigen::VectorXd uniform_vec(std::mt19937_64& rng, int n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = uniform(rng, lo, hi);
  return v;
}

// |a-b| relative to the larger magnitude, floored at 1 so near-zero values
// degrade to an absolute comparison.
inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

template <class F>
Eigen::VectorXd fd_gradient(F&& f, const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + step;
    const double fp = f(xp);
    xp[i] = x[i] - step;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

template <class F>
Eigen::MatrixXd fd_jacobian(F&& f, const Eigen::VectorXd& x, int m, double h = 1e-6) {
  Eigen::MatrixXd jac(m, x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + step;
    const Eigen::VectorXd fp = f(xp);
    xp[i] = x[i] - step;
    const Eigen::VectorXd fm = f(xp);
    xp[i] = x[i];
    jac.col(i) = (fp - fm) / (2.0 * step);
  }
  return jac;
}

template <class F>
double max_jacobian_rel_err(F&& f, const Eigen::VectorXd& x, const Eigen::MatrixXd& analytic,
                            double h = 1e-6) {
  const Eigen::MatrixXd fd = fd_jacobian(f, x, static_cast<int>(analytic.rows()), h);
  double worst = 0.0;
  for (Eigen::Index r = 0; r < analytic.rows(); ++r) {
    for (Eigen::Index c = 0; c < analytic.cols(); ++c) {
      worst = std::max(worst, rel_err(fd(r, c), analytic(r, c)));
    }
  }
  return worst;
}

}  // namespace testutil
