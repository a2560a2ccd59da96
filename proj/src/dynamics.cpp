#include "handover/dynamics.hpp"

#include <cmath>

namespace handover {

SingularAttitude::SingularAttitude(double c)
    : std::runtime_error("attitude near pitch singularity, |cos(theta)| = " +
                         std::to_string(std::abs(c))),
      cos_pitch(c) {}

Vec12 QuadrotorState::to_vector() const {
  Vec12 x;
  x << position, euler, velocity, body_rates;
  return x;
}

QuadrotorState QuadrotorState::from_vector(const Vec12& x) {
  QuadrotorState s;
  s.position = x.segment<3>(0);
  s.euler = x.segment<3>(3);
  s.velocity = x.segment<3>(6);
  s.body_rates = x.segment<3>(9);
  return s;
}

Vec4 UgvState::to_vector() const {
  Vec4 x;
  x << position, velocity;
  return x;
}

UgvState UgvState::from_vector(const Vec4& x) {
  UgvState s;
  s.position = x.segment<2>(0);
  s.velocity = x.segment<2>(2);
  return s;
}

Mat3 rotation_matrix(const Vec3& euler) {
  const double cphi = std::cos(euler[0]), sphi = std::sin(euler[0]);
  const double cth = std::cos(euler[1]), sth = std::sin(euler[1]);
  const double cpsi = std::cos(euler[2]), spsi = std::sin(euler[2]);
  Mat3 r;
  r << cpsi * cth, cpsi * sth * sphi - spsi * cphi, cpsi * sth * cphi + spsi * sphi,
       spsi * cth, spsi * sth * sphi + cpsi * cphi, spsi * sth * cphi - cpsi * sphi,
       -sth, cth * sphi, cth * cphi;
  return r;
}

Mat3 euler_rate_map(const Vec3& euler) {
  const double cth = std::cos(euler[1]);
  if (std::abs(cth) < kPitchSingularityMargin) throw SingularAttitude(cth);
  const double cphi = std::cos(euler[0]), sphi = std::sin(euler[0]);
  const double tth = std::tan(euler[1]);
  Mat3 t;
  t << 1.0, sphi * tth, cphi * tth,
       0.0, cphi, -sphi,
       0.0, sphi / cth, cphi / cth;
  return t;
}

Vec3 torque_map(const Vec4& f, const QuadrotorParams& p) {
  return Vec3(p.arm_length * (f[1] - f[3]),
              p.arm_length * (f[2] - f[0]),
              p.drag_torque_coeff * (f[0] - f[1] + f[2] - f[3]));
}

Vec12 quad_derivative(const Vec12& x, const Vec4& u, const QuadrotorParams& p) {
  const Vec3 euler = x.segment<3>(3);
  const Vec3 velocity = x.segment<3>(6);
  const Vec3 omega = x.segment<3>(9);

  const Mat3 rot = rotation_matrix(euler);
  const Mat3 rate_map = euler_rate_map(euler);

  const double thrust = u.sum();
  Vec3 accel = rot.col(2) * (thrust / p.mass);
  accel[2] -= p.gravity;

  const Vec3 inertia_omega = p.inertia_diag.cwiseProduct(omega);
  const Vec3 omega_dot =
      (torque_map(u, p) - omega.cross(inertia_omega)).cwiseQuotient(p.inertia_diag);

  Vec12 dx;
  dx << velocity, rate_map * omega, accel, omega_dot;
  return dx;
}

Vec4 ugv_derivative(const Vec4& x, const Vec2& u, const UgvParams& p) {
  Vec4 dx;
  dx << x[2], x[3], u[0] * std::cos(u[1]) / p.mass, u[0] * std::sin(u[1]) / p.mass;
  return dx;
}

void quad_derivative_jacobians(const Vec12& x, const Vec4& u, const QuadrotorParams& p,
                               Mat12& fx, Mat12x4& fu) {
  const double phi = x[3], th = x[4], psi = x[5];
  const Vec3 omega = x.segment<3>(9);
  const double cphi = std::cos(phi), sphi = std::sin(phi);
  const double cth = std::cos(th), sth = std::sin(th);
  const double cpsi = std::cos(psi), spsi = std::sin(psi);
  if (std::abs(cth) < kPitchSingularityMargin) throw SingularAttitude(cth);
  const double tth = sth / cth;

  fx.setZero();
  fu.setZero();

  // d(position_dot)/d(velocity)
  fx.block<3, 3>(0, 6).setIdentity();

  // Euler kinematics: euler_dot = T(euler) * omega.
  Mat3 t;
  t << 1.0, sphi * tth, cphi * tth,
       0.0, cphi, -sphi,
       0.0, sphi / cth, cphi / cth;
  Mat3 dt_dphi;
  dt_dphi << 0.0, cphi * tth, -sphi * tth,
             0.0, -sphi, -cphi,
             0.0, cphi / cth, -sphi / cth;
  const double sec2 = 1.0 / (cth * cth);
  Mat3 dt_dth;
  dt_dth << 0.0, sphi * sec2, cphi * sec2,
            0.0, 0.0, 0.0,
            0.0, sphi * sth * sec2, cphi * sth * sec2;
  fx.block<3, 1>(3, 3) = dt_dphi * omega;
  fx.block<3, 1>(3, 4) = dt_dth * omega;
  fx.block<3, 3>(3, 9) = t;

  // Translational acceleration: (R e3) * thrust / m - g e3.
  const double thrust = u.sum();
  const Vec3 r3(cpsi * sth * cphi + spsi * sphi,
                spsi * sth * cphi - cpsi * sphi,
                cth * cphi);
  const Vec3 dr3_dphi(-cpsi * sth * sphi + spsi * cphi,
                      -spsi * sth * sphi - cpsi * cphi,
                      -cth * sphi);
  const Vec3 dr3_dth(cpsi * cth * cphi, spsi * cth * cphi, -sth * cphi);
  const Vec3 dr3_dpsi(-spsi * sth * cphi + cpsi * sphi,
                      cpsi * sth * cphi + spsi * sphi,
                      0.0);
  const double inv_m = 1.0 / p.mass;
  fx.block<3, 1>(6, 3) = dr3_dphi * (thrust * inv_m);
  fx.block<3, 1>(6, 4) = dr3_dth * (thrust * inv_m);
  fx.block<3, 1>(6, 5) = dr3_dpsi * (thrust * inv_m);
  for (int j = 0; j < 4; ++j) fu.block<3, 1>(6, j) = r3 * inv_m;

  // Rotational dynamics: omega_dot = J^-1 (tau - omega x J omega).
  const Vec3 jw = p.inertia_diag.cwiseProduct(omega);
  Mat3 skew_w, skew_jw;
  skew_w << 0, -omega[2], omega[1], omega[2], 0, -omega[0], -omega[1], omega[0], 0;
  skew_jw << 0, -jw[2], jw[1], jw[2], 0, -jw[0], -jw[1], jw[0], 0;
  const Mat3 jdiag = p.inertia_diag.asDiagonal();
  const Mat3 cross_jac = skew_jw - skew_w * jdiag;  // d(-omega x J omega)/d(omega)
  fx.block<3, 3>(9, 9) = p.inertia_diag.cwiseInverse().asDiagonal() * cross_jac;

  Eigen::Matrix<double, 3, 4> dtau;
  dtau << 0, p.arm_length, 0, -p.arm_length,
          -p.arm_length, 0, p.arm_length, 0,
          p.drag_torque_coeff, -p.drag_torque_coeff, p.drag_torque_coeff, -p.drag_torque_coeff;
  fu.block<3, 4>(9, 0) = p.inertia_diag.cwiseInverse().asDiagonal() * dtau;
}

void ugv_derivative_jacobians(const Vec4& /*x*/, const Vec2& u, const UgvParams& p,
                              Mat4& fx, Mat4x2& fu) {
  fx.setZero();
  fx(0, 2) = 1.0;
  fx(1, 3) = 1.0;
  fu.setZero();
  const double inv_m = 1.0 / p.mass;
  const double c = std::cos(u[1]), s = std::sin(u[1]);
  fu(2, 0) = c * inv_m;
  fu(3, 0) = s * inv_m;
  fu(2, 1) = -u[0] * s * inv_m;
  fu(3, 1) = u[0] * c * inv_m;
}

Vec12 rk2_step_quad(const Vec12& x, const Vec4& u, double dt, const QuadrotorParams& p) {
  const Vec12 k1 = quad_derivative(x, u, p);
  return x + dt * quad_derivative(x + (0.5 * dt) * k1, u, p);
}

Vec4 rk2_step_ugv(const Vec4& x, const Vec2& u, double dt, const UgvParams& p) {
  const Vec4 k1 = ugv_derivative(x, u, p);
  return x + dt * ugv_derivative(x + (0.5 * dt) * k1, u, p);
}

void rk2_step_quad_jacobians(const Vec12& x, const Vec4& u, double dt, const QuadrotorParams& p,
                             Vec12& x_next, Mat12& dstate, Mat12x4& dinput, Vec12& ddt) {
  const Vec12 f1 = quad_derivative(x, u, p);
  Mat12 a1;
  Mat12x4 b1;
  quad_derivative_jacobians(x, u, p, a1, b1);

  const Vec12 mid = x + (0.5 * dt) * f1;
  const Vec12 fm = quad_derivative(mid, u, p);
  Mat12 am;
  Mat12x4 bm;
  quad_derivative_jacobians(mid, u, p, am, bm);

  x_next = x + dt * fm;
  dstate = Mat12::Identity() + dt * (am + (0.5 * dt) * am * a1);
  dinput = dt * ((0.5 * dt) * am * b1 + bm);
  ddt = fm + (0.5 * dt) * (am * f1);
}

void rk2_step_ugv_jacobians(const Vec4& x, const Vec2& u, double dt, const UgvParams& p,
                            Vec4& x_next, Mat4& dstate, Mat4x2& dinput, Vec4& ddt) {
  const Vec4 f1 = ugv_derivative(x, u, p);
  Mat4 a1;
  Mat4x2 b1;
  ugv_derivative_jacobians(x, u, p, a1, b1);

  const Vec4 mid = x + (0.5 * dt) * f1;
  const Vec4 fm = ugv_derivative(mid, u, p);
  Mat4 am;
  Mat4x2 bm;
  ugv_derivative_jacobians(mid, u, p, am, bm);

  x_next = x + dt * fm;
  dstate = Mat4::Identity() + dt * (am + (0.5 * dt) * am * a1);
  dinput = dt * ((0.5 * dt) * am * b1 + bm);
  ddt = fm + (0.5 * dt) * (am * f1);
}

}  // namespace handover
