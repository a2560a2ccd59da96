#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace handover {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using Mat12x4 = Eigen::Matrix<double, 12, 4>;
using Mat4 = Eigen::Matrix4d;
using Mat4x2 = Eigen::Matrix<double, 4, 2>;

// Raised when the Euler-rate map is evaluated too close to the pitch
// singularity (|cos theta| below the margin).
struct SingularAttitude : std::runtime_error {
  explicit SingularAttitude(double cos_pitch);
  double cos_pitch;
};

inline constexpr double kPitchSingularityMargin = 1e-6;

struct QuadrotorParams {
  double mass = 1.0;                    // kg
  Vec3 inertia_diag{0.01, 0.01, 0.02};  // kg m^2
  double arm_length = 0.17;             // m
  double drag_torque_coeff = 0.016;     // N m per N of thrust
  double gravity = 9.81;                // m/s^2
};

struct UgvParams {
  double mass = 8.0;  // kg
};

// Inertial position, ZYX Euler angles (roll, pitch, yaw), inertial velocity,
// body-frame angular velocity. 12 scalars.
struct QuadrotorState {
  Vec3 position = Vec3::Zero();
  Vec3 euler = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 body_rates = Vec3::Zero();

  Vec12 to_vector() const;
  static QuadrotorState from_vector(const Vec12& x);
};

// Per-propeller thrusts f1..f4. The collective thrust is their sum.
struct QuadrotorInput {
  Vec4 thrusts = Vec4::Zero();
  double thrust_sum() const { return thrusts.sum(); }
};

// Planar position and velocity of the omnidirectional ground platform.
struct UgvState {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();

  Vec4 to_vector() const;
  static UgvState from_vector(const Vec4& x);
};

// Planar propulsion force magnitude and its heading vs the inertial x-axis.
struct UgvInput {
  double force = 0.0;
  double heading = 0.0;
};

// Body-to-inertial rotation for ZYX (yaw-pitch-roll) Euler angles.
Mat3 rotation_matrix(const Vec3& euler);

// T(euler) with euler_dot = T * body_rates. Throws SingularAttitude when
// |cos(pitch)| < kPitchSingularityMargin.
Mat3 euler_rate_map(const Vec3& euler);

// Body torque of a "+" rotor layout:
//   roll  = arm * (f2 - f4), pitch = arm * (f3 - f1),
//   yaw   = drag_coeff * (f1 - f2 + f3 - f4).
Vec3 torque_map(const Vec4& thrusts, const QuadrotorParams& p);

// Right-hand sides of the continuous-time models. The translational net
// force is divided by the mass so units stay consistent.
Vec12 quad_derivative(const Vec12& x, const Vec4& u, const QuadrotorParams& p);
Vec4 ugv_derivative(const Vec4& x, const Vec2& u, const UgvParams& p);

// Analytic Jacobians of the derivatives above.
void quad_derivative_jacobians(const Vec12& x, const Vec4& u, const QuadrotorParams& p,
                               Mat12& fx, Mat12x4& fu);
void ugv_derivative_jacobians(const Vec4& x, const Vec2& u, const UgvParams& p,
                              Mat4& fx, Mat4x2& fu);

// Explicit midpoint rule with the input held constant over the step:
//   x+ = x + dt * f(x + (dt/2) * f(x, u), u)
template <class Deriv>
Eigen::VectorXd rk2_step(Deriv&& f, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                         double dt) {
  const Eigen::VectorXd k1 = f(x, u);
  const Eigen::VectorXd mid = x + (0.5 * dt) * k1;
  return x + dt * f(mid, u);
}

Vec12 rk2_step_quad(const Vec12& x, const Vec4& u, double dt, const QuadrotorParams& p);
Vec4 rk2_step_ugv(const Vec4& x, const Vec2& u, double dt, const UgvParams& p);

// Midpoint-rule step together with its Jacobians w.r.t. state, input and dt,
// assembled by the chain rule from the continuous-model Jacobians.
void rk2_step_quad_jacobians(const Vec12& x, const Vec4& u, double dt, const QuadrotorParams& p,
                             Vec12& x_next, Mat12& dstate, Mat12x4& dinput, Vec12& ddt);
void rk2_step_ugv_jacobians(const Vec4& x, const Vec2& u, double dt, const UgvParams& p,
                            Vec4& x_next, Mat4& dstate, Mat4x2& dinput, Vec4& ddt);

}  // namespace handover
