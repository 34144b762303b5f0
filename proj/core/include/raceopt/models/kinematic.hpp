#pragma once

#include <array>
#include <cmath>

#include "raceopt/geometry/kinematics.hpp"
#include "raceopt/geometry/surface.hpp"
#include "raceopt/models/params.hpp"

namespace raceopt::models {

/// Nonplanar kinematic bicycle. State (s, y, theta_s, v, t), input (a, delta).
/// v is the body-x velocity of the CoM.
struct KinematicModel {
  static constexpr int nx = 5;
  static constexpr int nu = 2;
  enum StateIndex { kS = 0, kY = 1, kTheta = 2, kV = 3, kT = 4 };
  enum InputIndex { kAccel = 0, kSteer = 1 };
};

template <typename T>
struct KinematicEval {
  std::array<T, KinematicModel::nx> dx{};  // time derivatives
  T v2{};                                  // body lateral CoM velocity
  T w3{};                                  // yaw rate about n
  T n_net{};
  std::array<T, 2> f_req{};  // tangential force the road must transmit, body axes
  T cone_slack{};            // (c_cone mu N)^2 - |F_req|^2
};

template <typename T>
KinematicEval<T> evaluate_kinematic(const geometry::TrackSurface& surface, int piece, const T* x, const T* u,
                                    const VehicleParams& p) {
  using std::tan;
  const T& v = x[KinematicModel::kV];
  const T& theta = x[KinematicModel::kTheta];
  const T& accel = u[KinematicModel::kAccel];
  const T tan_d = tan(u[KinematicModel::kSteer]);
  const double wb = p.wheelbase();

  KinematicEval<T> r;
  r.w3 = v * tan_d / wb;
  r.v2 = v * tan_d * (p.lr / wb);

  const auto f = surface.frame_in_piece<T>(piece, x[KinematicModel::kS], x[KinematicModel::kY]);
  const auto rates = geometry::pose_kinematics<T>(f, theta, v, r.v2, r.w3);
  const auto b = geometry::body_axes<T>(f, theta);
  const Vec3<double>& g = geometry::kGravity;
  const T g1 = g.x * b[0].x + g.y * b[0].y + g.z * b[0].z;
  const T g2 = g.x * b[1].x + g.y * b[1].y + g.z * b[1].z;

  const T v_dot = accel + g1 - (p.c_drag / p.mass) * v * v;
  r.dx[KinematicModel::kS] = rates.s_dot;
  r.dx[KinematicModel::kY] = rates.y_dot;
  r.dx[KinematicModel::kTheta] = rates.theta_dot;
  r.dx[KinematicModel::kV] = v_dot;
  r.dx[KinematicModel::kT] = T(1.0);

  r.n_net = geometry::net_normal_force<T>(f, rates.s_dot, rates.y_dot, p.mass);
  const T v2_dot = v_dot * tan_d * (p.lr / wb);
  const T a1 = v_dot - r.w3 * r.v2;
  const T a2 = v2_dot + r.w3 * v;
  r.f_req = {p.mass * (a1 - g1), p.mass * (a2 - g2)};
  const T cap = (p.c_cone * p.mu) * r.n_net;
  r.cone_slack = cap * cap - (r.f_req[0] * r.f_req[0] + r.f_req[1] * r.f_req[1]);
  return r;
}

/// Time derivative of the kinematic state. Throws on a degenerate metric.
std::array<double, KinematicModel::nx> kinematic_rhs(const std::array<double, KinematicModel::nx>& x,
                                                     const std::array<double, KinematicModel::nu>& u,
                                                     const geometry::TrackSurface& surface, const VehicleParams& p);

struct KinematicForceResiduals {
  double n_net = 0.0;
  double cone_slack = 0.0;
  std::array<double, 2> f_req{};
};

KinematicForceResiduals kinematic_force_residuals(const std::array<double, KinematicModel::nx>& x,
                                                  const std::array<double, KinematicModel::nu>& u,
                                                  const geometry::TrackSurface& surface, const VehicleParams& p);

}  // namespace raceopt::models
