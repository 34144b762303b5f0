#pragma once

#include <array>
#include <cmath>

#include "raceopt/geometry/kinematics.hpp"
#include "raceopt/geometry/surface.hpp"
#include "raceopt/models/load_transfer.hpp"
#include "raceopt/models/pacejka.hpp"
#include "raceopt/models/params.hpp"

namespace raceopt::models {

/// Two-track model with quasi-static load transfer and combined-slip tires.
/// State (s, y, theta_s, v1, v2, w3, t), input (delta, kappa_f, kappa_r).
struct TwoTrackModel {
  static constexpr int nx = 7;
  static constexpr int nu = 3;
  enum StateIndex { kS = 0, kY = 1, kTheta = 2, kV1 = 3, kV2 = 4, kW3 = 5, kT = 6 };
  enum InputIndex { kSteer = 0, kSlipFront = 1, kSlipRear = 2 };
};

template <typename T>
struct TwoTrackEval {
  std::array<T, TwoTrackModel::nx> dx{};
  std::array<T, 4> normal{};          // per tire, Wheel order
  std::array<TireForce<T>, 4> body{};  // per-tire force in body axes
  std::array<T, 4> slip_angle{};
  T n_net{};
  T g1{}, g2{};         // tangential gravity, body axes
  T w1{}, w2{};         // tangent-contact roll/pitch rates
  T force1{}, force2{};  // summed tire force, body axes
  T moment{};            // summed tire yaw moment
};

/// Tire contact positions (x forward, y left) in body axes, Wheel order.
inline std::array<std::array<double, 2>, 4> wheel_positions(const VehicleParams& p) {
  return {{{p.lf, p.tf}, {p.lf, -p.tf}, {-p.lr, p.tr}, {-p.lr, -p.tr}}};
}

template <typename T>
TwoTrackEval<T> evaluate_two_track(const geometry::TrackSurface& surface, int piece, const T* x, const T* u,
                                   const VehicleParams& p) {
  using std::atan;
  using std::cos;
  using std::sin;
  using std::sqrt;
  const T& theta = x[TwoTrackModel::kTheta];
  const T& v1 = x[TwoTrackModel::kV1];
  const T& v2 = x[TwoTrackModel::kV2];
  const T& w3 = x[TwoTrackModel::kW3];
  const T& delta = u[TwoTrackModel::kSteer];

  TwoTrackEval<T> r;
  const auto f = surface.frame_in_piece<T>(piece, x[TwoTrackModel::kS], x[TwoTrackModel::kY]);
  const auto rates = geometry::pose_kinematics<T>(f, theta, v1, v2, w3);
  const auto b = geometry::body_axes<T>(f, theta);
  const Vec3<double>& g = geometry::kGravity;
  r.g1 = g.x * b[0].x + g.y * b[0].y + g.z * b[0].z;
  r.g2 = g.x * b[1].x + g.y * b[1].y + g.z * b[1].z;
  r.n_net = geometry::net_normal_force<T>(f, rates.s_dot, rates.y_dot, p.mass);
  const auto tilt = geometry::tangent_angular_velocity<T>(f, rates.s_dot, rates.y_dot, theta);
  r.w1 = tilt[0];
  r.w2 = tilt[1];

  const auto pos = wheel_positions(p);
  const double eps2 = kSlipSmoothing * kSlipSmoothing;
  std::array<T, 4> slip_ratio{u[TwoTrackModel::kSlipFront], u[TwoTrackModel::kSlipFront],
                              u[TwoTrackModel::kSlipRear], u[TwoTrackModel::kSlipRear]};
  for (int i = 0; i < 4; ++i) {
    const T vx = v1 - w3 * pos[i][1];
    const T vy = v2 + w3 * pos[i][0];
    const T a = -atan(vy / sqrt(vx * vx + eps2));
    r.slip_angle[i] = (i < 2) ? delta + a : a;
  }
  const T cd = cos(delta);
  const T sd = sin(delta);

  auto tire_forces = [&](const std::array<T, 4>& normal, std::array<TireForce<T>, 4>& out, T& f1, T& f2) {
    f1 = T(0.0);
    f2 = T(0.0);
    for (int i = 0; i < 4; ++i) {
      const auto w = pacejka_combined_unchecked<T>(slip_ratio[i], r.slip_angle[i], normal[i], p.tire, p.mu);
      if (i < 2) {
        out[i] = {w.fx * cd - w.fy * sd, w.fx * sd + w.fy * cd};
      } else {
        out[i] = w;
      }
      f1 += out[i].fx;
      f2 += out[i].fy;
    }
  };

  // One fixed-point sweep of the load-transfer loop: forces at the static
  // split give the accelerations that set the final split.
  const auto n_static = distribute_normal<T>(r.n_net, T(0.0), T(0.0), p);
  std::array<TireForce<T>, 4> f_static;
  T f1_static, f2_static;
  tire_forces(n_static, f_static, f1_static, f2_static);
  r.normal = distribute_normal<T>(r.n_net, f1_static / p.mass, f2_static / p.mass, p);
  tire_forces(r.normal, r.body, r.force1, r.force2);

  r.moment = T(0.0);
  for (int i = 0; i < 4; ++i) r.moment += pos[i][0] * r.body[i].fy - pos[i][1] * r.body[i].fx;

  r.dx[TwoTrackModel::kS] = rates.s_dot;
  r.dx[TwoTrackModel::kY] = rates.y_dot;
  r.dx[TwoTrackModel::kTheta] = rates.theta_dot;
  r.dx[TwoTrackModel::kV1] = w3 * v2 + (r.force1 - p.c_drag * v1 * v1) / p.mass + r.g1;
  r.dx[TwoTrackModel::kV2] = -w3 * v1 + r.force2 / p.mass + r.g2;
  r.dx[TwoTrackModel::kW3] = (r.moment - (p.iyy - p.ixx) * r.w1 * r.w2) / p.izz;
  r.dx[TwoTrackModel::kT] = T(1.0);
  return r;
}

/// Time derivative of the two-track state. Throws on a degenerate metric or
/// when every tire has zero normal force.
std::array<double, TwoTrackModel::nx> two_track_rhs(const std::array<double, TwoTrackModel::nx>& x,
                                                    const std::array<double, TwoTrackModel::nu>& u,
                                                    const geometry::TrackSurface& surface, const VehicleParams& p);

struct TireLoadResidual {
  double normal = 0.0;
  double cap_slack = 0.0;  // n_wheel_max - normal
};

std::array<TireLoadResidual, 4> two_track_constraint_residuals(const std::array<double, TwoTrackModel::nx>& x,
                                                               const std::array<double, TwoTrackModel::nu>& u,
                                                               const geometry::TrackSurface& surface,
                                                               const VehicleParams& p);

}  // namespace raceopt::models
