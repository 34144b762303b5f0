#pragma once

#include <array>
#include <cmath>

#include "raceopt/common/vec3.hpp"
#include "raceopt/geometry/surface.hpp"

namespace raceopt::geometry {

/// World gravity used throughout (z up).
inline const Vec3<double> kGravity{0.0, 0.0, -9.81};
inline constexpr double kGravityMagnitude = 9.81;

template <typename T>
struct SurfaceRates {
  T s_dot{};
  T y_dot{};
  T theta_dot{};
};

/// Body axes in world frame for a vehicle with yaw theta relative to es.
template <typename T>
std::array<Vec3<T>, 2> body_axes(const FrameData<T>& f, const T& theta) {
  using std::cos;
  using std::sin;
  const T c = cos(theta);
  const T s = sin(theta);
  return {c * f.es + s * f.e2, c * f.e2 - s * f.es};
}

/// Parameter rates of a tangent-contact body with body-frame tangent velocity
/// (v1, v2) and yaw rate w3 about the normal.
template <typename T>
SurfaceRates<T> pose_kinematics(const FrameData<T>& f, const T& theta, const T& v1, const T& v2, const T& w3) {
  const auto b = body_axes(f, theta);
  const Vec3<T> vt = v1 * b[0] + v2 * b[1];
  const T rs = dot(f.xs, vt);
  const T ry = dot(f.xy, vt);
  const Sym2<T>& g = f.first_form;
  const T det = g.det();
  SurfaceRates<T> r;
  r.s_dot = (g.yy * rs - g.sy * ry) / det;
  r.y_dot = (g.ss * ry - g.sy * rs) / det;
  r.theta_dot = w3 - (f.wn[0] * r.s_dot + f.wn[1] * r.y_dot);
  return r;
}

/// Normal force the road must supply to keep a point mass in tangent contact.
template <typename T>
T net_normal_force(const FrameData<T>& f, const T& s_dot, const T& y_dot, double mass,
                   const Vec3<double>& gravity = kGravity) {
  const T g_n = gravity.x * f.n.x + gravity.y * f.n.y + gravity.z * f.n.z;
  return mass * (f.second_form.quad(s_dot, y_dot) - g_n);
}

/// Roll and pitch rates (body axes 1, 2) forced by keeping the chassis tangent
/// to the surface: w_t = n x dn/dt with dn/dt from the shape operator.
template <typename T>
std::array<T, 2> tangent_angular_velocity(const FrameData<T>& f, const T& s_dot, const T& y_dot, const T& theta) {
  const Sym2<T>& g = f.first_form;
  const Sym2<T>& h = f.second_form;
  // h * u_dot
  const T hs = h.ss * s_dot + h.sy * y_dot;
  const T hy = h.sy * s_dot + h.yy * y_dot;
  const T det = g.det();
  const T ws = (g.yy * hs - g.sy * hy) / det;
  const T wy = (g.ss * hy - g.sy * hs) / det;
  const Vec3<T> n_dot = -(ws * f.xs + wy * f.xy);
  const Vec3<T> w_t = cross(f.n, n_dot);
  const auto b = body_axes(f, theta);
  return {dot(w_t, b[0]), dot(w_t, b[1])};
}

/// Throws Error(degenerate_metric) when det I <= eps.
void check_metric(const FrameData<double>& f, double eps = 1e-12);

// Checked double-precision entry points.
SurfaceRates<double> pose_kinematics(const FrameData<double>& f, double theta, double v1, double v2, double w3);
std::array<double, 2> tangent_angular_velocity(const FrameData<double>& f, double s_dot, double y_dot,
                                               double theta);

}  // namespace raceopt::geometry
