#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance suite.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "raceopt/geometry/surface.hpp"
#include "raceopt/models/kinematic.hpp"
#include "raceopt/models/load_transfer.hpp"
#include "raceopt/models/pacejka.hpp"
#include "raceopt/models/two_track.hpp"
#include "raceopt/nlp/dual.hpp"
#include "tracks.hpp"

namespace raceopt::test_support {

inline double dot3(const Vec3<double>& a, const Vec3<double>& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

/// Worst relative error of the exact first and second fundamental forms at q
/// against central differences: I from the position, II from the exact
/// tangents projected on the normal.
inline double forms_fd_error(const geometry::TrackSurface& s, const geometry::SurfaceCoord& q, double h = 1e-5) {
  auto pos = [&](double a, double b) { return s.frame({a, b}).p; };
  const auto f = s.frame(q);
  const auto xs = (pos(q.s + h, q.y) - pos(q.s - h, q.y)) / (2 * h);
  const auto xy = (pos(q.s, q.y + h) - pos(q.s, q.y - h)) / (2 * h);
  const auto xss = (s.frame({q.s + h, q.y}).xs - s.frame({q.s - h, q.y}).xs) / (2 * h);
  const auto xsy = (s.frame({q.s, q.y + h}).xs - s.frame({q.s, q.y - h}).xs) / (2 * h);
  const auto xyy = (s.frame({q.s, q.y + h}).xy - s.frame({q.s, q.y - h}).xy) / (2 * h);
  const double first[3] = {dot3(xs, xs), dot3(xs, xy), dot3(xy, xy)};
  const double exact1[3] = {f.first_form.ss, f.first_form.sy, f.first_form.yy};
  const double second[3] = {dot3(xss, f.n), dot3(xsy, f.n), dot3(xyy, f.n)};
  const double exact2[3] = {f.second_form.ss, f.second_form.sy, f.second_form.yy};
  const double scale1 = std::abs(exact1[0]) + std::abs(exact1[2]);
  const double scale2 = std::max(std::abs(exact2[0]) + std::abs(exact2[1]) + std::abs(exact2[2]), 1e-3);
  double worst = 0.0;
  for (int c = 0; c < 3; ++c) {
    worst = std::max(worst, std::abs(first[c] - exact1[c]) / scale1);
    worst = std::max(worst, std::abs(second[c] - exact2[c]) / scale2);
  }
  return worst;
}

/// Planar kinematic bicycle in Frenet coordinates about a centreline of
/// constant curvature kappa.
inline std::array<double, 4> planar_kinematic(const std::array<double, 5>& x, const std::array<double, 2>& u,
                                              const models::VehicleParams& p, double kappa) {
  const double L = p.wheelbase(), th = x[2], v = x[3];
  const double v2 = v * std::tan(u[1]) * p.lr / L;
  const double w3 = v * std::tan(u[1]) / L;
  const double sd = (v * std::cos(th) - v2 * std::sin(th)) / (1.0 - kappa * x[1]);
  const double yd = v * std::sin(th) + v2 * std::cos(th);
  return {sd, yd, w3 - kappa * sd, u[0] - p.c_drag / p.mass * v * v};
}

struct PlanarTwoTrack {
  std::array<double, 6> dx{};  // s, y, theta, v1, v2, w3
  std::array<double, 4> normal{};
};

/// Planar two-track: slip angles, one load-transfer sweep from the static
/// split, summed tire forces and yaw moment.
inline PlanarTwoTrack planar_two_track(const std::array<double, 7>& x, const std::array<double, 3>& u,
                                       const models::VehicleParams& p, double kappa) {
  const double m = p.mass, n_net = m * geometry::kGravityMagnitude;
  const double px[4] = {p.lf, p.lf, -p.lr, -p.lr};
  const double py[4] = {p.tf, -p.tf, p.tr, -p.tr};
  const double th = x[2], v1 = x[3], v2 = x[4], w3 = x[5], delta = u[0];
  double alpha[4];
  for (int w = 0; w < 4; ++w) {
    const double vx = v1 - w3 * py[w], vy = v2 + w3 * px[w];
    alpha[w] = -std::atan(vy / std::sqrt(vx * vx + models::kSlipSmoothing * models::kSlipSmoothing)) +
               (w < 2 ? delta : 0.0);
  }
  auto forces = [&](const std::array<double, 4>& n, double& f1, double& f2) {
    double mz = 0.0;
    f1 = f2 = 0.0;
    for (int w = 0; w < 4; ++w) {
      const auto t = models::pacejka_combined(w < 2 ? u[1] : u[2], alpha[w], n[w], p.tire, p.mu);
      const double c = w < 2 ? std::cos(delta) : 1.0, s = w < 2 ? std::sin(delta) : 0.0;
      const double fx = t.fx * c - t.fy * s, fy = t.fx * s + t.fy * c;
      f1 += fx;
      f2 += fy;
      mz += px[w] * fy - py[w] * fx;
    }
    return mz;
  };
  const double share_f = p.lr / p.wheelbase();
  const std::array<double, 4> n0 = {0.5 * share_f * n_net, 0.5 * share_f * n_net, 0.5 * (1 - share_f) * n_net,
                                    0.5 * (1 - share_f) * n_net};
  double f1, f2;
  forces(n0, f1, f2);
  PlanarTwoTrack r;
  r.normal = models::distribute_normal(n_net, f1 / m, f2 / m, p);
  const double mz = forces(r.normal, f1, f2);
  const double sd = (v1 * std::cos(th) - v2 * std::sin(th)) / (1.0 - kappa * x[1]);
  r.dx = {sd,
          v1 * std::sin(th) + v2 * std::cos(th),
          w3 - kappa * sd,
          w3 * v2 + (f1 - p.c_drag * v1 * v1) / m,
          -w3 * v1 + f2 / m,
          mz / p.izz};
  return r;
}

/// Minimum time over a straight from speed v0 at full throttle against drag,
/// v' = A - k v^2: v(x) in closed form, t = int dx / v by Simpson's rule.
inline double straight_time(double length, double v0, double A, double k) {
  const double V2 = A / k;
  auto v = [&](double x) { return std::sqrt(V2 - (V2 - v0 * v0) * std::exp(-2.0 * k * x)); };
  const int n = 20000;
  const double h = length / n;
  double sum = 1.0 / v(0.0) + 1.0 / v(length);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) / v(i * h);
  return sum * h / 3.0;
}

/// Largest |AD - FD| / max(1, |FD|) over the Jacobian of eval(surface, piece,
/// x, u) -> std::array<T, nx> with respect to (x, u).
template <class Model, class Eval>
double model_jacobian_error(const geometry::TrackSurface& surf, const std::array<double, Model::nx>& x,
                            const std::array<double, Model::nu>& u, const Eval& eval) {
  constexpr int nx = Model::nx, nu = Model::nu, n = nx + nu;
  using J = ad::Jet<n>;
  std::array<J, nx> xd;
  std::array<J, nu> ud;
  for (int i = 0; i < nx; ++i) xd[i] = J::variable(x[i], i);
  for (int i = 0; i < nu; ++i) ud[i] = J::variable(u[i], nx + i);
  const int piece = surf.piece_index(x[0]);
  const auto jac = eval.template operator()<J>(surf, piece, xd.data(), ud.data());
  double worst = 0.0;
  for (int c = 0; c < n; ++c) {
    const double h = 1e-6 * std::max(1.0, std::abs(c < nx ? x[c] : u[c - nx]));
    auto xp = x, xm = x;
    auto up = u, um = u;
    if (c < nx) {
      xp[c] += h;
      xm[c] -= h;
    } else {
      up[c - nx] += h;
      um[c - nx] -= h;
    }
    const auto fp = eval.template operator()<double>(surf, piece, xp.data(), up.data());
    const auto fm = eval.template operator()<double>(surf, piece, xm.data(), um.data());
    for (int r = 0; r < nx; ++r) {
      const double fd = (fp[r] - fm[r]) / (2.0 * h);
      worst = std::max(worst, std::abs(jac[r].d[c] - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  return worst;
}

using KinState = std::array<double, models::KinematicModel::nx>;
using KinInput = std::array<double, models::KinematicModel::nu>;
using TwoState = std::array<double, models::TwoTrackModel::nx>;
using TwoInput = std::array<double, models::TwoTrackModel::nu>;

// Random states and inputs inside the ranges the solver visits.
inline KinState random_kinematic_state(const geometry::TrackSurface& surf, std::mt19937& rng) {
  const auto q = random_on_road(surf, rng, 1.0);
  std::uniform_real_distribution<double> th(-0.3, 0.3), v(5.0, 40.0), t(0.0, 10.0);
  return {q.s, q.y, th(rng), v(rng), t(rng)};
}

inline KinInput random_kinematic_input(std::mt19937& rng) {
  std::uniform_real_distribution<double> a(-5.0, 5.0), d(-0.2, 0.2);
  return {a(rng), d(rng)};
}

inline TwoState random_two_track_state(const geometry::TrackSurface& surf, std::mt19937& rng) {
  const auto q = random_on_road(surf, rng, 1.0);
  std::uniform_real_distribution<double> th(-0.3, 0.3), v1(5.0, 40.0), v2(-1.0, 1.0), w3(-0.5, 0.5), t(0.0, 10.0);
  return {q.s, q.y, th(rng), v1(rng), v2(rng), w3(rng), t(rng)};
}

inline TwoInput random_two_track_input(std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-0.1, 0.1), k(-0.1, 0.1);
  return {d(rng), k(rng), k(rng)};
}

struct KinematicRhs {
  models::VehicleParams p;
  template <class T>
  std::array<T, models::KinematicModel::nx> operator()(const geometry::TrackSurface& s, int piece, const T* x,
                                                       const T* u) const {
    return models::evaluate_kinematic<T>(s, piece, x, u, p).dx;
  }
};

struct TwoTrackRhs {
  models::VehicleParams p;
  template <class T>
  std::array<T, models::TwoTrackModel::nx> operator()(const geometry::TrackSurface& s, int piece, const T* x,
                                                      const T* u) const {
    return models::evaluate_two_track<T>(s, piece, x, u, p).dx;
  }
};

}  // namespace raceopt::test_support
