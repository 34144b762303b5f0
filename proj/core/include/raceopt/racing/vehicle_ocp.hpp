#pragma once

#include <memory>
#include <vector>

#include "raceopt/geometry/surface.hpp"
#include "raceopt/models/kinematic.hpp"
#include "raceopt/models/two_track.hpp"

namespace raceopt::racing {

/// Kinematic bicycle in the arc-length domain. Path outputs:
/// s_dot, n_net / (m g), cone slack / (m g)^2.
struct KinematicOcp {
  static constexpr int nx = models::KinematicModel::nx;
  static constexpr int nu = models::KinematicModel::nu;
  static constexpr int np = 3;

  std::shared_ptr<const geometry::TrackSurface> surface;
  models::VehicleParams params;
  std::vector<int> pieces;  // surface piece per interval

  template <class T>
  void spatial(int interval, const T* x, const T* u, T* f, T* path) const {
    const auto ev = models::evaluate_kinematic<T>(*surface, pieces[interval], x, u, params);
    const T& sd = ev.dx[models::KinematicModel::kS];
    for (int i = 0; i < nx; ++i) f[i] = ev.dx[i] / sd;
    const double w = params.mass * geometry::kGravityMagnitude;
    path[0] = sd;
    path[1] = ev.n_net / w;
    path[2] = ev.cone_slack / (w * w);
  }
};

/// Two-track model in the arc-length domain. Path outputs: s_dot and the four
/// tire loads / (m g).
struct TwoTrackOcp {
  static constexpr int nx = models::TwoTrackModel::nx;
  static constexpr int nu = models::TwoTrackModel::nu;
  static constexpr int np = 5;

  std::shared_ptr<const geometry::TrackSurface> surface;
  models::VehicleParams params;
  std::vector<int> pieces;

  template <class T>
  void spatial(int interval, const T* x, const T* u, T* f, T* path) const {
    const auto ev = models::evaluate_two_track<T>(*surface, pieces[interval], x, u, params);
    const T& sd = ev.dx[models::TwoTrackModel::kS];
    for (int i = 0; i < nx; ++i) f[i] = ev.dx[i] / sd;
    const double w = params.mass * geometry::kGravityMagnitude;
    path[0] = sd;
    for (int i = 0; i < 4; ++i) path[1 + i] = ev.normal[i] / w;
  }
};

}  // namespace raceopt::racing
