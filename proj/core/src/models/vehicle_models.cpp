#include <string>

#include "raceopt/common/error.hpp"
#include "raceopt/models/kinematic.hpp"
#include "raceopt/models/two_track.hpp"

namespace raceopt::models {

namespace {

// Domain and metric checks shared by the double-precision entry points.
int checked_piece(const geometry::TrackSurface& surface, double s, double y) {
  geometry::check_metric(surface.frame({s, y}));
  return surface.piece_index(s);
}

}  // namespace

std::array<double, KinematicModel::nx> kinematic_rhs(const std::array<double, KinematicModel::nx>& x,
                                                     const std::array<double, KinematicModel::nu>& u,
                                                     const geometry::TrackSurface& surface, const VehicleParams& p) {
  if (!(x[KinematicModel::kV] > 0.0)) throw Error(ErrorCode::invalid_argument, "kinematic model requires v > 0");
  const int piece = checked_piece(surface, x[KinematicModel::kS], x[KinematicModel::kY]);
  return evaluate_kinematic<double>(surface, piece, x.data(), u.data(), p).dx;
}

KinematicForceResiduals kinematic_force_residuals(const std::array<double, KinematicModel::nx>& x,
                                                  const std::array<double, KinematicModel::nu>& u,
                                                  const geometry::TrackSurface& surface, const VehicleParams& p) {
  const int piece = checked_piece(surface, x[KinematicModel::kS], x[KinematicModel::kY]);
  const auto e = evaluate_kinematic<double>(surface, piece, x.data(), u.data(), p);
  return {e.n_net, e.cone_slack, e.f_req};
}

std::array<double, TwoTrackModel::nx> two_track_rhs(const std::array<double, TwoTrackModel::nx>& x,
                                                    const std::array<double, TwoTrackModel::nu>& u,
                                                    const geometry::TrackSurface& surface, const VehicleParams& p) {
  const int piece = checked_piece(surface, x[TwoTrackModel::kS], x[TwoTrackModel::kY]);
  const auto e = evaluate_two_track<double>(surface, piece, x.data(), u.data(), p);
  bool any_load = false;
  for (double n : e.normal) any_load = any_load || n > 0.0;
  if (!any_load) throw Error(ErrorCode::zero_normal_force, "no tire carries load");
  return e.dx;
}

std::array<TireLoadResidual, 4> two_track_constraint_residuals(const std::array<double, TwoTrackModel::nx>& x,
                                                               const std::array<double, TwoTrackModel::nu>& u,
                                                               const geometry::TrackSurface& surface,
                                                               const VehicleParams& p) {
  const int piece = checked_piece(surface, x[TwoTrackModel::kS], x[TwoTrackModel::kY]);
  const auto e = evaluate_two_track<double>(surface, piece, x.data(), u.data(), p);
  std::array<TireLoadResidual, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = {e.normal[i], p.n_wheel_max - e.normal[i]};
  return out;
}

}  // namespace raceopt::models
