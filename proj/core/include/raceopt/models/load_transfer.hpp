#pragma once

#include <array>

#include "raceopt/models/params.hpp"

namespace raceopt::models {

enum Wheel { kFrontLeft = 0, kFrontRight = 1, kRearLeft = 2, kRearRight = 3 };

/// Quasi-static split of the net normal force over the four tires given the
/// tire-force accelerations (a1, a2) in body axes. Longitudinal transfer moves
/// m*a1*h/(2L) per tire from front to rear; lateral transfer m*a2*h is shared
/// chi : (1-chi) between the front and rear axles and moves load to the right
/// side for a2 > 0. The four outputs sum to n_net exactly.
template <typename T>
std::array<T, 4> distribute_normal(const T& n_net, const T& a1, const T& a2, const VehicleParams& p) {
  const double wb = p.wheelbase();
  const T front = n_net * (p.lr / wb);
  const T rear = n_net - front;
  const T d_long = (p.mass * p.h / (2.0 * wb)) * a1;
  const T d_lat_f = (p.chi * p.mass * p.h / (2.0 * p.tf)) * a2;
  const T d_lat_r = ((1.0 - p.chi) * p.mass * p.h / (2.0 * p.tr)) * a2;
  const T half_f = 0.5 * front;
  const T half_r = 0.5 * rear;
  return {half_f - d_long - d_lat_f, half_f - d_long + d_lat_f, half_r + d_long - d_lat_r,
          half_r + d_long + d_lat_r};
}

}  // namespace raceopt::models
