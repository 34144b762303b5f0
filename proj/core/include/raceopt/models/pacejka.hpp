#pragma once

#include <cmath>

#include "raceopt/models/params.hpp"

namespace raceopt::models {

template <typename T>
struct TireForce {
  T fx{};
  T fy{};
};

/// Combined-slip magic formula without argument checks (usable with AD types).
template <typename T>
TireForce<T> pacejka_combined_unchecked(const T& kappa, const T& alpha, const T& normal, const PacejkaParams& p,
                                        double mu) {
  using std::atan;
  using std::sin;
  using std::sqrt;
  const T d = mu * normal;
  const T bk = p.bx * kappa;
  const T fx0 = d * sin(p.cx * atan(bk - p.ex * (bk - atan(bk))));
  const T ba = p.by * alpha;
  const T fy0 = d * sin(p.cy * atan(ba - p.ey * (ba - atan(ba))));
  // cos(atan(x)) == 1 / sqrt(1 + x^2)
  const T wx = T(1.0) / sqrt(T(1.0) + (p.bx1 * alpha) * (p.bx1 * alpha));
  const T wy = T(1.0) / sqrt(T(1.0) + (p.by1 * kappa) * (p.by1 * kappa));
  return {fx0 * wx, fy0 * wy};
}

/// Throws Error(negative_normal_force) for N < 0. N = 0 gives zero force.
TireForce<double> pacejka_combined(double kappa, double alpha, double normal, const PacejkaParams& p, double mu);

}  // namespace raceopt::models
