#pragma once

#include <cmath>

namespace raceopt::models {

/// Magic-formula coefficients. The peak factor D = mu * N is applied at
/// evaluation time.
struct PacejkaParams {
  double bx = 16.0;
  double cx = 1.6;
  double ex = 0.1;
  double by = 12.0;
  double cy = 1.4;
  double ey = 0.0;
  double bx1 = 5.0;  // longitudinal force reduction with slip angle
  double by1 = 5.0;  // lateral force reduction with slip ratio
};

struct VehicleParams {
  double mass = 1500.0;
  double lf = 1.5;
  double lr = 1.5;
  double tf = 0.8;  // half track widths
  double tr = 0.8;
  double h = 0.4;   // CoM height
  double izz = 2250.0;
  double ixx = 500.0;
  double iyy = 2000.0;
  double mu = 1.0;
  PacejkaParams tire;
  double c_drag = 0.7;
  double chi = 0.55;  // front share of roll stiffness
  double a_max = 6.0;
  double a_min = -12.0;
  double delta_max = 0.5;
  double slip_ratio_max = 0.15;
  double n_wheel_min = 0.0;
  double n_wheel_max = 1.5 * 1500.0 * 9.81 / 4.0 * 2.0;
  double n_net_min = 0.0;
  double n_net_max = 4.0 * 1.5 * 1500.0 * 9.81 / 4.0 * 2.0;
  double c_cone = 1.0 / std::sqrt(2.0);
  double length = 3.6;  // footprint
  double width = 1.7;

  double wheelbase() const { return lf + lr; }
  /// Radius of the circle circumscribing the rectangular footprint.
  double footprint_radius() const { return std::hypot(0.5 * length, 0.5 * width); }
};

/// Throws Error(invalid_argument) naming the violated parameter invariant.
void validate(const VehicleParams& p);
void validate(const PacejkaParams& p);

/// Slip-angle denominator smoothing: |v1| -> sqrt(v1^2 + eps^2).
inline constexpr double kSlipSmoothing = 0.1;

}  // namespace raceopt::models
