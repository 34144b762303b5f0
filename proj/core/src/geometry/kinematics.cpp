#include "raceopt/geometry/kinematics.hpp"

#include <string>

#include "raceopt/common/error.hpp"

namespace raceopt::geometry {

void check_metric(const FrameData<double>& f, double eps) {
  const double det = f.first_form.det();
  if (!(det > eps)) throw Error(ErrorCode::degenerate_metric, "det I = " + std::to_string(det));
}

SurfaceRates<double> pose_kinematics(const FrameData<double>& f, double theta, double v1, double v2, double w3) {
  check_metric(f);
  return pose_kinematics<double>(f, theta, v1, v2, w3);
}

std::array<double, 2> tangent_angular_velocity(const FrameData<double>& f, double s_dot, double y_dot,
                                               double theta) {
  check_metric(f);
  return tangent_angular_velocity<double>(f, s_dot, y_dot, theta);
}

}  // namespace raceopt::geometry
