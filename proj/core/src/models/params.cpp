#include "raceopt/models/params.hpp"

#include <string>

#include "raceopt/common/error.hpp"

namespace raceopt::models {

namespace {
void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::invalid_argument, what);
}
}  // namespace

void validate(const PacejkaParams& p) {
  require(p.bx > 0 && p.by > 0, "Pacejka B coefficients must be positive");
  require(p.cx > 0 && p.cy > 0, "Pacejka C coefficients must be positive");
  require(p.cx < 2.5 && p.cy < 2.5, "Pacejka C coefficients must be below 2.5");
  require(p.ex < 1 && p.ey < 1, "Pacejka E coefficients must be below 1");
  require(p.bx1 >= 0 && p.by1 >= 0, "combined-slip weighting coefficients must be non-negative");
}

void validate(const VehicleParams& p) {
  require(p.mass > 0, "mass must be positive");
  require(p.izz > 0 && p.ixx > 0 && p.iyy > 0, "inertias must be positive");
  require(p.lf > 0 && p.lr > 0, "axle distances must be positive");
  require(p.tf > 0 && p.tr > 0, "half track widths must be positive");
  require(p.h > 0, "CoM height must be positive");
  require(p.mu > 0 && p.mu <= 3, "mu must lie in (0, 3]");
  require(p.chi >= 0 && p.chi <= 1, "chi must lie in [0, 1]");
  require(p.c_cone > 0 && p.c_cone <= 1, "c_cone must lie in (0, 1]");
  require(p.c_drag >= 0, "c_drag must be non-negative");
  require(p.a_min < p.a_max, "a_min must be below a_max");
  require(p.delta_max > 0, "delta_max must be positive");
  require(p.slip_ratio_max > 0, "slip_ratio_max must be positive");
  require(p.n_wheel_min < p.n_wheel_max, "n_wheel_min must be below n_wheel_max");
  require(p.n_net_min < p.n_net_max, "n_net_min must be below n_net_max");
  require(p.length > 0 && p.width > 0, "footprint must be positive");
  validate(p.tire);
}

}  // namespace raceopt::models
