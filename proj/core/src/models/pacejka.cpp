#include "raceopt/models/pacejka.hpp"

#include <string>

#include "raceopt/common/error.hpp"

namespace raceopt::models {

TireForce<double> pacejka_combined(double kappa, double alpha, double normal, const PacejkaParams& p, double mu) {
  if (normal < 0.0) throw Error(ErrorCode::negative_normal_force, "N = " + std::to_string(normal));
  if (normal == 0.0) return {0.0, 0.0};
  return pacejka_combined_unchecked<double>(kappa, alpha, normal, p, mu);
}

}  // namespace raceopt::models
