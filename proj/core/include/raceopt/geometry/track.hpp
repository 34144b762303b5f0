#pragma once

#include <string_view>
#include <vector>

namespace raceopt::geometry {

enum class SurfaceKind { flat_frenet, banked_frenet, arc_profile };

std::string_view to_string(SurfaceKind kind);
SurfaceKind surface_kind_from_string(std::string_view name);

/// Constant-curvature centerline piece. Positive curvature turns left, toward +y.
struct Segment {
  double length = 0.0;
  double curvature = 0.0;
};

/// Knot of the banking profile. Between knots the angle follows a cubic ramp
/// with zero slope at both knots, so the road normal is continuous. Positive
/// angles raise the +y edge.
struct BankingKnot {
  double s = 0.0;
  double angle = 0.0;
};

/// Road description. The lateral coordinate spans
/// [centerline_offset - half_width, centerline_offset + half_width], so an
/// offset of -half_width puts the parameter axis on the left (+y) edge.
struct TrackDefinition {
  SurfaceKind kind = SurfaceKind::flat_frenet;
  std::vector<Segment> segments;
  std::vector<BankingKnot> banking;  // banked_frenet only; held constant outside the knots
  double profile_radius = 0.0;       // arc_profile only
  double half_width = 6.0;
  double centerline_offset = 0.0;

  double total_length() const;
  double y_min() const { return centerline_offset - half_width; }
  double y_max() const { return centerline_offset + half_width; }
};

/// Throws Error(invalid_track) naming the first violated invariant.
void validate(const TrackDefinition& def);

/// Banking angle at s (cubic ramps between knots, constant extrapolation).
double banking_angle(const TrackDefinition& def, double s);

// Shipped track layouts.
TrackDefinition uturn_track();
TrackDefinition chicane_track();
TrackDefinition flat_straight_track(double length, double half_width);

}  // namespace raceopt::geometry
