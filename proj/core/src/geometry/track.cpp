#include "raceopt/geometry/track.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "raceopt/common/error.hpp"

namespace raceopt::geometry {

std::string_view to_string(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::flat_frenet: return "flat_frenet";
    case SurfaceKind::banked_frenet: return "banked_frenet";
    case SurfaceKind::arc_profile: return "arc_profile";
  }
  return "unknown";
}

SurfaceKind surface_kind_from_string(std::string_view name) {
  if (name == "flat_frenet") return SurfaceKind::flat_frenet;
  if (name == "banked_frenet") return SurfaceKind::banked_frenet;
  if (name == "arc_profile") return SurfaceKind::arc_profile;
  throw Error(ErrorCode::invalid_track, "unknown surface kind '" + std::string(name) + "'");
}

double TrackDefinition::total_length() const {
  double total = 0.0;
  for (const auto& seg : segments) total += seg.length;
  return total;
}

void validate(const TrackDefinition& def) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::invalid_track, what); };
  if (def.segments.empty()) fail("track has no segments");
  if (!(def.half_width > 0.0) || !std::isfinite(def.half_width)) fail("half_width must be positive");
  if (!std::isfinite(def.centerline_offset)) fail("centerline_offset must be finite");
  const double reach = def.half_width + std::abs(def.centerline_offset);
  for (std::size_t i = 0; i < def.segments.size(); ++i) {
    const auto& seg = def.segments[i];
    if (!(seg.length > 0.0) || !std::isfinite(seg.length))
      fail("segment " + std::to_string(i) + " length must be positive");
    if (!std::isfinite(seg.curvature)) fail("segment " + std::to_string(i) + " curvature must be finite");
    if (std::abs(seg.curvature) * reach >= 1.0)
      fail("segment " + std::to_string(i) + " violates |curvature|*(half_width+|offset|) < 1");
  }
  if (def.kind == SurfaceKind::arc_profile) {
    const double ymax = std::max(std::abs(def.y_min()), std::abs(def.y_max()));
    if (!(def.profile_radius > ymax))
      fail("arc_profile requires profile_radius greater than the largest |y| on the road");
  }
  if (def.kind == SurfaceKind::banked_frenet) {
    for (std::size_t i = 0; i < def.banking.size(); ++i) {
      const auto& k = def.banking[i];
      if (!std::isfinite(k.s) || !std::isfinite(k.angle)) fail("banking knot " + std::to_string(i) + " not finite");
      if (std::abs(k.angle) >= std::numbers::pi / 2) fail("banking angle must lie in (-pi/2, pi/2)");
      if (i > 0 && !(k.s > def.banking[i - 1].s)) fail("banking knots must have strictly increasing s");
    }
  }
}

double banking_angle(const TrackDefinition& def, double s) {
  const auto& kn = def.banking;
  if (def.kind != SurfaceKind::banked_frenet || kn.empty()) return 0.0;
  if (s <= kn.front().s) return kn.front().angle;
  if (s >= kn.back().s) return kn.back().angle;
  for (std::size_t i = 1; i < kn.size(); ++i) {
    if (s <= kn[i].s) {
      const double w = (s - kn[i - 1].s) / (kn[i].s - kn[i - 1].s);
      return kn[i - 1].angle + w * w * (3.0 - 2.0 * w) * (kn[i].angle - kn[i - 1].angle);
    }
  }
  return kn.back().angle;
}

TrackDefinition uturn_track() {
  TrackDefinition def;
  def.kind = SurfaceKind::arc_profile;
  const double radius = 60.0;
  def.segments = {{150.0, 0.0}, {radius * std::numbers::pi, 1.0 / radius}, {150.0, 0.0}};
  def.profile_radius = 120.0;
  def.half_width = 6.0;
  // Parameter axis on the inner (left) edge; the road extends outward to y = -12.
  def.centerline_offset = -6.0;
  return def;
}

TrackDefinition chicane_track() {
  TrackDefinition def;
  def.kind = SurfaceKind::banked_frenet;
  const double radius = 35.0;
  const double bend = radius * std::numbers::pi / 4.0;
  def.segments = {{30.0, 0.0}, {bend, 1.0 / radius}, {20.0, 0.0}, {bend, -1.0 / radius}, {40.0, 0.0}};
  const double b1 = 30.0;
  const double b1e = b1 + bend;
  const double b2 = b1e + 20.0;
  const double b2e = b2 + bend;
  const double bank = 0.35;
  // Outer edge raised in each bend: -y side for the left bend, +y for the right.
  def.banking = {{12.0, 0.0}, {b1, -bank}, {b1e, -bank}, {b2, bank}, {b2e, bank}, {b2e + 18.0, 0.0}};
  def.half_width = 4.5;
  def.centerline_offset = 0.0;
  return def;
}

TrackDefinition flat_straight_track(double length, double half_width) {
  TrackDefinition def;
  def.kind = SurfaceKind::flat_frenet;
  def.segments = {{length, 0.0}};
  def.half_width = half_width;
  return def;
}

}  // namespace raceopt::geometry
