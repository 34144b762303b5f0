#include "raceopt/geometry/surface.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "raceopt/common/error.hpp"

namespace raceopt::geometry {

TrackSurface::TrackSurface(TrackDefinition def) : def_(std::move(def)) {
  validate(def_);
  length_ = def_.total_length();

  std::vector<double> knots;
  if (def_.kind == SurfaceKind::banked_frenet) {
    for (const auto& k : def_.banking) knots.push_back(k.s);
  }

  double s = 0.0;
  double psi = 0.0;
  Vec3<double> c{0.0, 0.0, 0.0};
  for (const auto& seg : def_.segments) {
    const double s_end = s + seg.length;
    std::vector<double> cuts{s};
    for (double kn : knots) {
      if (kn > s + 1e-9 && kn < s_end - 1e-9) cuts.push_back(kn);
    }
    cuts.push_back(s_end);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      Piece pc;
      pc.s0 = cuts[i];
      pc.s1 = cuts[i + 1];
      pc.kappa = seg.curvature;
      const double ls = pc.s0 - s;
      pc.psi0 = psi + seg.curvature * ls;
      if (seg.curvature == 0.0) {
        pc.c0 = {c.x + ls * std::cos(psi), c.y + ls * std::sin(psi), 0.0};
      } else {
        pc.c0 = {c.x + (std::sin(pc.psi0) - std::sin(psi)) / seg.curvature,
                 c.y + (std::cos(psi) - std::cos(pc.psi0)) / seg.curvature, 0.0};
      }
      const auto& kn = def_.banking;
      if (def_.kind == SurfaceKind::banked_frenet && !kn.empty()) {
        const double mid = 0.5 * (pc.s0 + pc.s1);
        pc.bank_b0 = banking_angle(def_, mid);
        for (std::size_t j = 1; j < kn.size(); ++j)
          if (mid > kn[j - 1].s && mid < kn[j].s) {
            pc.bank_s0 = kn[j - 1].s;
            pc.bank_len = kn[j].s - kn[j - 1].s;
            pc.bank_b0 = kn[j - 1].angle;
            pc.bank_delta = kn[j].angle - kn[j - 1].angle;
          }
      }
      pieces_.push_back(pc);
    }
    // Advance the centerline to the end of the segment.
    const double psi_end = psi + seg.curvature * seg.length;
    if (seg.curvature == 0.0) {
      c = {c.x + seg.length * std::cos(psi), c.y + seg.length * std::sin(psi), 0.0};
    } else {
      c = {c.x + (std::sin(psi_end) - std::sin(psi)) / seg.curvature,
           c.y + (std::cos(psi) - std::cos(psi_end)) / seg.curvature, 0.0};
    }
    psi = psi_end;
    s = s_end;
  }
}

int TrackSurface::piece_index(double s) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), s,
                             [](double value, const Piece& p) { return value < p.s0; });
  int k = static_cast<int>(it - pieces_.begin()) - 1;
  return std::clamp(k, 0, static_cast<int>(pieces_.size()) - 1);
}

std::vector<double> TrackSurface::joints() const {
  std::vector<double> out;
  for (std::size_t i = 1; i < pieces_.size(); ++i) out.push_back(pieces_[i].s0);
  return out;
}

FrameData<double> TrackSurface::frame(SurfaceCoord q) const {
  const double slack = 1e-12 * std::max(1.0, length_);
  if (!std::isfinite(q.s) || q.s < -slack || q.s > length_ + slack) {
    throw Error(ErrorCode::out_of_domain,
                "s = " + std::to_string(q.s) + " outside [0, " + std::to_string(length_) + "]");
  }
  if (!std::isfinite(q.y)) throw Error(ErrorCode::out_of_domain, "y is not finite");
  return frame_in_piece<double>(piece_index(q.s), q.s, q.y);
}

std::vector<Vec3<double>> world_position_path(const ParametricSurface& surface,
                                              const std::vector<SurfaceCoord>& samples) {
  std::vector<Vec3<double>> out;
  out.reserve(samples.size());
  for (const auto& q : samples) out.push_back(surface.frame(q).p);
  return out;
}

TriangleMesh build_mesh(const TrackSurface& surface, int ns, int ny) {
  if (ns < 1 || ny < 1) throw Error(ErrorCode::invalid_argument, "mesh resolution must be at least 1x1");
  std::vector<double> srows;
  const double len = surface.length();
  for (int i = 0; i <= ns; ++i) srows.push_back(len * i / ns);
  for (double j : surface.joints()) srows.push_back(j);
  std::sort(srows.begin(), srows.end());
  srows.erase(std::unique(srows.begin(), srows.end(), [](double a, double b) { return std::abs(a - b) < 1e-9; }),
              srows.end());

  TriangleMesh mesh;
  const double y0 = surface.y_min();
  const double y1 = surface.y_max();
  for (double s : srows) {
    for (int j = 0; j <= ny; ++j) {
      const SurfaceCoord q{s, y0 + (y1 - y0) * j / ny};
      mesh.vertices.push_back(surface.frame(q).p);
      mesh.coords.push_back(q);
    }
  }
  const int cols = ny + 1;
  for (int i = 0; i + 1 < static_cast<int>(srows.size()); ++i) {
    for (int j = 0; j < ny; ++j) {
      const int a = i * cols + j;
      const int b = a + 1;
      const int c = a + cols;
      const int d = c + 1;
      mesh.faces.push_back({a, c, b});
      mesh.faces.push_back({b, c, d});
    }
  }
  return mesh;
}

}  // namespace raceopt::geometry
