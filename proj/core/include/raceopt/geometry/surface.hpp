#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "raceopt/common/vec3.hpp"
#include "raceopt/geometry/track.hpp"

namespace raceopt::geometry {

struct SurfaceCoord {
  double s = 0.0;
  double y = 0.0;
};

/// Symmetric 2x2 tensor in (s, y) components.
template <typename T>
struct Sym2 {
  T ss{}, sy{}, yy{};

  T det() const { return ss * yy - sy * sy; }
  T trace() const { return ss + yy; }
  /// Quadratic form a^T M a.
  T quad(const T& as, const T& ay) const { return ss * as * as + T(2.0) * sy * as * ay + yy * ay * ay; }
};

/// Differential geometry at one surface point.
template <typename T>
struct FrameData {
  Vec3<T> p;   // position
  Vec3<T> xs;  // dp/ds
  Vec3<T> xy;  // dp/dy
  Vec3<T> n;   // unit normal, road toward vehicle
  Vec3<T> es;  // xs / |xs|
  Vec3<T> e2;  // n x es
  Sym2<T> first_form;
  Sym2<T> second_form;
  // Yaw rate of (es, e2) about n is wn[0]*s_dot + wn[1]*y_dot.
  std::array<T, 2> wn{};
};

/// Road surface interface for double-precision queries.
class ParametricSurface {
 public:
  virtual ~ParametricSurface() = default;

  virtual double length() const = 0;
  virtual double y_min() const = 0;
  virtual double y_max() const = 0;
  /// Throws Error(out_of_domain) when s lies outside [0, length()].
  virtual FrameData<double> frame(SurfaceCoord q) const = 0;
};

/// p(s, y) = c(s) + E(s) q(s, y): a planar constant-curvature centerline with a
/// flat, banked, or circular-arc cross section. Pieces split the track at
/// segment joints and banking knots; inside a piece the map is analytic.
class TrackSurface final : public ParametricSurface {
 public:
  struct Piece {
    double s0 = 0.0;
    double s1 = 0.0;
    double kappa = 0.0;
    double psi0 = 0.0;
    Vec3<double> c0;
    // Banking on this piece: beta = bank_b0 + bank_delta * smoothstep((s - bank_s0) / bank_len).
    double bank_s0 = 0.0;
    double bank_len = 1.0;
    double bank_b0 = 0.0;
    double bank_delta = 0.0;
  };

  explicit TrackSurface(TrackDefinition def);

  double length() const override { return length_; }
  double y_min() const override { return def_.y_min(); }
  double y_max() const override { return def_.y_max(); }
  FrameData<double> frame(SurfaceCoord q) const override;

  const TrackDefinition& definition() const { return def_; }
  const std::vector<Piece>& pieces() const { return pieces_; }

  /// Piece containing s; joints belong to the piece on their right except at the end.
  int piece_index(double s) const;

  /// Interior s values where the map is not analytic (piece boundaries).
  std::vector<double> joints() const;

  /// Frame evaluated with the analytic expressions of piece k. Valid for any
  /// scalar type, including AD duals; no domain check.
  template <typename T>
  FrameData<T> frame_in_piece(int k, const T& s, const T& y) const;

 private:
  TrackDefinition def_;
  std::vector<Piece> pieces_;
  double length_ = 0.0;
};

// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
struct CrossSection {
  T ql, ql_s, ql_ss, ql_y, ql_sy, ql_yy;
  T qv, qv_s, qv_ss, qv_y, qv_sy, qv_yy;
};

}  // namespace detail

template <typename T>
FrameData<T> TrackSurface::frame_in_piece(int k, const T& s, const T& y) const {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const Piece& pc = pieces_[static_cast<std::size_t>(k)];
  const double kap = pc.kappa;
  const T ls = s - pc.s0;
  const T psi = pc.psi0 + kap * ls;
  const T cpsi = cos(psi);
  const T spsi = sin(psi);
  const Vec3<T> t{cpsi, spsi, T(0.0)};
  const Vec3<T> e{-spsi, cpsi, T(0.0)};
  const Vec3<T> z{T(0.0), T(0.0), T(1.0)};

  Vec3<T> c;
  if (kap == 0.0) {
    c = Vec3<T>{pc.c0.x + ls * std::cos(pc.psi0), pc.c0.y + ls * std::sin(pc.psi0), T(0.0)};
  } else {
    c = Vec3<T>{pc.c0.x + (spsi - std::sin(pc.psi0)) / kap, pc.c0.y + (std::cos(pc.psi0) - cpsi) / kap,
                T(0.0)};
  }

  detail::CrossSection<T> q{};
  switch (def_.kind) {
    case SurfaceKind::flat_frenet:
      q = {y, T(0.0), T(0.0), T(1.0), T(0.0), T(0.0), T(0.0), T(0.0), T(0.0), T(0.0), T(0.0), T(0.0)};
      break;
    case SurfaceKind::banked_frenet: {
      const double len = pc.bank_len;
      const T w = (s - pc.bank_s0) / len;
      const T beta = pc.bank_b0 + pc.bank_delta * (w * w * (3.0 - 2.0 * w));
      const T b = pc.bank_delta * 6.0 * w * (1.0 - w) / len;
      const T bb = pc.bank_delta * 6.0 * (1.0 - 2.0 * w) / (len * len);
      const T cb = cos(beta);
      const T sb = sin(beta);
      q.ql = y * cb;
      q.ql_s = -y * sb * b;
      q.ql_ss = -y * (cb * b * b + sb * bb);
      q.ql_y = cb;
      q.ql_sy = -sb * b;
      q.ql_yy = T(0.0);
      q.qv = y * sb;
      q.qv_s = y * cb * b;
      q.qv_ss = y * (cb * bb - sb * b * b);
      q.qv_y = sb;
      q.qv_sy = cb * b;
      q.qv_yy = T(0.0);
      break;
    }
    case SurfaceKind::arc_profile: {
      const double rp = def_.profile_radius;
      const T a = y / rp;
      const T ca = cos(a);
      const T sa = sin(a);
      q.ql = rp * sa;
      q.ql_s = T(0.0);
      q.ql_ss = T(0.0);
      q.ql_y = ca;
      q.ql_sy = T(0.0);
      q.ql_yy = -sa / rp;
      q.qv = rp * (T(1.0) - ca);
      q.qv_s = T(0.0);
      q.qv_ss = T(0.0);
      q.qv_y = sa;
      q.qv_sy = T(0.0);
      q.qv_yy = ca / rp;
      break;
    }
  }

  FrameData<T> f;
  f.p = c + q.ql * e + q.qv * z;
  f.xs = (T(1.0) - kap * q.ql) * t + q.ql_s * e + q.qv_s * z;
  f.xy = q.ql_y * e + q.qv_y * z;
  const Vec3<T> xss = (-2.0 * kap * q.ql_s) * t + (kap * (T(1.0) - kap * q.ql) + q.ql_ss) * e + q.qv_ss * z;
  const Vec3<T> xsy = (-kap * q.ql_y) * t + q.ql_sy * e + q.qv_sy * z;
  const Vec3<T> xyy = q.ql_yy * e + q.qv_yy * z;

  const Vec3<T> nn = cross(f.xs, f.xy);
  f.n = nn / norm(nn);
  const T xs_len = norm(f.xs);
  f.es = f.xs / xs_len;
  f.e2 = cross(f.n, f.es);

  f.first_form = {dot(f.xs, f.xs), dot(f.xs, f.xy), dot(f.xy, f.xy)};
  f.second_form = {dot(xss, f.n), dot(xsy, f.n), dot(xyy, f.n)};
  f.wn = {dot(xss, f.e2) / xs_len, dot(xsy, f.e2) / xs_len};
  return f;
}

/// Maps (s, y) samples to world positions. Throws on out-of-domain samples.
std::vector<Vec3<double>> world_position_path(const ParametricSurface& surface,
                                              const std::vector<SurfaceCoord>& samples);

/// Triangle mesh of the road for plotting.
struct TriangleMesh {
  std::vector<Vec3<double>> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<SurfaceCoord> coords;  // per-vertex (s, y)
};

/// Regular (ns+1) x (ny+1) vertex grid over the road, with extra s rows at
/// every joint so the mesh follows piece boundaries.
TriangleMesh build_mesh(const TrackSurface& surface, int ns, int ny);

}  // namespace raceopt::geometry
