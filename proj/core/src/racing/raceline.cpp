#include "raceopt/racing/raceline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "raceopt/common/error.hpp"
#include "raceopt/geometry/kinematics.hpp"
#include "raceopt/racing/vehicle_ocp.hpp"
#include "raceopt/transcription/grid.hpp"

namespace raceopt::racing {

using models::KinematicModel;
using models::TwoTrackModel;
using transcription::OcpBounds;

namespace {

constexpr double kSpeedMin = 1.0;  // s_dot floor and speed lower bound
constexpr double kSpeedMax = 120.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> interval_pieces(const geometry::TrackSurface& surface, const std::vector<double>& b) {
  std::vector<int> out;
  for (std::size_t k = 0; k + 1 < b.size(); ++k) out.push_back(surface.piece_index(0.5 * (b[k] + b[k + 1])));
  return out;
}

struct CommonBounds {
  double s0, s1, y_lo, y_hi, y_mid, y_half, t_max, t_scale;
};

CommonBounds common_bounds(const RacelineProblem& p) {
  const auto& def = p.surface->definition();
  CommonBounds c;
  c.s0 = p.agent.s0;
  c.s1 = p.finish();
  c.y_lo = def.y_min() + p.margin();
  c.y_hi = def.y_max() - p.margin();
  c.y_mid = def.centerline_offset;
  c.y_half = def.half_width;
  const double len = c.s1 - c.s0;
  c.t_max = len / kSpeedMin;
  c.t_scale = len / 30.0;
  return c;
}

OcpBounds kinematic_bounds(const RacelineProblem& p) {
  const auto c = common_bounds(p);
  const auto& v = p.agent.params;
  OcpBounds b;
  b.x_lower = {c.s0, c.y_lo, -std::numbers::pi / 3, kSpeedMin, 0.0};
  b.x_upper = {c.s1, c.y_hi, std::numbers::pi / 3, kSpeedMax, c.t_max};
  b.x_scale = {c.s1 - c.s0, c.y_half, 0.5, 50.0, c.t_scale};
  b.x_offset = {c.s0, c.y_mid, 0.0, 0.0, 0.0};
  b.u_lower = {v.a_min, -v.delta_max};
  b.u_upper = {v.a_max, v.delta_max};
  b.u_scale = {12.0, v.delta_max};
  const double w = v.mass * geometry::kGravityMagnitude;
  b.path_lower = {kSpeedMin, v.n_net_min / w, 0.0};
  b.path_upper = {kInf, v.n_net_max / w, kInf};
  b.initial_lower = b.initial_upper = {c.s0, p.agent.y0, 0.0, p.agent.v0, 0.0};
  b.objective_state = KinematicModel::kT;
  b.w_u = p.w_u;
  b.w_du = p.w_du;
  return b;
}

OcpBounds two_track_bounds(const RacelineProblem& p) {
  const auto c = common_bounds(p);
  const auto& v = p.agent.params;
  OcpBounds b;
  b.x_lower = {c.s0, c.y_lo, -std::numbers::pi / 3, kSpeedMin, -30.0, -5.0, 0.0};
  b.x_upper = {c.s1, c.y_hi, std::numbers::pi / 3, kSpeedMax, 30.0, 5.0, c.t_max};
  b.x_scale = {c.s1 - c.s0, c.y_half, 0.5, 50.0, 5.0, 1.0, c.t_scale};
  b.x_offset = {c.s0, c.y_mid, 0.0, 0.0, 0.0, 0.0, 0.0};
  b.u_lower = {-v.delta_max, -v.slip_ratio_max, -v.slip_ratio_max};
  b.u_upper = {v.delta_max, v.slip_ratio_max, v.slip_ratio_max};
  b.u_scale = {v.delta_max, 0.15, 0.15};
  const double w = v.mass * geometry::kGravityMagnitude;
  b.path_lower = {kSpeedMin, v.n_wheel_min / w, v.n_wheel_min / w, v.n_wheel_min / w, v.n_wheel_min / w};
  b.path_upper = {kInf, v.n_wheel_max / w, v.n_wheel_max / w, v.n_wheel_max / w, v.n_wheel_max / w};
  b.initial_lower = b.initial_upper = {c.s0, p.agent.y0, 0.0, p.agent.v0, 0.0, 0.0, 0.0};
  b.objective_state = TwoTrackModel::kT;
  b.w_u = p.w_u;
  b.w_du = p.w_du;
  return b;
}

}  // namespace

std::string_view to_string(ModelKind kind) { return kind == ModelKind::kinematic ? "kinematic" : "two_track"; }

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "kinematic") return ModelKind::kinematic;
  if (name == "two_track") return ModelKind::two_track;
  throw Error(ErrorCode::invalid_argument, "unknown model '" + std::string(name) + "'");
}

void validate(const RacelineProblem& p) {
  if (!p.surface) throw Error(ErrorCode::invalid_argument, "raceline problem has no surface");
  models::validate(p.agent.params);
  transcription::validate({p.intervals, p.degree, p.agent.s0, p.finish()});
  if (p.agent.s0 < 0.0 || p.finish() > p.surface->length() + 1e-9)
    throw Error(ErrorCode::invalid_argument, "start and finish must lie on the track");
  if (p.margin() < 0.5 * p.agent.params.width - 1e-12)
    throw Error(ErrorCode::invalid_argument, "track-bound inset must be at least half the vehicle width");
  const auto& def = p.surface->definition();
  const double lo = def.y_min() + p.margin(), hi = def.y_max() - p.margin();
  if (lo >= hi) throw Error(ErrorCode::infeasible_bounds, "track is narrower than the vehicle");
  if (p.agent.y0 < lo || p.agent.y0 > hi)
    throw Error(ErrorCode::infeasible_bounds, "initial lateral position y0 = " + std::to_string(p.agent.y0) +
                                                  " lies outside the inset track bounds");
  if (!(p.agent.v0 >= kSpeedMin && p.agent.v0 <= kSpeedMax))
    throw Error(ErrorCode::infeasible_bounds, "initial speed outside [1, 120] m/s");
  if (p.w_u < 0.0 || p.w_du < 0.0) throw Error(ErrorCode::invalid_argument, "objective weights must be >= 0");
}

std::vector<double> raceline_boundaries(const RacelineProblem& p) {
  return transcription::interval_boundaries({p.intervals, p.degree, p.agent.s0, p.finish()}, p.surface->joints());
}

RacelineNlp build_raceline_nlp(const RacelineProblem& p) {
  validate(p);
  const auto bounds = raceline_boundaries(p);
  RacelineNlp r;
  r.model = p.agent.model;
  if (p.agent.model == ModelKind::kinematic) {
    auto m = std::make_shared<KinematicOcp>();
    m->surface = p.surface;
    m->params = p.agent.params;
    m->pieces = interval_pieces(*p.surface, bounds);
    r.tr = transcription::transcribe(std::shared_ptr<const KinematicOcp>(m), kinematic_bounds(p), bounds, p.degree);
    r.time_index = KinematicModel::kT;
  } else {
    auto m = std::make_shared<TwoTrackOcp>();
    m->surface = p.surface;
    m->params = p.agent.params;
    m->pieces = interval_pieces(*p.surface, bounds);
    r.tr = transcription::transcribe(std::shared_ptr<const TwoTrackOcp>(m), two_track_bounds(p), bounds, p.degree);
    r.time_index = TwoTrackModel::kT;
  }
  r.tr.nlp.set_threads(p.solver.threads);
  set_speed_profile_guess(r, p);
  return r;
}

void set_speed_profile_guess(RacelineNlp& r, const RacelineProblem& p) {
  const auto& surface = *p.surface;
  const auto& v = p.agent.params;
  const double s0 = p.agent.s0, s1 = p.finish(), y0 = p.agent.y0;
  const int n = 2000;
  const double ds = (s1 - s0) / n;
  const double budget = 0.6 * v.mu * geometry::kGravityMagnitude;
  std::vector<double> kap(n + 1), stretch(n + 1), speed(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double s = s0 + i * ds;
    const double k = surface.pieces()[surface.piece_index(s)].kappa;
    stretch[i] = std::max(0.2, 1.0 - k * y0);
    kap[i] = k / stretch[i];
    speed[i] = std::abs(kap[i]) > 1e-9 ? std::min(kSpeedMax, std::sqrt(budget / std::abs(kap[i]))) : kSpeedMax;
  }
  for (int i = n - 1; i >= 0; --i)
    speed[i] = std::min(speed[i], std::sqrt(speed[i + 1] * speed[i + 1] + 2.0 * budget * ds * stretch[i]));
  speed[0] = p.agent.v0;
  const double accel = std::min(v.a_max, budget);
  for (int i = 0; i < n; ++i)
    speed[i + 1] = std::min(speed[i + 1], std::sqrt(speed[i] * speed[i] + 2.0 * accel * ds * stretch[i]));
  std::vector<double> time(n + 1, 0.0), vdot(n + 1, 0.0);
  for (int i = 0; i < n; ++i) time[i + 1] = time[i] + ds * stretch[i] * 2.0 / (speed[i] + speed[i + 1]);
  for (int i = 0; i <= n; ++i) {
    const int a = std::max(0, i - 1), b = std::min(n, i + 1);
    vdot[i] = (speed[b] - speed[a]) / (time[b] - time[a]);
  }
  auto sample = [&](const std::vector<double>& f, double s) {
    const double x = std::clamp((s - s0) / ds, 0.0, double(n));
    const int i = std::min(n - 1, static_cast<int>(x));
    const double w = x - i;
    return (1.0 - w) * f[i] + w * f[i + 1];
  };
  const double wb = v.wheelbase();
  const ModelKind model = r.model;
  transcription::set_initial_guess(r.tr, [&](double s, int, double* x, double* u) {
    const double sp = sample(speed, s), k = sample(kap, s);
    x[0] = s;
    x[1] = y0;
    x[2] = 0.0;
    x[3] = sp;
    if (model == ModelKind::kinematic) {
      x[KinematicModel::kT] = sample(time, s);
      u[KinematicModel::kAccel] = sample(vdot, s) + v.c_drag / v.mass * sp * sp;
      u[KinematicModel::kSteer] = std::atan(wb * k);
    } else {
      x[TwoTrackModel::kV2] = 0.0;
      x[TwoTrackModel::kW3] = sp * k;
      x[TwoTrackModel::kT] = sample(time, s);
      u[TwoTrackModel::kSteer] = std::atan(wb * k);
      u[TwoTrackModel::kSlipFront] = 0.0;
      u[TwoTrackModel::kSlipRear] = 0.0;
    }
  });
}

nlp::NlpSolution run_solver(const nlp::NlpProblem& p, const SolveConfig& cfg) {
  if (cfg.backend == nlp::Backend::builtin) return nlp::solve(p, cfg.options);
  return nlp::backend_seam(p, cfg.options, [](const nlp::NlpProblem& q, const nlp::SolverOptions& o) {
    return nlp::solve_interior_point(q, o);
  });
}

transcription::Trajectory extract_trajectory(const RacelineNlp& r, const nlp::Vector& z) {
  return transcription::extract(r.tr.layout, z, std::string(to_string(r.model)), 0, 1, r.time_index);
}

RacelineResult solve_raceline(const RacelineProblem& p, const transcription::Trajectory* warmstart) {
  RacelineNlp r = build_raceline_nlp(p);
  if (warmstart) transcription::set_initial_from(r.tr, *warmstart);
  r.tr.nlp.finalize();
  SolveConfig cfg = p.solver;
  cfg.options.warmstart = r.tr.nlp.initial_point();
  RacelineResult out;
  out.solution = run_solver(r.tr.nlp, cfg);
  out.traj = extract_trajectory(r, out.solution.z);
  out.max_defect = transcription::max_defect(r.tr, out.solution.z);
  return out;
}

}  // namespace raceopt::racing
