#include "raceopt/racing/overtake.hpp"

#include <algorithm>
#include <cmath>

#include "raceopt/common/error.hpp"
#include "raceopt/nlp/dual.hpp"

namespace raceopt::racing {

using transcription::Trajectory;

TimeSpline::TimeSpline(std::vector<double> t, std::vector<double> s, std::vector<double> y, std::vector<double> ds,
                       std::vector<double> dy)
    : t_(std::move(t)) {
  const std::size_t n = t_.size();
  if (n < 2 || s.size() != n || y.size() != n || ds.size() != n || dy.size() != n)
    throw Error(ErrorCode::invalid_argument, "time spline needs at least two consistent samples");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(t_[i + 1] > t_[i])) throw Error(ErrorCode::non_monotone_time, "time spline knots must increase");
  // Fritsch-Carlson limiter on the s slopes.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double delta = (s[i + 1] - s[i]) / (t_[i + 1] - t_[i]);
    if (delta <= 0.0) {
      ds[i] = ds[i + 1] = 0.0;
      continue;
    }
    ds[i] = std::max(ds[i], 0.0);
    ds[i + 1] = std::max(ds[i + 1], 0.0);
    const double a = ds[i] / delta, b = ds[i + 1] / delta;
    const double r2 = a * a + b * b;
    if (r2 > 9.0) {
      const double tau = 3.0 / std::sqrt(r2);
      ds[i] = tau * a * delta;
      ds[i + 1] = tau * b * delta;
    }
  }
  auto hermite = [](double p0, double p1, double m0, double m1, double h, double* c) {
    const double d = (p1 - p0) / h;
    c[0] = p0;
    c[1] = m0;
    c[2] = (3.0 * d - 2.0 * m0 - m1) / h;
    c[3] = (m0 + m1 - 2.0 * d) / (h * h);
  };
  segments_.resize(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    Segment& g = segments_[i];
    g.t0 = t_[i];
    const double h = t_[i + 1] - t_[i];
    hermite(s[i], s[i + 1], ds[i], ds[i + 1], h, g.s);
    hermite(y[i], y[i + 1], dy[i], dy[i + 1], h, g.y);
  }
  Segment& e = segments_.back();
  e.t0 = t_.back();
  e.s[0] = s.back();
  e.s[1] = ds.back();
  e.y[0] = y.back();
}

int TimeSpline::segment_index(double t) const {
  const int n = static_cast<int>(t_.size());
  if (t >= t_.back()) return n - 1;
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  return std::clamp(static_cast<int>(it - t_.begin()) - 1, 0, n - 2);
}

TimeSpline reparam_by_time(const Trajectory& traj, int samples_per_interval) {
  if (traj.time_index < 0) throw Error(ErrorCode::invalid_argument, "trajectory carries no time state");
  const auto nodes = traj.nodes();
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (!(traj.node_state(nodes[i])[traj.time_index] > traj.node_state(nodes[i - 1])[traj.time_index]))
      throw Error(ErrorCode::non_monotone_time,
                  "trajectory time does not increase at interval " + std::to_string(nodes[i].k));
  const int K = traj.intervals();
  const int ti = traj.time_index, si = traj.s_index, yi = traj.y_index;
  std::vector<double> theta;
  for (double tau : traj.tau) theta.push_back(tau);
  for (int i = 1; i <= samples_per_interval; ++i) theta.push_back(double(i) / (samples_per_interval + 1));
  std::sort(theta.begin(), theta.end());
  theta.erase(std::unique(theta.begin(), theta.end(), [](double a, double b) { return b - a < 1e-9; }), theta.end());

  std::vector<double> t, s, y, ds, dy;
  auto push = [&](int k, double th) {
    const Eigen::VectorXd x = traj.interp_state(k, th);
    const Eigen::VectorXd d = traj.interp_state_derivative(k, th);
    t.push_back(x[ti]);
    s.push_back(x[si]);
    y.push_back(x[yi]);
    ds.push_back(d[si] / d[ti]);
    dy.push_back(d[yi] / d[ti]);
  };
  push(0, 0.0);
  for (int k = 0; k < K; ++k) {
    if (k > 0) {
      // Boundary knot: the end of interval k-1 is already stored; average the slopes.
      const Eigen::VectorXd d = traj.interp_state_derivative(k, 0.0);
      ds.back() = 0.5 * (ds.back() + d[si] / d[ti]);
      dy.back() = 0.5 * (dy.back() + d[yi] / d[ti]);
    }
    for (double th : theta) push(k, th);
  }
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw Error(ErrorCode::non_monotone_time, "interpolated trajectory time does not increase");
  return TimeSpline(std::move(t), std::move(s), std::move(y), std::move(ds), std::move(dy));
}

double collision_residual(double ego_s, double ego_y, double ego_t, const TimeSpline& spline, double r) {
  double s, y;
  spline.evaluate(ego_t, s, y);
  const double a = ego_s - s, b = ego_y - y;
  return a * a + b * b - 4.0 * r * r;
}

namespace {

// Scaled (s, y, t) of one ego node against a frozen spline segment; the
// output is separation^2 / (2r)^2 - 1 >= 0.
// Frozen-segment collision row. Outside [lo, hi] the segment cubic is
// replaced by its tangent line at the nearer end, which keeps the row C1 and
// bounded when a node drifts far from its assigned segment.
struct CollisionFunction {
  double off[3]{}, scale[3]{};
  const TimeSpline* spline = nullptr;
  int segment = 0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  double inv_d2 = 1.0;

  template <class T>
  void operator()(const T* in, T* out) const {
    const T s = off[0] + scale[0] * in[0];
    const T y = off[1] + scale[1] * in[1];
    const T t = off[2] + scale[2] * in[2];
    const double tv = ad::value_of(t);
    T st, yt;
    if (tv > hi || tv < lo) {
      const double e = tv > hi ? hi : lo;
      const auto& g = spline->segment(segment);
      const double u = e - g.t0;
      double se, ye;
      spline->eval_segment(segment, e, se, ye);
      const double ds = g.s[1] + u * (2.0 * g.s[2] + 3.0 * u * g.s[3]);
      const double dy = g.y[1] + u * (2.0 * g.y[2] + 3.0 * u * g.y[3]);
      st = se + ds * (t - e);
      yt = ye + dy * (t - e);
    } else {
      spline->eval_segment(segment, t, st, yt);
    }
    const T a = s - st, b = y - yt;
    out[0] = (a * a + b * b) * inv_d2 - 1.0;
  }
};

StepStats stats_of(const RacelineResult& r) {
  StepStats st;
  st.status = r.solution.status;
  st.iterations = r.solution.iterations;
  st.wall_time = r.solution.wall_time;
  st.kkt_residual = r.solution.kkt_residual;
  st.max_defect = r.max_defect;
  st.objective = r.solution.objective;
  st.message = r.solution.message;
  return st;
}

constexpr double kSegmentOverhang = 0.1;
constexpr double kRadiusContinuation[] = {0.5, 0.7, 0.85, 0.95, 1.0};

using Assignment = std::vector<int>;  // per ego collocation node (k, j >= 1), row-major

double node_time(const Trajectory& tr, int k, int j) { return tr.x[k][j][tr.time_index]; }

Assignment assign(const Trajectory& ego, const TimeSpline& spline) {
  Assignment a;
  for (int k = 0; k < ego.intervals(); ++k)
    for (int j = 1; j <= ego.degree(); ++j) a.push_back(spline.segment_index(node_time(ego, k, j)));
  return a;
}

// A node may overhang its frozen segment by overhang * (segment duration);
// adjacent cubics agree to first order at the shared knot.
bool consistent(const Trajectory& ego, const TimeSpline& spline, const Assignment& a, double overhang) {
  const auto& knots = spline.knots();
  const int last = spline.num_segments() - 1;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::size_t idx = 0;
  for (int k = 0; k < ego.intervals(); ++k)
    for (int j = 1; j <= ego.degree(); ++j) {
      const double t = node_time(ego, k, j);
      const int seg = a[idx++];
      const double lo = seg == 0 ? -inf : knots[seg];
      const double hi = seg == last ? inf : knots[seg + 1];
      const double slack = seg == last ? 0.0 : overhang * (knots[seg + 1] - knots[seg]);
      if (t < lo - slack || t > hi + slack) return false;
    }
  return true;
}

RacelineResult solve_collision_step(const RacelineProblem& ep, const TimeSpline& spline, const Assignment& a,
                                    double r, SolveConfig cfg, const nlp::Vector& start) {
  RacelineNlp rn = build_raceline_nlp(ep);
  auto& nlp = rn.tr.nlp;
  const auto& L = rn.tr.layout;
  const int first = nlp.add_constraints(L.K * L.d, 0.0, nlp::kInf, "collision");
  const int vars[3] = {0, 1, rn.time_index};
  std::size_t idx = 0;
  for (int k = 0; k < L.K; ++k)
    for (int j = 1; j <= L.d; ++j, ++idx) {
      CollisionFunction fn;
      for (int q = 0; q < 3; ++q) {
        fn.off[q] = L.x_offset[vars[q]];
        fn.scale[q] = L.x_scale[vars[q]];
      }
      fn.spline = &spline;
      fn.segment = a[idx];
      if (a[idx] > 0) fn.lo = spline.knots()[static_cast<std::size_t>(a[idx])];
      if (a[idx] < spline.num_segments() - 1) fn.hi = spline.knots()[static_cast<std::size_t>(a[idx]) + 1];
      fn.inv_d2 = 1.0 / (4.0 * r * r);
      const int blk = nlp.add_block(nlp::make_block<3, 1>(fn),
                                    {L.colloc(k, j, vars[0]), L.colloc(k, j, vars[1]), L.colloc(k, j, vars[2])});
      nlp.map_output(blk, 0, first + static_cast<int>(idx), 1.0);
    }
  nlp.finalize();
  cfg.options.warmstart = start;
  RacelineResult step;
  step.solution = run_solver(nlp, cfg);
  step.traj = extract_trajectory(rn, step.solution.z);
  step.max_defect = transcription::max_defect(rn.tr, step.solution.z);
  return step;
}

// Time at which the spline first reaches arc length s (s is monotone in t).
double time_at_arc_length(const TimeSpline& spline, double s) {
  double lo = spline.knots().front(), hi = spline.end_time();
  double sv, yv;
  spline.evaluate(hi, sv, yv);
  for (int i = 0; i < 60 && sv < s; ++i) {
    hi += std::max(1.0, hi - lo);
    spline.evaluate(hi, sv, yv);
  }
  if (sv < s) return hi;
  for (int i = 0; i < 100 && hi - lo > 1e-9; ++i) {
    const double mid = 0.5 * (lo + hi);
    spline.evaluate(mid, sv, yv);
    (sv < s ? lo : hi) = mid;
  }
  return hi;
}

// Ego raceline that stays at least gap behind the Target in arc length: every
// node time is bounded below by the Target's arrival at s + gap. The result
// is collision free for 2r <= gap and seeds the collision step.
RacelineResult solve_trailing(const RacelineProblem& ep, const TimeSpline& spline, double gap, SolveConfig cfg,
                              const nlp::Vector& start) {
  RacelineNlp rn = build_raceline_nlp(ep);
  auto& nlp = rn.tr.nlp;
  const auto& L = rn.tr.layout;
  const int ti = rn.time_index;
  auto bound = [&](int var, double sigma) {
    const double t_min = time_at_arc_length(spline, sigma + gap);
    const double z_min = (t_min - L.x_offset[ti]) / L.x_scale[ti];
    const double hi = nlp.variable_upper()[var];
    nlp.set_variable_bounds(var, std::min(std::max(nlp.variable_lower()[var], z_min), hi), hi);
  };
  for (int k = 0; k < L.K; ++k) {
    if (k > 0) bound(L.boundary(k, ti), L.sigma(k, 0));
    for (int j = 1; j <= L.d; ++j) bound(L.colloc(k, j, ti), L.sigma(k, j));
  }
  bound(L.boundary(L.K, ti), L.boundaries.back());
  nlp.finalize();
  cfg.options.warmstart = start;
  RacelineResult step;
  step.solution = run_solver(nlp, cfg);
  step.traj = extract_trajectory(rn, step.solution.z);
  step.max_defect = transcription::max_defect(rn.tr, step.solution.z);
  return step;
}

}  // namespace

void validate(const OvertakeScenario& sc) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::invalid_scenario, what); };
  if (!sc.surface) fail("scenario has no track");
  if (!(sc.r > 0.0)) fail("collision radius r must be positive");
  if (!(sc.target.s0 > sc.ego.s0)) fail("the Target must start ahead of the Ego (target.s0 > ego.s0)");
  if (std::hypot(sc.target.s0 - sc.ego.s0, sc.target.y0 - sc.ego.y0) < 2.0 * sc.r)
    fail("initial positions overlap: separation is below 2r");
  const auto& def = sc.surface->definition();
  const double inset = 0.5 * std::max(sc.target.params.width, sc.ego.params.width);
  if (2.0 * sc.r >= 2.0 * def.half_width - 2.0 * inset)
    fail("2r leaves no passing corridor: it must be below the track width minus the insets");
  if (sc.max_fixed_point_iterations < 1) fail("max_fixed_point_iterations must be at least 1");
  validate(target_problem(sc));
  validate(ego_problem(sc));
}

namespace {

RacelineProblem agent_problem(const OvertakeScenario& sc, const AgentSpec& a) {
  RacelineProblem p;
  p.surface = sc.surface;
  p.agent = a;
  p.intervals = sc.intervals;
  p.degree = sc.degree;
  p.s_end = sc.s_end;
  p.w_u = sc.w_u;
  p.w_du = sc.w_du;
  p.solver = sc.solver;
  return p;
}

}  // namespace

RacelineProblem target_problem(const OvertakeScenario& sc) { return agent_problem(sc, sc.target); }
RacelineProblem ego_problem(const OvertakeScenario& sc) { return agent_problem(sc, sc.ego); }

nlp::SolveStatus OvertakeResult::status() const {
  for (const auto* s : {&target_stats, &warmstart_stats, &ego_stats})
    if (s->status != nlp::SolveStatus::optimal) return s->status;
  return fixed_point_converged ? nlp::SolveStatus::optimal : nlp::SolveStatus::max_iter;
}

OvertakeResult solve_overtake(const OvertakeScenario& sc) {
  validate(sc);
  OvertakeResult res;
  res.r = sc.r;

  // Step 1: Target raceline, ignoring the Ego.
  const RacelineResult target = solve_raceline(target_problem(sc));
  res.target_traj = target.traj;
  res.target_stats = stats_of(target);
  res.target_finish_time = target.finish_time();

  // Step 2: Ego raceline ignoring the Target, used as the warmstart.
  const RacelineProblem ep = ego_problem(sc);
  const RacelineResult warm = solve_raceline(ep);
  res.ego_warmstart_traj = warm.traj;
  res.warmstart_stats = stats_of(warm);
  res.warmstart_finish_time = warm.finish_time();
  if (target.solution.status != nlp::SolveStatus::optimal) {
    res.ego_traj = warm.traj;
    res.ego_stats = res.warmstart_stats;
    res.ego_finish_time = warm.finish_time();
    res.ego_stats.message = "target solve failed; collision step skipped";
    res.ego_stats.status = target.solution.status;
    return res;
  }

  // Step 3: Ego against the Target time spline with frozen segment choices.
  const TimeSpline spline = reparam_by_time(target.traj);
  Assignment a = assign(warm.traj, spline);
  RacelineResult best;
  for (int iter = 1; iter <= sc.max_fixed_point_iterations; ++iter) {
    RacelineResult step;
    if (iter == 1) {
      step = solve_collision_step(ep, spline, a, sc.r, ep.solver, warm.solution.z);
      // The warmstart passes through the Target; when the direct solve fails,
      // grow the radius from half its value so the Ego can pick a side first.
      if (step.solution.status != nlp::SolveStatus::optimal) {
        nlp::Vector z = warm.solution.z;
        Assignment ac = a;
        for (double f : kRadiusContinuation) {
          step = solve_collision_step(ep, spline, ac, f * sc.r, ep.solver, z);
          if (step.solution.status != nlp::SolveStatus::optimal) break;
          z = step.solution.z;
          if (f < 1.0) ac = assign(step.traj, spline);
        }
        if (step.solution.status == nlp::SolveStatus::optimal) a = ac;
      }
      // The side chosen at small radii can close up at full radius. Start
      // again from a trailing line, which is collision free, and let the
      // solver look for a later pass.
      if (step.solution.status != nlp::SolveStatus::optimal) {
        const RacelineResult trail = solve_trailing(ep, spline, 2.0 * sc.r, ep.solver, warm.solution.z);
        if (trail.solution.status == nlp::SolveStatus::optimal) {
          a = assign(trail.traj, spline);
          step = solve_collision_step(ep, spline, a, sc.r, ep.solver, trail.solution.z);
        }
      }
    } else {
      // Re-solve near the previous solution: keep its multipliers and start
      // with a small barrier so the iterate stays in the same basin.
      SolveConfig cfg = ep.solver;
      cfg.options.warmstart_lambda = best.solution.lambda;
      cfg.options.warmstart_z_lower = best.solution.z_lower;
      cfg.options.warmstart_z_upper = best.solution.z_upper;
      cfg.options.mu_init = 1e-5;
      cfg.options.bound_push = 1e-6;
      step = solve_collision_step(ep, spline, a, sc.r, cfg, best.solution.z);
      if (step.solution.status != nlp::SolveStatus::optimal)
        step = solve_collision_step(ep, spline, a, sc.r, ep.solver, best.solution.z);
    }
    res.knot_assignment_iterations = iter;
    best = step;
    if (step.solution.status != nlp::SolveStatus::optimal) break;
    if (consistent(step.traj, spline, a, kSegmentOverhang)) {
      res.fixed_point_converged = true;
      break;
    }
    a = assign(step.traj, spline);
  }
  res.ego_traj = best.traj;
  res.ego_stats = stats_of(best);
  res.ego_finish_time = best.finish_time();
  res.overtaken = res.ego_finish_time < res.target_finish_time - kOvertakeMargin;

  double min_sep = std::numeric_limits<double>::infinity();
  for (int k = 0; k < res.ego_traj.intervals(); ++k)
    for (int j = 1; j <= res.ego_traj.degree(); ++j) {
      const auto& x = res.ego_traj.x[k][j];
      const double c = collision_residual(x[0], x[1], x[res.ego_traj.time_index], spline, sc.r);
      min_sep = std::min(min_sep, std::sqrt(std::max(0.0, c + 4.0 * sc.r * sc.r)));
    }
  res.min_param_separation = min_sep;
  return res;
}

VerifyReport verify_result(const OvertakeResult& res, const OvertakeScenario& sc, int samples_per_interval) {
  VerifyReport rep;
  const auto& surface = *sc.surface;
  rep.body_clearance = sc.target.params.footprint_radius() + sc.ego.params.footprint_radius();
  rep.max_defect = std::max({res.target_stats.max_defect, res.warmstart_stats.max_defect, res.ego_stats.max_defect});

  const Trajectory* trajs[2] = {&res.target_traj, &res.ego_traj};
  const AgentSpec* agents[2] = {&sc.target, &sc.ego};
  for (int a = 0; a < 2; ++a) {
    const auto& tr = *trajs[a];
    const double inset = 0.5 * agents[a]->params.width;
    const double lo = surface.y_min() + inset, hi = surface.y_max() - inset;
    const auto nodes = tr.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto x = tr.node_state(nodes[i]);
      rep.max_bound_violation = std::max({rep.max_bound_violation, lo - x[tr.y_index], x[tr.y_index] - hi});
      if (i > 0 && !(x[tr.time_index] > tr.node_state(nodes[i - 1])[tr.time_index])) rep.time_increasing = false;
    }
  }
  if (!rep.time_increasing) return rep;

  const TimeSpline target = reparam_by_time(res.target_traj, samples_per_interval);
  const TimeSpline ego = reparam_by_time(res.ego_traj, samples_per_interval);
  const double horizon = std::min(res.target_traj.final_time(), res.ego_traj.final_time());

  std::vector<double> times;
  for (const auto* tr : trajs)
    for (int k = 0; k < tr->intervals(); ++k)
      for (int i = 0; i <= samples_per_interval; ++i) {
        const double t = tr->interp_state(k, double(i) / samples_per_interval)[tr->time_index];
        if (t <= horizon) times.push_back(t);
      }
  std::sort(times.begin(), times.end());

  rep.min_param_separation = std::numeric_limits<double>::infinity();
  rep.min_euclid_separation = std::numeric_limits<double>::infinity();
  const double len = surface.length();
  for (double t : times) {
    double s1, y1, s2, y2;
    target.evaluate(t, s1, y1);
    ego.evaluate(t, s2, y2);
    rep.min_param_separation = std::min(rep.min_param_separation, std::hypot(s1 - s2, y1 - y2));
    const auto p1 = surface.frame({std::clamp(s1, 0.0, len), y1}).p;
    const auto p2 = surface.frame({std::clamp(s2, 0.0, len), y2}).p;
    const double d = norm(p1 - p2);
    if (d < rep.min_euclid_separation) {
      rep.min_euclid_separation = d;
      rep.time_of_min_euclid = t;
    }
  }
  rep.collision = rep.min_euclid_separation < rep.body_clearance;

  const TimeSpline collision_spline = reparam_by_time(res.target_traj);
  rep.min_node_collision_residual = std::numeric_limits<double>::infinity();
  const auto& e = res.ego_traj;
  for (int k = 0; k < e.intervals(); ++k)
    for (int j = 1; j <= e.degree(); ++j) {
      const auto& x = e.x[k][j];
      rep.min_node_collision_residual = std::min(
          rep.min_node_collision_residual, collision_residual(x[0], x[1], x[e.time_index], collision_spline, sc.r));
    }
  return rep;
}

}  // namespace raceopt::racing
