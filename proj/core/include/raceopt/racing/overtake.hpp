#pragma once

#include <memory>
#include <vector>

#include "raceopt/racing/raceline.hpp"

namespace raceopt::racing {

/// Target position as a C1 piecewise cubic in time. Knot values come from the
/// trajectory polynomials and knot slopes from their exact derivatives, with
/// the s slopes limited so s(t) stays monotone. After t_end the Target moves
/// at its final s_dot with y held.
class TimeSpline {
 public:
  struct Segment {
    double t0 = 0.0;
    double s[4]{};  // power basis in (t - t0)
    double y[4]{};
  };

  TimeSpline() = default;
  TimeSpline(std::vector<double> t, std::vector<double> s, std::vector<double> y, std::vector<double> ds,
             std::vector<double> dy);

  /// Segment index for t: 0..knots-2 inside, knots-1 for the extrapolation.
  /// Times before the first knot use segment 0.
  int segment_index(double t) const;
  const Segment& segment(int i) const { return segments_[static_cast<std::size_t>(i)]; }
  int num_segments() const { return static_cast<int>(segments_.size()); }
  const std::vector<double>& knots() const { return t_; }
  double end_time() const { return t_.back(); }

  template <class T>
  void eval_segment(int i, const T& t, T& s, T& y) const {
    const Segment& g = segments_[static_cast<std::size_t>(i)];
    const T u = t - g.t0;
    s = g.s[0] + u * (g.s[1] + u * (g.s[2] + u * g.s[3]));
    y = g.y[0] + u * (g.y[1] + u * (g.y[2] + u * g.y[3]));
  }
  void evaluate(double t, double& s, double& y) const { eval_segment(segment_index(t), t, s, y); }

 private:
  std::vector<double> t_;
  std::vector<Segment> segments_;
};

/// Samples every node plus samples_per_interval interior points of each
/// interval. Throws Error(non_monotone_time) unless time strictly increases.
TimeSpline reparam_by_time(const transcription::Trajectory& traj, int samples_per_interval = 4);

/// (ego_s - s_T(t))^2 + (ego_y - y_T(t))^2 - (2r)^2.
double collision_residual(double ego_s, double ego_y, double ego_t, const TimeSpline& spline, double r);

struct OvertakeScenario {
  std::shared_ptr<const geometry::TrackSurface> surface;
  AgentSpec target;
  AgentSpec ego;
  double r = 1.8;  // collision circle radius
  int intervals = 60;
  int degree = 3;
  double s_end = -1.0;  // negative: end of track
  double w_u = 0.0;
  double w_du = 0.0;
  SolveConfig solver;
  int max_fixed_point_iterations = 5;
};

/// Throws Error(invalid_scenario) naming the violated invariant.
void validate(const OvertakeScenario& sc);

RacelineProblem target_problem(const OvertakeScenario& sc);
RacelineProblem ego_problem(const OvertakeScenario& sc);

struct StepStats {
  nlp::SolveStatus status = nlp::SolveStatus::numerical_error;
  int iterations = 0;
  double wall_time = 0.0;
  double kkt_residual = 0.0;
  double max_defect = 0.0;
  double objective = 0.0;
  std::string message;
};

struct OvertakeResult {
  transcription::Trajectory target_traj;
  transcription::Trajectory ego_warmstart_traj;
  transcription::Trajectory ego_traj;
  StepStats target_stats, warmstart_stats, ego_stats;
  double r = 0.0;
  double min_param_separation = 0.0;  // over ego collocation nodes
  double target_finish_time = 0.0;
  double warmstart_finish_time = 0.0;
  double ego_finish_time = 0.0;
  bool overtaken = false;
  int knot_assignment_iterations = 0;
  bool fixed_point_converged = false;

  /// optimal when every step solved to optimality and the fixed point converged.
  nlp::SolveStatus status() const;
};

/// Tie margin: overtaken requires ego_finish < target_finish - kOvertakeMargin.
inline constexpr double kOvertakeMargin = 1e-3;

/// Three-step leader-follower protocol: Target raceline, Ego raceline without
/// the Target (warmstart), Ego with the collision constraint against the
/// Target time spline, re-solved until the knot assignment is consistent.
OvertakeResult solve_overtake(const OvertakeScenario& sc);

struct VerifyReport {
  double min_param_separation = 0.0;   // dense, common horizon
  double min_euclid_separation = 0.0;  // world frame, dense
  double time_of_min_euclid = 0.0;
  double body_clearance = 0.0;  // sum of the footprint circumscribing radii
  bool collision = false;       // min_euclid < body_clearance
  double max_bound_violation = 0.0;
  double min_node_collision_residual = 0.0;  // m^2, at ego nodes against the spline
  bool time_increasing = true;
  double max_defect = 0.0;  // as reported by the solves
};

/// Dense post-check over the common horizon [0, min(T_ego, T_target)]:
/// samples_per_interval points per interval of each trajectory, positions
/// compared in parameter space and through the surface map in world space.
VerifyReport verify_result(const OvertakeResult& res, const OvertakeScenario& sc, int samples_per_interval = 20);

}  // namespace raceopt::racing
