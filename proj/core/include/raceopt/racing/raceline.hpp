#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "raceopt/geometry/surface.hpp"
#include "raceopt/models/params.hpp"
#include "raceopt/nlp/solver.hpp"
#include "raceopt/transcription/transcribe.hpp"

namespace raceopt::racing {

enum class ModelKind { kinematic, two_track };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

struct AgentSpec {
  ModelKind model = ModelKind::kinematic;
  models::VehicleParams params;
  double v0 = 20.0;  // m/s along the body x axis
  double s0 = 0.0;
  double y0 = 0.0;
};

struct SolveConfig {
  nlp::SolverOptions options;
  nlp::Backend backend = nlp::Backend::external;
  int threads = 1;
};

struct RacelineProblem {
  std::shared_ptr<const geometry::TrackSurface> surface;
  AgentSpec agent;
  int intervals = 40;
  int degree = 3;
  double s_end = -1.0;  // negative: end of track
  double w_u = 0.0;
  double w_du = 0.0;
  double inset = -1.0;  // lateral margin at each edge; negative: half the vehicle width
  SolveConfig solver;

  double finish() const { return s_end < 0.0 ? surface->length() : s_end; }
  double margin() const { return inset < 0.0 ? 0.5 * agent.params.width : inset; }
};

/// Throws Error(invalid_argument / infeasible_bounds) naming the violated invariant.
void validate(const RacelineProblem& p);

/// The transcribed (unfinalized) raceline NLP with an initial guess set.
struct RacelineNlp {
  transcription::Transcription tr;
  ModelKind model = ModelKind::kinematic;
  int time_index = 0;
};

/// Interval boundaries for the problem: uniform over [s0, finish] with every
/// surface joint included.
std::vector<double> raceline_boundaries(const RacelineProblem& p);

RacelineNlp build_raceline_nlp(const RacelineProblem& p);

/// Initial guess from a speed profile along y = y0 limited by the path
/// curvature and a friction-circle acceleration budget.
void set_speed_profile_guess(RacelineNlp& r, const RacelineProblem& p);

struct RacelineResult {
  transcription::Trajectory traj;
  nlp::NlpSolution solution;
  double max_defect = 0.0;
  double finish_time() const { return traj.final_time(); }
};

/// Runs the configured backend. The builtin backend is the augmented
/// Lagrangian solver; external is the interior-point solver run through the
/// backend seam.
nlp::NlpSolution run_solver(const nlp::NlpProblem& p, const SolveConfig& cfg);

/// Transcribes and solves. A non-optimal status is returned in the result,
/// the trajectory is still extracted.
RacelineResult solve_raceline(const RacelineProblem& p, const transcription::Trajectory* warmstart = nullptr);

/// Trajectory with the layout metadata of m.
transcription::Trajectory extract_trajectory(const RacelineNlp& r, const nlp::Vector& z);

}  // namespace raceopt::racing
