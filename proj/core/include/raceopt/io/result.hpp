#pragma once

#include <limits>
#include <string>

#include "raceopt/geometry/surface.hpp"
#include "raceopt/io/scenario.hpp"

namespace raceopt::io {

/// Node samples of a trajectory (initial state plus every collocation node,
/// time-sorted) with world positions, body velocities, speed and, for the
/// two-track model, tire loads; plus the raw collocation data under
/// "collocation" so the trajectory can be rebuilt exactly.
Json trajectory_to_json(const transcription::Trajectory& traj, const geometry::TrackSurface& surface,
                        const racing::AgentSpec& agent);
transcription::Trajectory trajectory_from_json(const Json& j);

Json stats_to_json(const nlp::NlpSolution& sol, double max_defect);
Json stats_to_json(const racing::StepStats& st);

Json raceline_result_json(const ScenarioFile& sc, const racing::RacelineResult& res,
                          const geometry::TrackSurface& surface, const std::string& mesh_ref);
Json overtake_result_json(const ScenarioFile& sc, const racing::OvertakeResult& res,
                          const racing::VerifyReport& report, const geometry::TrackSurface& surface,
                          const std::string& mesh_ref);

Json mesh_to_json(const geometry::TriangleMesh& mesh, const geometry::TrackDefinition& def);

/// Re-verification of a result document from its contents alone.
struct RecheckReport {
  double max_defect = 0.0;          // scaled defect/continuity residual
  double max_violation = 0.0;       // bounds and path constraints, scaled rows
  double max_pos3d_error = 0.0;     // stored pos3d vs recomputed, m
  double min_collision_residual = std::numeric_limits<double>::infinity();  // ego nodes, m^2
  bool time_sorted = true;
  int trajectories = 0;
};
RecheckReport recheck_result(const Json& result);

}  // namespace raceopt::io
