#pragma once

#include <memory>
#include <string>
#include <vector>

#include "raceopt/geometry/track.hpp"
#include "raceopt/io/json.hpp"
#include "raceopt/racing/overtake.hpp"

namespace raceopt::io {

inline constexpr int kSchemaVersion = 1;

enum class Mode { raceline, overtake };

std::string_view to_string(Mode mode);

struct AgentRecord {
  std::string role;  // "target" or "ego"; a raceline file has a single "ego"
  racing::AgentSpec spec;
};

/// In-memory form of a scenario file. Missing optional keys take the
/// defaults below; serialize() writes every key.
struct ScenarioFile {
  Mode mode = Mode::raceline;
  geometry::TrackDefinition track;
  std::vector<AgentRecord> agents;
  int intervals = 60;
  int degree = 3;
  double s_end = -1.0;  // negative: end of track; null in the file
  double r = 1.8;
  double w_u = 0.0;
  double w_du = 0.0;
  nlp::SolverOptions solver;
  nlp::Backend backend = nlp::Backend::external;

  const AgentRecord& agent(const std::string& role) const;
};

/// Throws Error(io_error) for malformed JSON and Error(invalid_scenario) for
/// schema violations, including unknown keys.
ScenarioFile parse_scenario(const std::string& text);
ScenarioFile load_scenario(const std::string& path);

Json to_json(const ScenarioFile& sc);
ScenarioFile scenario_from_json(const Json& j);
/// Canonical text; parse_scenario(serialize(sc)) serializes identically.
std::string serialize(const ScenarioFile& sc);

Json to_json(const geometry::TrackDefinition& def);
Json to_json(const models::VehicleParams& p);

/// Schema, track, parameter and problem invariants; throws the first violation.
void validate(const ScenarioFile& sc);

racing::RacelineProblem raceline_problem(const ScenarioFile& sc,
                                         std::shared_ptr<const geometry::TrackSurface> surface);
racing::OvertakeScenario overtake_scenario(const ScenarioFile& sc,
                                           std::shared_ptr<const geometry::TrackSurface> surface);

}  // namespace raceopt::io
