// raceopt command line: raceline, overtake, validate, export-mesh.
// Exit codes: 0 success, 1 invalid input, 2 solver non-optimal, 3 internal error.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "raceopt/common/error.hpp"
#include "raceopt/io/result.hpp"
#include "raceopt/io/scenario.hpp"

namespace {

using namespace raceopt;

enum Exit { kOk = 0, kInvalid = 1, kNonOptimal = 2, kInternal = 3 };

enum class Level { error, warn, info, debug };

struct Options {
  std::string scenario;
  std::string out;
  std::string log_level = "info";
  double max_time = 0.0;
  std::string backend;
  int resolution = 200;
  int lateral = 12;
};

Level level_of(const Options& o) {
  if (o.log_level == "error") return Level::error;
  if (o.log_level == "warn") return Level::warn;
  if (o.log_level == "debug") return Level::debug;
  return Level::info;
}

void note(const Options& o, Level at, const std::string& msg) {
  if (level_of(o) >= at) std::cerr << msg << "\n";
}

bool invalid_input(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_track:
    case ErrorCode::out_of_domain:
    case ErrorCode::invalid_argument:
    case ErrorCode::unsupported_degree:
    case ErrorCode::infeasible_bounds:
    case ErrorCode::invalid_scenario:
    case ErrorCode::io_error:
      return true;
    default:
      return false;
  }
}

/// Loads and validates the scenario, then applies command line overrides.
io::ScenarioFile prepare(const Options& o) {
  io::ScenarioFile sc = io::load_scenario(o.scenario);
  if (o.max_time > 0.0) sc.solver.max_wall_time = o.max_time;
  if (o.backend == "builtin") sc.backend = nlp::Backend::builtin;
  if (o.backend == "external") sc.backend = nlp::Backend::external;
  if (level_of(o) >= Level::debug) sc.solver.log = [](const std::string& line) { std::cerr << line << "\n"; };
  io::validate(sc);
  return sc;
}

int threads_from_env() {
  const char* v = std::getenv("RACE_OPT_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw Error(ErrorCode::invalid_argument, "RACE_OPT_THREADS must be a positive integer");
  return static_cast<int>(n);
}

std::string mesh_path_for(const std::string& out) {
  std::filesystem::path p(out);
  p.replace_extension();
  return p.string() + ".mesh.json";
}

void write_mesh(const io::ScenarioFile& sc, const geometry::TrackSurface& surface, const std::string& path,
                int ns, int ny) {
  const auto mesh = geometry::build_mesh(surface, ns, ny);
  io::write_file(path, io::canonical_dump(io::mesh_to_json(mesh, sc.track)));
}

int cmd_raceline(const Options& o) {
  io::ScenarioFile sc = prepare(o);
  if (sc.mode != io::Mode::raceline) throw Error(ErrorCode::invalid_scenario, "mode must be \"raceline\"");
  auto surface = std::make_shared<const geometry::TrackSurface>(sc.track);
  auto problem = io::raceline_problem(sc, surface);
  problem.solver.threads = threads_from_env();
  note(o, Level::info, "solving raceline (" + std::string(racing::to_string(problem.agent.model)) + ", " +
                           std::to_string(problem.intervals) + " intervals)");
  const auto res = racing::solve_raceline(problem);
  const std::string mesh = mesh_path_for(o.out);
  write_mesh(sc, *surface, mesh, o.resolution, o.lateral);
  io::write_file(o.out, io::canonical_dump(io::raceline_result_json(
                            sc, res, *surface, std::filesystem::path(mesh).filename().string())));
  std::printf("status=%s finish_time=%.6f iterations=%d wall_time=%.2f\n", nlp::to_string(res.solution.status).c_str(),
              res.finish_time(), res.solution.iterations, res.solution.wall_time);
  if (res.solution.status != nlp::SolveStatus::optimal) {
    note(o, Level::error, "raceline solve not optimal: " + res.solution.message);
    return kNonOptimal;
  }
  return kOk;
}

int cmd_overtake(const Options& o) {
  io::ScenarioFile sc = prepare(o);
  if (sc.mode != io::Mode::overtake) throw Error(ErrorCode::invalid_scenario, "mode must be \"overtake\"");
  auto surface = std::make_shared<const geometry::TrackSurface>(sc.track);
  auto scenario = io::overtake_scenario(sc, surface);
  scenario.solver.threads = threads_from_env();
  note(o, Level::info, "solving overtake (target " + std::string(racing::to_string(scenario.target.model)) +
                           ", ego " + std::string(racing::to_string(scenario.ego.model)) + ")");
  const auto res = racing::solve_overtake(scenario);
  const auto report = racing::verify_result(res, scenario);
  const std::string mesh = mesh_path_for(o.out);
  write_mesh(sc, *surface, mesh, o.resolution, o.lateral);
  io::write_file(o.out, io::canonical_dump(io::overtake_result_json(
                            sc, res, report, *surface, std::filesystem::path(mesh).filename().string())));
  std::printf(
      "overtaken=%s target_finish=%.6f ego_finish=%.6f min_param_separation=%.6f min_euclid_separation=%.6f "
      "status=%s\n",
      res.overtaken ? "true" : "false", res.target_finish_time, res.ego_finish_time, res.min_param_separation,
      report.min_euclid_separation, nlp::to_string(res.status()).c_str());
  if (res.status() != nlp::SolveStatus::optimal) {
    std::string why = !res.fixed_point_converged ? "knot assignment did not converge" : "a sub-solve was not optimal";
    note(o, Level::error, "overtake not optimal: " + why);
    return kNonOptimal;
  }
  if (report.collision) note(o, Level::warn, "warning: world-frame separation below the body clearance");
  return kOk;
}

int cmd_validate(const Options& o) {
  prepare(o);
  note(o, Level::info, "valid");
  return kOk;
}

int cmd_export_mesh(const Options& o) {
  io::ScenarioFile sc = prepare(o);
  const geometry::TrackSurface surface(sc.track);
  if (o.resolution < 1 || o.lateral < 1) throw Error(ErrorCode::invalid_argument, "mesh resolution must be >= 1");
  write_mesh(sc, surface, o.out, o.resolution, o.lateral);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimum-time racelines and overtaking maneuvers on nonplanar roads"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* cmd, bool needs_out) {
    cmd->add_option("--scenario", o.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
    if (needs_out) cmd->add_option("--out", o.out, "Output JSON")->required();
    cmd->add_option("--log-level", o.log_level, "error, warn, info or debug")
        ->check(CLI::IsMember({"error", "warn", "info", "debug"}));
    cmd->add_option("--max-time", o.max_time, "Wall-clock limit per solve, seconds")->check(CLI::PositiveNumber);
    cmd->add_option("--solver-backend", o.backend, "builtin or external")->check(CLI::IsMember({"builtin", "external"}));
  };
  auto* raceline = app.add_subcommand("raceline", "Single-vehicle minimum-time raceline");
  common(raceline, true);
  auto* overtake = app.add_subcommand("overtake", "Three-step leader-follower overtake");
  common(overtake, true);
  auto* validate = app.add_subcommand("validate", "Schema and invariant check");
  common(validate, false);
  auto* mesh = app.add_subcommand("export-mesh", "Triangle mesh of the road surface");
  common(mesh, true);
  mesh->add_option("--resolution", o.resolution, "Divisions along s");
  mesh->add_option("--lateral", o.lateral, "Divisions across the road");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*raceline) return cmd_raceline(o);
    if (*overtake) return cmd_overtake(o);
    if (*validate) return cmd_validate(o);
    if (*mesh) return cmd_export_mesh(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return invalid_input(e.code()) ? kInvalid : kInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
