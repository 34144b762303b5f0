#include "raceopt/io/result.hpp"

#include <cmath>

#include "raceopt/common/error.hpp"
#include "raceopt/models/kinematic.hpp"
#include "raceopt/models/two_track.hpp"

namespace raceopt::io {

namespace {

using transcription::Trajectory;

Json vec(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd to_vec(const Json& a) {
  if (!a.is_array()) throw Error(ErrorCode::io_error, "expected a number array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

Json collocation_to_json(const Trajectory& t) {
  Json j;
  j["model"] = t.model;
  j["nx"] = t.nx;
  j["nu"] = t.nu;
  j["s_index"] = t.s_index;
  j["y_index"] = t.y_index;
  j["time_index"] = t.time_index;
  j["tau"] = t.tau;
  j["boundaries"] = t.boundaries;
  j["x"] = Json::array();
  j["u"] = Json::array();
  for (int k = 0; k < t.intervals(); ++k) {
    Json xk = Json::array(), uk = Json::array();
    for (const auto& v : t.x[static_cast<std::size_t>(k)]) xk.push_back(vec(v));
    for (const auto& v : t.u[static_cast<std::size_t>(k)]) uk.push_back(vec(v));
    j["x"].push_back(xk);
    j["u"].push_back(uk);
  }
  j["final_state"] = vec(t.final_state);
  return j;
}

Eigen::VectorXd node_input(const Trajectory& t, const Trajectory::Node& n) {
  const auto& uk = t.u[static_cast<std::size_t>(n.k)];
  return uk[static_cast<std::size_t>(n.j == 0 ? 0 : n.j - 1)];
}

}  // namespace

Json trajectory_to_json(const Trajectory& traj, const geometry::TrackSurface& surface,
                        const racing::AgentSpec& agent) {
  Json samples = Json::array();
  const bool two_track = agent.model == racing::ModelKind::two_track;
  for (const auto& n : traj.nodes()) {
    const Eigen::VectorXd x = traj.node_state(n);
    const Eigen::VectorXd u = node_input(traj, n);
    const auto& b = traj.boundaries;
    const int piece = surface.piece_index(0.5 * (b[static_cast<std::size_t>(n.k)] + b[static_cast<std::size_t>(n.k) + 1]));
    const double s = x[traj.s_index], y = x[traj.y_index];
    const auto f = surface.frame_in_piece<double>(piece, s, y);
    Json e;
    e["t"] = x[traj.time_index];
    e["s"] = s;
    e["y"] = y;
    e["theta_s"] = x[2];
    e["inputs"] = vec(u);
    e["pos3d"] = {f.p.x, f.p.y, f.p.z};
    if (two_track) {
      using M = models::TwoTrackModel;
      const auto ev = models::evaluate_two_track<double>(surface, piece, x.data(), u.data(), agent.params);
      e["velocities"] = {x[M::kV1], x[M::kV2], x[M::kW3]};
      e["speed"] = std::hypot(x[M::kV1], x[M::kV2]);
      e["wheel_loads"] = {ev.normal[0], ev.normal[1], ev.normal[2], ev.normal[3]};
    } else {
      using M = models::KinematicModel;
      const auto ev = models::evaluate_kinematic<double>(surface, piece, x.data(), u.data(), agent.params);
      e["velocities"] = {x[M::kV], ev.v2, ev.w3};
      e["speed"] = std::hypot(x[M::kV], ev.v2);
    }
    samples.push_back(e);
  }
  Json j;
  j["model"] = std::string(racing::to_string(agent.model));
  j["samples"] = samples;
  j["collocation"] = collocation_to_json(traj);
  return j;
}

Trajectory trajectory_from_json(const Json& j) {
  try {
    const Json& c = j.at("collocation");
    Trajectory t;
    t.model = c.at("model").get<std::string>();
    t.nx = c.at("nx").get<int>();
    t.nu = c.at("nu").get<int>();
    t.s_index = c.at("s_index").get<int>();
    t.y_index = c.at("y_index").get<int>();
    t.time_index = c.at("time_index").get<int>();
    t.tau = c.at("tau").get<std::vector<double>>();
    t.boundaries = c.at("boundaries").get<std::vector<double>>();
    for (const auto& xk : c.at("x")) {
      t.x.emplace_back();
      for (const auto& v : xk) t.x.back().push_back(to_vec(v));
    }
    for (const auto& uk : c.at("u")) {
      t.u.emplace_back();
      for (const auto& v : uk) t.u.back().push_back(to_vec(v));
    }
    t.final_state = to_vec(c.at("final_state"));
    if (t.boundaries.size() != t.x.size() + 1 || t.u.size() != t.x.size())
      throw Error(ErrorCode::io_error, "collocation arrays have inconsistent sizes");
    return t;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::io_error, std::string("malformed trajectory: ") + e.what());
  }
}

Json stats_to_json(const nlp::NlpSolution& sol, double max_defect) {
  return {{"status", nlp::to_string(sol.status)}, {"iterations", sol.iterations},
          {"wall_time", sol.wall_time},            {"kkt_residual", sol.kkt_residual},
          {"constraint_violation", sol.constraint_violation},
          {"max_defect", max_defect},              {"objective", sol.objective},
          {"message", sol.message}};
}

Json stats_to_json(const racing::StepStats& st) {
  return {{"status", nlp::to_string(st.status)}, {"iterations", st.iterations}, {"wall_time", st.wall_time},
          {"kkt_residual", st.kkt_residual},     {"max_defect", st.max_defect}, {"objective", st.objective},
          {"message", st.message}};
}

Json raceline_result_json(const ScenarioFile& sc, const racing::RacelineResult& res,
                          const geometry::TrackSurface& surface, const std::string& mesh_ref) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["scenario"] = to_json(sc);
  const auto& agent = sc.agents.at(0);
  Json tj = trajectory_to_json(res.traj, surface, agent.spec);
  tj["role"] = agent.role;
  j["trajectories"] = Json::array({tj});
  j["report"] = {{"finish_time", res.finish_time()}, {"solver", stats_to_json(res.solution, res.max_defect)}};
  j["mesh"] = mesh_ref;
  return j;
}

Json overtake_result_json(const ScenarioFile& sc, const racing::OvertakeResult& res,
                          const racing::VerifyReport& v, const geometry::TrackSurface& surface,
                          const std::string& mesh_ref) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["scenario"] = to_json(sc);
  const auto& target = sc.agent("target").spec;
  const auto& ego = sc.agent("ego").spec;
  Json tt = trajectory_to_json(res.target_traj, surface, target);
  tt["role"] = "target";
  Json tw = trajectory_to_json(res.ego_warmstart_traj, surface, ego);
  tw["role"] = "ego_warmstart";
  Json te = trajectory_to_json(res.ego_traj, surface, ego);
  te["role"] = "ego";
  j["trajectories"] = Json::array({tt, tw, te});
  Json rep;
  rep["target_finish_time"] = res.target_finish_time;
  rep["ego_warmstart_finish_time"] = res.warmstart_finish_time;
  rep["ego_finish_time"] = res.ego_finish_time;
  rep["overtaken"] = res.overtaken;
  rep["r"] = res.r;
  rep["min_param_separation"] = res.min_param_separation;
  rep["knot_assignment_iterations"] = res.knot_assignment_iterations;
  rep["fixed_point_converged"] = res.fixed_point_converged;
  rep["status"] = nlp::to_string(res.status());
  rep["solver"] = {{"target", stats_to_json(res.target_stats)},
                   {"ego_warmstart", stats_to_json(res.warmstart_stats)},
                   {"ego", stats_to_json(res.ego_stats)}};
  rep["verify"] = {{"min_param_separation", v.min_param_separation},
                   {"min_euclid_separation", v.min_euclid_separation},
                   {"time_of_min_euclid", v.time_of_min_euclid},
                   {"body_clearance", v.body_clearance},
                   {"collision", v.collision},
                   {"max_bound_violation", v.max_bound_violation},
                   {"min_node_collision_residual", v.min_node_collision_residual},
                   {"time_increasing", v.time_increasing},
                   {"max_defect", v.max_defect}};
  j["report"] = rep;
  j["mesh"] = mesh_ref;
  return j;
}

Json mesh_to_json(const geometry::TriangleMesh& mesh, const geometry::TrackDefinition& def) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["track"] = to_json(def);
  j["vertices"] = Json::array();
  for (const auto& v : mesh.vertices) j["vertices"].push_back({v.x, v.y, v.z});
  j["faces"] = Json::array();
  for (const auto& f : mesh.faces) j["faces"].push_back({f[0], f[1], f[2]});
  j["coords"] = Json::array();
  for (const auto& c : mesh.coords) j["coords"].push_back({c.s, c.y});
  return j;
}

RecheckReport recheck_result(const Json& result) {
  RecheckReport rep;
  const ScenarioFile sc = scenario_from_json(result.at("scenario"));
  auto surface = std::make_shared<const geometry::TrackSurface>(sc.track);
  const Json& trajs = result.at("trajectories");

  Trajectory target;
  bool have_target = false;
  for (const auto& tj : trajs)
    if (tj.at("role") == "target") {
      target = trajectory_from_json(tj);
      have_target = true;
    }

  for (const auto& tj : trajs) {
    const std::string role = tj.at("role").get<std::string>();
    const Trajectory traj = trajectory_from_json(tj);
    racing::RacelineProblem p;
    if (sc.mode == Mode::raceline) {
      p = raceline_problem(sc, surface);
    } else {
      const auto o = overtake_scenario(sc, surface);
      p = role == "target" ? racing::target_problem(o) : racing::ego_problem(o);
    }
    auto nlp_data = racing::build_raceline_nlp(p);
    nlp_data.tr.nlp.finalize();
    const nlp::Vector z = transcription::pack(nlp_data.tr.layout, traj);
    rep.max_defect = std::max(rep.max_defect, transcription::max_defect(nlp_data.tr, z));
    rep.max_violation = std::max(rep.max_violation, nlp::constraint_violation(nlp_data.tr.nlp, z));

    double prev_t = -std::numeric_limits<double>::infinity();
    for (const auto& e : tj.at("samples")) {
      const double t = e.at("t").get<double>();
      if (!(t > prev_t)) rep.time_sorted = false;
      prev_t = t;
      const auto f = surface->frame({e.at("s").get<double>(), e.at("y").get<double>()});
      const auto& p3 = e.at("pos3d");
      rep.max_pos3d_error = std::max({rep.max_pos3d_error, std::abs(p3[0].get<double>() - f.p.x),
                                      std::abs(p3[1].get<double>() - f.p.y), std::abs(p3[2].get<double>() - f.p.z)});
    }

    if (role == "ego" && have_target) {
      const auto spline = racing::reparam_by_time(target);
      for (const auto& n : traj.nodes()) {
        if (n.j == 0) continue;
        const Eigen::VectorXd x = traj.node_state(n);
        rep.min_collision_residual =
            std::min(rep.min_collision_residual,
                     racing::collision_residual(x[traj.s_index], x[traj.y_index], x[traj.time_index], spline, sc.r));
      }
    }
    ++rep.trajectories;
  }
  return rep;
}

}  // namespace raceopt::io
