#include "raceopt/io/scenario.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "raceopt/common/error.hpp"

namespace raceopt::io {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::invalid_scenario, msg); }

/// Typed access to one JSON object. Every key read is recorded; finish()
/// rejects the rest.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_ + " must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const Json& at(const std::string& key) {
    if (!has(key)) fail(path_ + "." + key + " is required");
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_number()) fail(where(key) + " must be a number");
    return v.get<double>();
  }

  double optional_number(const std::string& key, double none) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return none;
    return number(key, none);
  }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) fail(where(key) + " must be an integer");
    return v.get<int>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_string()) fail(where(key) + " must be a string");
    return v.get<std::string>();
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail("unknown key " + path_ + "." + it.key());
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
auto converting(const std::string& where, F f) {
  try {
    return f();
  } catch (const Error& e) {
    fail(where + ": " + e.what());
  }
}

Json number_or_null(double v, bool present) { return present ? Json(v) : Json(nullptr); }

geometry::TrackDefinition track_from_json(const Json& j) {
  Reader r(j, "track");
  geometry::TrackDefinition def;
  const std::string kind = r.string("kind", "flat_frenet");
  def.kind = converting(r.where("kind"), [&] { return geometry::surface_kind_from_string(kind); });
  const Json& segs = r.at("segments");
  if (!segs.is_array()) fail("track.segments must be an array");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    Reader s(segs[i], "track.segments[" + std::to_string(i) + "]");
    def.segments.push_back({s.number("length", 0.0), s.number("curvature", 0.0)});
    s.finish();
  }
  if (r.has("banking")) {
    const Json& bank = r.at("banking");
    if (!bank.is_array()) fail("track.banking must be an array");
    for (std::size_t i = 0; i < bank.size(); ++i) {
      Reader b(bank[i], "track.banking[" + std::to_string(i) + "]");
      def.banking.push_back({b.number("s", 0.0), b.number("angle", 0.0)});
      b.finish();
    }
  }
  def.profile_radius = r.number("profile_radius", def.profile_radius);
  def.half_width = r.number("half_width", def.half_width);
  def.centerline_offset = r.number("centerline_offset", def.centerline_offset);
  r.finish();
  return def;
}

models::VehicleParams params_from_json(const Json& j, const std::string& path) {
  Reader r(j, path);
  models::VehicleParams p;
  p.mass = r.number("mass", p.mass);
  p.lf = r.number("lf", p.lf);
  p.lr = r.number("lr", p.lr);
  p.tf = r.number("tf", p.tf);
  p.tr = r.number("tr", p.tr);
  p.h = r.number("h", p.h);
  p.izz = r.number("izz", p.izz);
  p.ixx = r.number("ixx", p.ixx);
  p.iyy = r.number("iyy", p.iyy);
  p.mu = r.number("mu", p.mu);
  p.c_drag = r.number("c_drag", p.c_drag);
  p.chi = r.number("chi", p.chi);
  p.a_max = r.number("a_max", p.a_max);
  p.a_min = r.number("a_min", p.a_min);
  p.delta_max = r.number("delta_max", p.delta_max);
  p.slip_ratio_max = r.number("slip_ratio_max", p.slip_ratio_max);
  p.n_wheel_min = r.number("n_wheel_min", p.n_wheel_min);
  p.n_wheel_max = r.number("n_wheel_max", p.n_wheel_max);
  p.n_net_min = r.number("n_net_min", p.n_net_min);
  p.n_net_max = r.number("n_net_max", p.n_net_max);
  p.c_cone = r.number("c_cone", p.c_cone);
  p.length = r.number("length", p.length);
  p.width = r.number("width", p.width);
  if (r.has("tire")) {
    Reader t(r.at("tire"), path + ".tire");
    auto& c = p.tire;
    c.bx = t.number("bx", c.bx);
    c.cx = t.number("cx", c.cx);
    c.ex = t.number("ex", c.ex);
    c.by = t.number("by", c.by);
    c.cy = t.number("cy", c.cy);
    c.ey = t.number("ey", c.ey);
    c.bx1 = t.number("bx1", c.bx1);
    c.by1 = t.number("by1", c.by1);
    t.finish();
  }
  r.finish();
  return p;
}

AgentRecord agent_from_json(const Json& j, const std::string& path) {
  Reader r(j, path);
  AgentRecord a;
  a.role = r.string("role", "ego");
  if (a.role != "ego" && a.role != "target") fail(r.where("role") + " must be \"ego\" or \"target\"");
  const std::string model = r.string("model", "kinematic");
  a.spec.model = converting(r.where("model"), [&] { return racing::model_kind_from_string(model); });
  a.spec.v0 = r.number("v0", a.spec.v0);
  a.spec.s0 = r.number("s0", a.spec.s0);
  a.spec.y0 = r.number("y0", a.spec.y0);
  if (r.has("params")) a.spec.params = params_from_json(r.at("params"), path + ".params");
  r.finish();
  return a;
}

void solver_from_json(const Json& j, ScenarioFile& sc) {
  Reader r(j, "solver");
  auto& o = sc.solver;
  o.tol = r.number("tol", o.tol);
  o.max_iterations = r.integer("max_iterations", o.max_iterations);
  o.mu_init = r.number("mu_init", o.mu_init);
  o.bound_push = r.number("bound_push", o.bound_push);
  o.max_outer_iterations = r.integer("max_outer_iterations", o.max_outer_iterations);
  o.max_inner_iterations = r.integer("max_inner_iterations", o.max_inner_iterations);
  o.initial_penalty = r.number("initial_penalty", o.initial_penalty);
  o.penalty_growth = r.number("penalty_growth", o.penalty_growth);
  o.max_penalty = r.number("max_penalty", o.max_penalty);
  o.lbfgs_memory = r.integer("lbfgs_memory", o.lbfgs_memory);
  o.max_wall_time = r.optional_number("max_wall_time", std::numeric_limits<double>::infinity());
  const std::string backend = r.string("backend", "external");
  if (backend == "builtin")
    sc.backend = nlp::Backend::builtin;
  else if (backend == "external")
    sc.backend = nlp::Backend::external;
  else
    fail("solver.backend must be \"builtin\" or \"external\"");
  r.finish();
}

void check_options(const nlp::SolverOptions& o) {
  if (!(o.tol > 0.0)) fail("solver.tol must be > 0");
  if (o.max_iterations < 1 || o.max_outer_iterations < 1 || o.max_inner_iterations < 1)
    fail("solver iteration limits must be >= 1");
  if (!(o.mu_init > 0.0) || !(o.bound_push > 0.0)) fail("solver.mu_init and solver.bound_push must be > 0");
  if (!(o.initial_penalty > 0.0) || !(o.penalty_growth > 1.0) || !(o.max_penalty >= o.initial_penalty))
    fail("solver penalty schedule must satisfy initial > 0, growth > 1, max >= initial");
  if (o.lbfgs_memory < 1) fail("solver.lbfgs_memory must be >= 1");
  if (!(o.max_wall_time > 0.0)) fail("solver.max_wall_time must be > 0");
}

}  // namespace

std::string_view to_string(Mode mode) { return mode == Mode::raceline ? "raceline" : "overtake"; }

const AgentRecord& ScenarioFile::agent(const std::string& role) const {
  for (const auto& a : agents)
    if (a.role == role) return a;
  fail("scenario has no agent with role " + role);
}

Json to_json(const geometry::TrackDefinition& def) {
  Json j;
  j["kind"] = std::string(geometry::to_string(def.kind));
  j["segments"] = Json::array();
  for (const auto& s : def.segments) j["segments"].push_back({{"length", s.length}, {"curvature", s.curvature}});
  j["banking"] = Json::array();
  for (const auto& b : def.banking) j["banking"].push_back({{"s", b.s}, {"angle", b.angle}});
  j["profile_radius"] = def.profile_radius;
  j["half_width"] = def.half_width;
  j["centerline_offset"] = def.centerline_offset;
  return j;
}

Json to_json(const models::VehicleParams& p) {
  Json j;
  j["mass"] = p.mass;
  j["lf"] = p.lf;
  j["lr"] = p.lr;
  j["tf"] = p.tf;
  j["tr"] = p.tr;
  j["h"] = p.h;
  j["izz"] = p.izz;
  j["ixx"] = p.ixx;
  j["iyy"] = p.iyy;
  j["mu"] = p.mu;
  j["c_drag"] = p.c_drag;
  j["chi"] = p.chi;
  j["a_max"] = p.a_max;
  j["a_min"] = p.a_min;
  j["delta_max"] = p.delta_max;
  j["slip_ratio_max"] = p.slip_ratio_max;
  j["n_wheel_min"] = p.n_wheel_min;
  j["n_wheel_max"] = p.n_wheel_max;
  j["n_net_min"] = p.n_net_min;
  j["n_net_max"] = p.n_net_max;
  j["c_cone"] = p.c_cone;
  j["length"] = p.length;
  j["width"] = p.width;
  const auto& c = p.tire;
  j["tire"] = {{"bx", c.bx}, {"cx", c.cx}, {"ex", c.ex}, {"by", c.by},
               {"cy", c.cy}, {"ey", c.ey}, {"bx1", c.bx1}, {"by1", c.by1}};
  return j;
}

Json to_json(const ScenarioFile& sc) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["mode"] = std::string(to_string(sc.mode));
  j["track"] = to_json(sc.track);
  j["agents"] = Json::array();
  for (const auto& a : sc.agents) {
    Json ja;
    ja["role"] = a.role;
    ja["model"] = std::string(racing::to_string(a.spec.model));
    ja["v0"] = a.spec.v0;
    ja["s0"] = a.spec.s0;
    ja["y0"] = a.spec.y0;
    ja["params"] = to_json(a.spec.params);
    j["agents"].push_back(ja);
  }
  j["grid"] = {{"intervals", sc.intervals}, {"degree", sc.degree}, {"s_end", number_or_null(sc.s_end, sc.s_end >= 0.0)}};
  j["collision"] = {{"r", sc.r}};
  j["weights"] = {{"w_u", sc.w_u}, {"w_du", sc.w_du}};
  const auto& o = sc.solver;
  j["solver"] = {{"tol", o.tol},
                 {"max_iterations", o.max_iterations},
                 {"mu_init", o.mu_init},
                 {"bound_push", o.bound_push},
                 {"max_outer_iterations", o.max_outer_iterations},
                 {"max_inner_iterations", o.max_inner_iterations},
                 {"initial_penalty", o.initial_penalty},
                 {"penalty_growth", o.penalty_growth},
                 {"max_penalty", o.max_penalty},
                 {"lbfgs_memory", o.lbfgs_memory},
                 {"max_wall_time", number_or_null(o.max_wall_time, std::isfinite(o.max_wall_time))},
                 {"backend", sc.backend == nlp::Backend::builtin ? "builtin" : "external"}};
  return j;
}

ScenarioFile scenario_from_json(const Json& j) {
  Reader r(j, "scenario");
  if (!r.at("schema_version").is_number_integer() || r.at("schema_version").get<int>() != kSchemaVersion)
    fail("schema_version must be " + std::to_string(kSchemaVersion));
  ScenarioFile sc;
  const std::string mode = r.string("mode", "raceline");
  if (mode == "raceline")
    sc.mode = Mode::raceline;
  else if (mode == "overtake")
    sc.mode = Mode::overtake;
  else
    fail("mode must be \"raceline\" or \"overtake\"");
  sc.track = track_from_json(r.at("track"));
  const Json& agents = r.at("agents");
  if (!agents.is_array()) fail("agents must be an array");
  for (std::size_t i = 0; i < agents.size(); ++i)
    sc.agents.push_back(agent_from_json(agents[i], "agents[" + std::to_string(i) + "]"));
  if (r.has("grid")) {
    Reader g(r.at("grid"), "grid");
    sc.intervals = g.integer("intervals", sc.intervals);
    sc.degree = g.integer("degree", sc.degree);
    sc.s_end = g.optional_number("s_end", -1.0);
    g.finish();
  }
  if (r.has("collision")) {
    Reader c(r.at("collision"), "collision");
    sc.r = c.number("r", sc.r);
    c.finish();
  }
  if (r.has("weights")) {
    Reader w(r.at("weights"), "weights");
    sc.w_u = w.number("w_u", sc.w_u);
    sc.w_du = w.number("w_du", sc.w_du);
    w.finish();
  }
  if (r.has("solver")) solver_from_json(r.at("solver"), sc);
  r.finish();
  return sc;
}

ScenarioFile parse_scenario(const std::string& text) { return scenario_from_json(parse_json(text, "scenario")); }

ScenarioFile load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

std::string serialize(const ScenarioFile& sc) { return canonical_dump(to_json(sc)); }

racing::RacelineProblem raceline_problem(const ScenarioFile& sc,
                                         std::shared_ptr<const geometry::TrackSurface> surface) {
  racing::RacelineProblem p;
  p.surface = std::move(surface);
  p.agent = sc.agents.at(0).spec;
  p.intervals = sc.intervals;
  p.degree = sc.degree;
  p.s_end = sc.s_end;
  p.w_u = sc.w_u;
  p.w_du = sc.w_du;
  p.solver.options = sc.solver;
  p.solver.backend = sc.backend;
  return p;
}

racing::OvertakeScenario overtake_scenario(const ScenarioFile& sc,
                                           std::shared_ptr<const geometry::TrackSurface> surface) {
  racing::OvertakeScenario o;
  o.surface = std::move(surface);
  o.target = sc.agent("target").spec;
  o.ego = sc.agent("ego").spec;
  o.r = sc.r;
  o.intervals = sc.intervals;
  o.degree = sc.degree;
  o.s_end = sc.s_end;
  o.w_u = sc.w_u;
  o.w_du = sc.w_du;
  o.solver.options = sc.solver;
  o.solver.backend = sc.backend;
  return o;
}

void validate(const ScenarioFile& sc) {
  check_options(sc.solver);
  if (sc.mode == Mode::raceline) {
    if (sc.agents.size() != 1) fail("raceline mode needs exactly one agent");
  } else {
    if (sc.agents.size() != 2) fail("overtake mode needs exactly two agents");
    if (sc.agents[0].role == sc.agents[1].role) fail("overtake mode needs one \"target\" and one \"ego\" agent");
  }
  geometry::validate(sc.track);
  auto surface = std::make_shared<const geometry::TrackSurface>(sc.track);
  if (sc.mode == Mode::raceline) {
    racing::validate(raceline_problem(sc, surface));
  } else {
    const auto o = overtake_scenario(sc, surface);
    racing::validate(o);
    racing::validate(racing::target_problem(o));
    racing::validate(racing::ego_problem(o));
  }
}

}  // namespace raceopt::io
