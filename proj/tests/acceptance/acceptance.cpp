// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Optional arguments select criteria by name.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "raceopt/geometry/kinematics.hpp"
#include "raceopt/geometry/surface.hpp"
#include "raceopt/io/scenario.hpp"
#include "raceopt/racing/overtake.hpp"
#include "raceopt/racing/raceline.hpp"
#include "../support/linear_ode.hpp"
#include "../support/oracles.hpp"
#include "../support/problems.hpp"
#include "../support/tracks.hpp"

using namespace raceopt;
using namespace raceopt::test_support;
using geometry::TrackSurface;
using Clock = std::chrono::steady_clock;

namespace {

const std::filesystem::path kScenarios = std::filesystem::path(RACEOPT_SOURCE_DIR) / "scenarios";

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "!") + what;
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// --- geometry --------------------------------------------------------------------

Outcome geometry_exactness() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937 rng(2024);
  struct Named {
    const char* name;
    TrackSurface surf;
  };
  const std::vector<Named> tracks = {{"uturn", TrackSurface(geometry::uturn_track())},
                                     {"chicane", TrackSurface(geometry::chicane_track())}};
  for (const auto& t : tracks) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) worst = std::max(worst, forms_fd_error(t.surf, random_on_road(t.surf, rng)));
    o.require(worst <= 1e-6, fmt("%s forms err %.2e", t.name, worst));
  }

  const TrackSurface flat(geometry::flat_straight_track(200.0, 6.0));
  const double mass = models::VehicleParams{}.mass, mg = mass * geometry::kGravityMagnitude;
  std::uniform_real_distribution<double> sd(0.0, 60.0), yd(-10.0, 10.0);
  double worst_i = 0.0, worst_ii = 0.0, worst_n = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto f = flat.frame(random_on_road(flat, rng));
    worst_i = std::max({worst_i, std::abs(f.first_form.ss - 1.0), std::abs(f.first_form.sy),
                        std::abs(f.first_form.yy - 1.0)});
    worst_ii = std::max({worst_ii, std::abs(f.second_form.ss), std::abs(f.second_form.sy),
                         std::abs(f.second_form.yy)});
    worst_n = std::max(worst_n, std::abs(geometry::net_normal_force(f, sd(rng), yd(rng), mass) - mg) / mg);
  }
  o.require(worst_i <= 1e-12 && worst_ii <= 1e-12 && worst_n <= 1e-12,
            fmt("flat |I-Id| %.1e |II| %.1e N rel %.1e", worst_i, worst_ii, worst_n));
  const double t = seconds_since(t0);
  o.require(t < 10.0, fmt("%.3f s", t));
  return o;
}

// --- models ----------------------------------------------------------------------

Outcome flat_reduction() {
  Outcome o;
  std::mt19937 rng(99);
  const models::VehicleParams p;
  double worst_k = 0.0, worst_t = 0.0;
  const std::vector<double> kappas = {0.0, 0.02, -0.035};
  for (int i = 0; i < 100; ++i) {
    const double kappa = kappas[i % kappas.size()];
    const TrackSurface surf(one_segment(geometry::SurfaceKind::flat_frenet, 100.0, kappa, 5.0));
    const KinState xk = random_kinematic_state(surf, rng);
    const KinInput uk = random_kinematic_input(rng);
    const auto rk = planar_kinematic(xk, uk, p, kappa);
    const auto dk = models::kinematic_rhs(xk, uk, surf, p);
    for (int c = 0; c < 4; ++c) worst_k = std::max(worst_k, std::abs(dk[c] - rk[c]) / std::max(1.0, std::abs(rk[c])));

    const TwoState xt = random_two_track_state(surf, rng);
    const TwoInput ut = random_two_track_input(rng);
    const auto rt = planar_two_track(xt, ut, p, kappa);
    const auto dt = models::two_track_rhs(xt, ut, surf, p);
    for (int c = 0; c < 6; ++c)
      worst_t = std::max(worst_t, std::abs(dt[c] - rt.dx[c]) / std::max(1.0, std::abs(rt.dx[c])));
  }
  o.require(worst_k <= 1e-10, fmt("kinematic %.1e", worst_k));
  o.require(worst_t <= 1e-10, fmt("two-track %.1e", worst_t));
  return o;
}

// Central differences of the constraint vector against the assembled sparse
// Jacobian; entries outside the pattern must vanish.
struct JacobianCheck {
  double worst = 0.0;
  double outside = 0.0;
};

JacobianCheck transcribed_jacobian_error(const nlp::StructuredNlp& p, const nlp::Vector& z) {
  JacobianCheck r;
  nlp::SparseMatrix J = p.jacobian_structure();
  p.jacobian(z, J);
  const Eigen::MatrixXd dense = Eigen::MatrixXd(J);
  Eigen::MatrixXd pattern = Eigen::MatrixXd::Zero(J.rows(), J.cols());
  for (int c = 0; c < J.outerSize(); ++c)
    for (nlp::SparseMatrix::InnerIterator it(J, c); it; ++it) pattern(it.row(), it.col()) = 1.0;
  nlp::Vector gp, gm;
  for (int c = 0; c < p.num_variables(); ++c) {
    const double h = 1e-6 * std::max(1.0, std::abs(z[c]));
    nlp::Vector zp = z, zm = z;
    zp[c] += h;
    zm[c] -= h;
    p.constraints(zp, gp);
    p.constraints(zm, gm);
    for (int row = 0; row < p.num_constraints(); ++row) {
      const double fd = (gp[row] - gm[row]) / (2.0 * h);
      if (pattern(row, c) == 0.0)
        r.outside = std::max(r.outside, std::abs(fd));
      else
        r.worst = std::max(r.worst, std::abs(dense(row, c) - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  return r;
}

Outcome ad_correctness() {
  Outcome o;
  std::mt19937 rng(314);
  TrackSurface chicane(geometry::chicane_track()), uturn(geometry::uturn_track());
  const std::vector<const TrackSurface*> surfaces = {&uturn, &chicane};
  double worst_k = 0.0, worst_t = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto& s = *surfaces[i % 2];
    worst_k = std::max(worst_k, model_jacobian_error<models::KinematicModel>(s, random_kinematic_state(s, rng),
                                                                             random_kinematic_input(rng),
                                                                             KinematicRhs{}));
    worst_t = std::max(worst_t, model_jacobian_error<models::TwoTrackModel>(s, random_two_track_state(s, rng),
                                                                            random_two_track_input(rng),
                                                                            TwoTrackRhs{}));
  }
  o.require(worst_k <= 1e-6, fmt("kinematic rhs %.1e", worst_k));
  o.require(worst_t <= 1e-6, fmt("two-track rhs %.1e", worst_t));

  // Transcribed raceline NLP on the chicane, 100 points per model around the
  // speed-profile guess.
  auto surf = std::make_shared<const TrackSurface>(geometry::chicane_track());
  for (auto kind : {racing::ModelKind::kinematic, racing::ModelKind::two_track}) {
    racing::RacelineProblem p;
    p.surface = surf;
    p.agent.model = kind;
    p.agent.v0 = 15.0;
    p.intervals = 10;
    auto nlp = racing::build_raceline_nlp(p);
    nlp.tr.nlp.finalize();
    const nlp::Vector z0 = nlp.tr.nlp.initial_point();
    std::normal_distribution<double> noise(0.0, 1e-2);
    JacobianCheck worst;
    for (int i = 0; i < 100; ++i) {
      nlp::Vector z = z0;
      for (int c = 0; c < z.size(); ++c) z[c] += noise(rng);
      const auto r = transcribed_jacobian_error(nlp.tr.nlp, z);
      worst.worst = std::max(worst.worst, r.worst);
      worst.outside = std::max(worst.outside, r.outside);
    }
    const char* name = kind == racing::ModelKind::kinematic ? "kinematic" : "two-track";
    o.require(worst.worst <= 1e-6, fmt("%s nlp jac %.1e", name, worst.worst));
    o.require(worst.outside <= 1e-8, fmt("%s off-pattern %.1e", name, worst.outside));
  }
  return o;
}

// --- transcription ---------------------------------------------------------------

Outcome collocation_order() {
  Outcome o;
  std::vector<double> lh, le;
  std::string ladder;
  for (int K : {4, 8, 16, 32, 64}) {
    const double e = linear_ode_endpoint_error(-1.0, K, 3);
    lh.push_back(std::log(1.0 / K));
    le.push_back(std::log(e));
    ladder += fmt("%s%d:%.1e", ladder.empty() ? "" : " ", K, e);
  }
  // Least-squares slope of log error against log h.
  const double n = static_cast<double>(lh.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lh.size(); ++i) {
    sx += lh[i];
    sy += le[i];
    sxx += lh[i] * lh[i];
    sxy += lh[i] * le[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  o.require(slope >= 4.5, fmt("slope %.2f", slope));
  o.detail += " [" + ladder + "]";
  return o;
}

// --- solver ----------------------------------------------------------------------

Outcome solver_suite() {
  Outcome o;
  const auto t0 = Clock::now();
  const racing::SolveConfig cfg;  // default backend
  auto run = [&](const nlp::StructuredNlp& p) {
    racing::SolveConfig c = cfg;
    c.options.tol = 1e-6;
    c.options.warmstart = p.initial_point();
    return racing::run_solver(p, c);
  };
  auto optimal = [](const nlp::NlpSolution& s) { return s.status == nlp::SolveStatus::optimal; };

  const auto bq = run(bound_qp());
  o.require(optimal(bq) && std::abs(bq.z[0] - 2.0) <= 1e-6, fmt("bound-qp z %.8f", bq.z[0]));

  const auto rb = run(rosenbrock_problem());
  const double rb_err = std::max(std::abs(rb.z[0] - 1.0), std::abs(rb.z[1] - 1.0));
  o.require(optimal(rb) && rb_err <= 1e-5, fmt("rosenbrock err %.1e", rb_err));

  double qp_err = 0.0;
  bool qp_ok = true;
  for (unsigned seed : {1u, 2u, 3u}) {
    const auto qp = equality_qp(seed);
    const auto sol = run(qp.nlp);
    qp_ok = qp_ok && optimal(sol);
    const Eigen::VectorXd ref = kkt_oracle(qp);
    qp_err = std::max(qp_err, (sol.z - ref.head(sol.z.size())).lpNorm<Eigen::Infinity>());
  }
  o.require(qp_ok && qp_err <= 1e-5, fmt("equality-qp vs kkt %.1e", qp_err));

  const int K = 20;
  const auto di = double_integrator(K);
  const auto ds = run(di.nlp);
  const double T = ds.z[di.layout.boundary(K, 2)];
  o.require(optimal(ds) && std::abs(T - 2.0) <= 0.02, fmt("double integrator T %.5f", T));

  const double t = seconds_since(t0);
  o.require(t < 60.0, fmt("%.3f s", t));
  return o;
}

// --- raceline --------------------------------------------------------------------

// v^2 times the world-path curvature at node (k, j), from central differences
// of the interval polynomial mapped through the surface.
double lateral_demand(const transcription::Trajectory& tr, const TrackSurface& surf, int k, int j) {
  const double h = 1e-4;
  // The stencil stays inside the interval, so an end node is read 1e-4 in.
  const double th = std::clamp(j == 0 ? 0.0 : tr.tau[j - 1], h, 1.0 - h);
  auto world = [&](double a) {
    const auto x = tr.interp_state(k, a);
    return surf.frame({x[tr.s_index], x[tr.y_index]}).p;
  };
  const Vec3<double> pm = world(th - h), p0 = world(th), pp = world(th + h);
  const Vec3<double> d1 = (pp - pm) / (2 * h), d2 = (pp - 2.0 * p0 + pm) / (h * h);
  const double dt = tr.interp_state_derivative(k, th)[tr.time_index];
  const Vec3<double> c{d1.y * d2.z - d1.z * d2.y, d1.z * d2.x - d1.x * d2.z, d1.x * d2.y - d1.y * d2.x};
  return std::sqrt(dot3(c, c)) / (std::sqrt(dot3(d1, d1)) * dt * dt);
}

Outcome raceline_sanity() {
  Outcome o;
  {
    racing::RacelineProblem p;
    p.surface = std::make_shared<TrackSurface>(geometry::flat_straight_track(200.0, 5.0));
    p.agent.v0 = 10.0;
    p.intervals = 40;
    const auto r = racing::solve_raceline(p);
    const auto& prm = p.agent.params;
    const double expect = straight_time(200.0, 10.0, prm.a_max, prm.c_drag / prm.mass);
    const double rel = std::abs(r.finish_time() - expect) / expect;
    o.require(r.solution.status == nlp::SolveStatus::optimal && rel <= 5e-3,
              fmt("straight T %.4f vs %.4f (rel %.1e)", r.finish_time(), expect, rel));
  }
  {
    geometry::TrackDefinition def = geometry::uturn_track();
    def.kind = geometry::SurfaceKind::flat_frenet;
    def.profile_radius = 0.0;
    racing::RacelineProblem p;
    p.surface = std::make_shared<TrackSurface>(def);
    p.agent.model = racing::ModelKind::kinematic;
    p.agent.v0 = 20.0;
    p.agent.y0 = def.centerline_offset;
    p.intervals = 60;
    const auto r = racing::solve_raceline(p);
    const auto& prm = p.agent.params;
    const auto& tr = r.traj;
    // The arc is the middle segment; the apex is its slowest node.
    const double arc0 = def.segments[0].length, arc1 = arc0 + def.segments[1].length;
    double vmin = 1e300, demand = 0.0, slack = 0.0;
    for (int k = 0; k < tr.intervals(); ++k)
      for (int j = 1; j <= tr.degree(); ++j) {
        const Eigen::VectorXd& x = tr.x[k][j];
        const double s = x[tr.s_index];
        if (s < arc0 || s > arc1 || x[models::KinematicModel::kV] >= vmin) continue;
        vmin = x[models::KinematicModel::kV];
        demand = lateral_demand(tr, *p.surface, k, j);
        KinState xs;
        KinInput us;
        for (int i = 0; i < tr.nx; ++i) xs[i] = x[i];
        for (int i = 0; i < tr.nu; ++i) us[i] = tr.u[k][j - 1][i];
        const double w = prm.mass * geometry::kGravityMagnitude;
        slack = models::kinematic_force_residuals(xs, us, *p.surface, prm).cone_slack / (w * w);
      }
    const double cap = prm.c_cone * prm.mu * geometry::kGravityMagnitude;
    o.require(r.solution.status == nlp::SolveStatus::optimal, "flat u-turn optimal");
    o.require(demand <= cap * (1.0 + 1e-2), fmt("apex v^2 kappa %.3f vs %.3f", demand, cap));
    o.require(std::abs(slack) <= 1e-3, fmt("apex cone slack %.1e", slack));
  }
  return o;
}

// --- overtakes -------------------------------------------------------------------

struct ShippedRun {
  std::string name;
  bool expect_overtake = false;
  racing::OvertakeScenario sc;
  racing::OvertakeResult res;
  double seconds = 0.0;
};

const std::vector<ShippedRun>& shipped_runs() {
  static const std::vector<ShippedRun> runs = [] {
    std::vector<ShippedRun> out;
    const std::vector<std::pair<std::string, bool>> files = {{"uturn_symmetric", false},
                                                             {"uturn_overtake", true},
                                                             {"chicane_symmetric", false},
                                                             {"chicane_overtake", true}};
    for (const auto& [name, expect] : files) {
      ShippedRun r;
      r.name = name;
      r.expect_overtake = expect;
      const auto file = io::load_scenario((kScenarios / (name + ".json")).string());
      io::validate(file);
      r.sc = io::overtake_scenario(file, std::make_shared<TrackSurface>(file.track));
      const auto t0 = Clock::now();
      r.res = racing::solve_overtake(r.sc);
      r.seconds = seconds_since(t0);
      out.push_back(std::move(r));
    }
    return out;
  }();
  return runs;
}

Outcome overtake_reproduction() {
  Outcome o;
  for (const auto& r : shipped_runs()) {
    const bool optimal = r.res.status() == nlp::SolveStatus::optimal;
    bool ok = optimal && r.res.overtaken == r.expect_overtake && r.seconds < 600.0;
    std::string d = fmt("%s overtaken=%d T_ego %.3f T_tgt %.3f %.0f s", r.name.c_str(), int(r.res.overtaken),
                        r.res.ego_finish_time, r.res.target_finish_time, r.seconds);
    if (!optimal) d += " status " + std::string(nlp::to_string(r.res.status()));
    if (r.expect_overtake) {
      ok = ok && r.res.min_param_separation >= 2.0 * r.res.r - 1e-3;
      d += fmt(" sep %.3f/%.3f", r.res.min_param_separation, 2.0 * r.res.r);
    }
    o.require(ok, d);
  }
  return o;
}

Outcome collision_soundness() {
  Outcome o;
  for (const auto& r : shipped_runs()) {
    if (r.res.status() != nlp::SolveStatus::optimal) continue;
    const auto v = racing::verify_result(r.res, r.sc, 20);
    o.require(!v.collision && v.min_euclid_separation >= v.body_clearance,
              fmt("%s euclid %.3f >= %.3f", r.name.c_str(), v.min_euclid_separation, v.body_clearance));
  }
  return o;
}

bool same_trajectory(const transcription::Trajectory& a, const transcription::Trajectory& b) {
  if (a.intervals() != b.intervals() || a.degree() != b.degree()) return false;
  for (int k = 0; k < a.intervals(); ++k)
    for (int j = 0; j <= a.degree(); ++j)
      if (a.x[k][j] != b.x[k][j]) return false;
  return a.final_state == b.final_state;
}

Outcome racing_invariants() {
  Outcome o;
  for (const auto& r : shipped_runs()) {
    const double gap = r.res.ego_finish_time - r.res.warmstart_finish_time;
    o.require(gap >= -1e-6, fmt("%s T_ego - T_warm %.2e", r.name.c_str(), gap));
    const auto alone = racing::solve_raceline(racing::target_problem(r.sc));
    o.require(same_trajectory(alone.traj, r.res.target_traj), r.name + " target bit-identical");
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"geometry-exactness", geometry_exactness},
      {"flat-reduction", flat_reduction},
      {"ad-correctness", ad_correctness},
      {"collocation-order", collocation_order},
      {"solver-suite", solver_suite},
      {"raceline-sanity", raceline_sanity},
      {"overtake-reproduction", overtake_reproduction},
      {"collision-soundness", collision_soundness},
      {"racing-invariants", racing_invariants},
  };
  std::vector<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
