#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "raceopt/common/error.hpp"
#include "raceopt/geometry/surface.hpp"
#include "raceopt/racing/overtake.hpp"
#include "raceopt/racing/raceline.hpp"
#include "raceopt/transcription/collocation.hpp"
#include "../support/oracles.hpp"
#include "../support/tracks.hpp"

using namespace raceopt;
using namespace raceopt::racing;
using geometry::SurfaceKind;
using geometry::TrackSurface;
using raceopt::test_support::one_segment;
using transcription::Trajectory;

namespace {

// Kinematic-layout trajectory driving at constant speed v along y = const
// from s0, on K uniform intervals over `length`.
Trajectory constant_speed(double s0, double y, double v, double length, int K) {
  Trajectory tr;
  tr.model = "kinematic";
  tr.nx = 5;
  tr.nu = 2;
  tr.time_index = 4;
  tr.tau = transcription::make_scheme(3).points;
  const double h = length / K;
  auto state = [&](double s) {
    Eigen::VectorXd x(5);
    x << s, y, 0.0, v, (s - s0) / v;
    return x;
  };
  for (int k = 0; k <= K; ++k) tr.boundaries.push_back(s0 + k * h);
  for (int k = 0; k < K; ++k) {
    std::vector<Eigen::VectorXd> xs{state(tr.boundaries[k])};
    std::vector<Eigen::VectorXd> us;
    for (double t : tr.tau) {
      xs.push_back(state(tr.boundaries[k] + t * h));
      us.push_back(Eigen::Vector2d::Zero());
    }
    tr.x.push_back(xs);
    tr.u.push_back(us);
  }
  tr.final_state = state(s0 + length);
  return tr;
}

void expect_code(ErrorCode code, const std::function<void()>& f) {
  try {
    f();
    ADD_FAILURE() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

// --- time spline -------------------------------------------------------------

TEST(TimeSpline, ReproducesLinearMotion) {
  std::vector<double> t{0.0, 0.5, 1.2, 2.0}, s, y, ds(4, 10.0), dy(4, 0.5);
  for (double ti : t) {
    s.push_back(3.0 + 10.0 * ti);
    y.push_back(-1.0 + 0.5 * ti);
  }
  const TimeSpline sp(t, s, y, ds, dy);
  for (double ti = 0.0; ti <= 2.0; ti += 0.01) {
    double sv, yv;
    sp.evaluate(ti, sv, yv);
    EXPECT_NEAR(sv, 3.0 + 10.0 * ti, 1e-12);
    EXPECT_NEAR(yv, -1.0 + 0.5 * ti, 1e-12);
  }
}

TEST(TimeSpline, ExtrapolatesAtConstantSpeedAfterTheEnd) {
  const TimeSpline sp({0.0, 1.0}, {0.0, 10.0}, {0.0, 2.0}, {10.0, 12.0}, {0.0, 1.0});
  double s, y;
  sp.evaluate(3.0, s, y);
  EXPECT_NEAR(s, 10.0 + 2.0 * 12.0, 1e-12);
  EXPECT_NEAR(y, 2.0, 1e-12);
  EXPECT_EQ(sp.segment_index(3.0), sp.num_segments() - 1);
}

TEST(TimeSpline, ArcLengthIsMonotone) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> step(0.05, 1.0), slope(0.0, 60.0), lat(-2.0, 2.0);
  std::vector<double> t{0.0}, s{0.0}, y{0.0}, ds{slope(rng)}, dy{0.0};
  for (int i = 0; i < 40; ++i) {
    t.push_back(t.back() + step(rng));
    s.push_back(s.back() + (i % 7 == 3 ? 0.0 : 10.0 * step(rng)));
    y.push_back(lat(rng));
    ds.push_back(slope(rng));
    dy.push_back(lat(rng));
  }
  const TimeSpline sp(t, s, y, ds, dy);
  double prev = -1.0;
  for (double ti = 0.0; ti <= t.back(); ti += 1e-3) {
    double sv, yv;
    sp.evaluate(ti, sv, yv);
    EXPECT_GE(sv, prev - 1e-12);
    prev = sv;
  }
}

TEST(TimeSpline, RejectsNonIncreasingKnots) {
  expect_code(ErrorCode::non_monotone_time,
              [] { TimeSpline({0.0, 1.0, 1.0}, {0.0, 1.0, 2.0}, {0, 0, 0}, {1, 1, 1}, {0, 0, 0}); });
}

TEST(TimeSpline, ReparamByTimeFollowsTheTrajectory) {
  const Trajectory tr = constant_speed(5.0, 1.5, 20.0, 100.0, 10);
  const TimeSpline sp = reparam_by_time(tr);
  for (double t = 0.0; t <= 5.0; t += 0.05) {
    double s, y;
    sp.evaluate(t, s, y);
    EXPECT_NEAR(s, 5.0 + 20.0 * t, 1e-9);
    EXPECT_NEAR(y, 1.5, 1e-12);
  }
}

TEST(CollisionResidual, Examples) {
  const TimeSpline sp({0.0, 10.0}, {0.0, 100.0}, {1.0, 1.0}, {10.0, 10.0}, {0.0, 0.0});
  // Target at (30, 1) when t = 3.
  EXPECT_NEAR(collision_residual(33.0, 5.0, 3.0, sp, 2.0), 9.0 + 16.0 - 16.0, 1e-12);
  EXPECT_NEAR(collision_residual(30.0, 1.0, 3.0, sp, 2.0), -16.0, 1e-12);
  EXPECT_NEAR(collision_residual(34.0, 1.0, 3.0, sp, 2.0), 0.0, 1e-12);
}

// --- verification ----------------------------------------------------------------

TEST(Verify, ParallelLanesOnFlatTrack) {
  OvertakeScenario sc;
  sc.surface = std::make_shared<TrackSurface>(geometry::flat_straight_track(120.0, 5.0));
  sc.r = 1.4;
  OvertakeResult res;
  res.target_traj = constant_speed(0.0, 1.5, 10.0, 100.0, 10);
  res.ego_traj = constant_speed(0.0, -1.5, 10.0, 100.0, 10);
  const VerifyReport v = verify_result(res, sc);
  EXPECT_NEAR(v.min_param_separation, 3.0, 1e-9);
  EXPECT_NEAR(v.min_euclid_separation, 3.0, 1e-9);
  EXPECT_NEAR(v.body_clearance, 2.0 * std::hypot(1.8, 0.85), 1e-12);
  EXPECT_TRUE(v.collision);
  EXPECT_NEAR(v.min_node_collision_residual, 9.0 - 4.0 * 1.4 * 1.4, 1e-9);
  EXPECT_TRUE(v.time_increasing);
  EXPECT_LE(v.max_bound_violation, 0.0);
}

// On the inside of a bend the world distance is shorter than the parameter
// distance: a 5 m gap in s at radius 40 m is a 80 sin(1/20) m chord.
TEST(Verify, ParameterGapCompressesOnTheInside) {
  OvertakeScenario sc;
  sc.surface = std::make_shared<TrackSurface>(one_segment(SurfaceKind::flat_frenet, 120.0, 0.02, 12.0));
  sc.r = 2.0;
  OvertakeResult res;
  res.target_traj = constant_speed(5.0, 10.0, 10.0, 100.0, 10);
  res.ego_traj = constant_speed(0.0, 10.0, 10.0, 100.0, 10);
  const VerifyReport v = verify_result(res, sc);
  EXPECT_NEAR(v.min_param_separation, 5.0, 1e-9);
  EXPECT_NEAR(v.min_euclid_separation, 80.0 * std::sin(0.05), 1e-9);
  EXPECT_FALSE(v.collision);
}

TEST(Verify, FlagsOutOfBoundsTrajectory) {
  OvertakeScenario sc;
  sc.surface = std::make_shared<TrackSurface>(geometry::flat_straight_track(120.0, 5.0));
  OvertakeResult res;
  res.target_traj = constant_speed(0.0, 4.5, 10.0, 100.0, 10);
  res.ego_traj = constant_speed(0.0, -3.0, 10.0, 100.0, 10);
  const VerifyReport v = verify_result(res, sc);
  EXPECT_NEAR(v.max_bound_violation, 4.5 - (5.0 - 0.85), 1e-12);
}

// --- raceline ----------------------------------------------------------------

TEST(Raceline, StraightMatchesClosedForm) {
  RacelineProblem p;
  p.surface = std::make_shared<TrackSurface>(geometry::flat_straight_track(200.0, 5.0));
  p.agent.model = ModelKind::kinematic;
  p.agent.v0 = 10.0;
  p.intervals = 40;
  const RacelineResult r = solve_raceline(p);
  ASSERT_EQ(r.solution.status, nlp::SolveStatus::optimal) << r.solution.message;
  const double expect =
      test_support::straight_time(200.0, 10.0, p.agent.params.a_max, p.agent.params.c_drag / p.agent.params.mass);
  EXPECT_NEAR(r.finish_time(), expect, 1e-3 * expect);
  EXPECT_LE(r.max_defect, 1e-6);
}

TEST(Raceline, RejectsStartOffTheRoad) {
  RacelineProblem p;
  p.surface = std::make_shared<TrackSurface>(geometry::flat_straight_track(200.0, 5.0));
  p.agent.y0 = 4.8;
  EXPECT_THROW(validate(p), Error);
}

// --- overtake -------------------------------------------------------------------

namespace {

// A stronger Ego on a flat straight: it must pull out to pass. The Target
// sits off the centreline so the passing side is not a symmetric tie.
OvertakeScenario straight_overtake() {
  OvertakeScenario sc;
  sc.surface = std::make_shared<TrackSurface>(geometry::flat_straight_track(150.0, 4.5));
  sc.target.model = ModelKind::kinematic;
  sc.target.v0 = 15.0;
  sc.target.s0 = 8.0;
  sc.target.y0 = 1.0;
  sc.target.params.a_max = 3.0;
  sc.ego.model = ModelKind::kinematic;
  sc.ego.v0 = 15.0;
  sc.ego.s0 = 0.0;
  sc.r = 2.1;
  sc.intervals = 20;
  sc.w_u = 1e-4;
  sc.w_du = 1e-3;
  return sc;
}

const OvertakeResult& straight_result() {
  static const OvertakeResult res = solve_overtake(straight_overtake());
  return res;
}

}  // namespace

TEST(Overtake, StraightPassIsCollisionFree) {
  const auto& res = straight_result();
  ASSERT_EQ(res.status(), nlp::SolveStatus::optimal) << res.ego_stats.message;
  EXPECT_TRUE(res.overtaken);
  EXPECT_GE(res.min_param_separation, 2.0 * 2.1 - 1e-3);
  const VerifyReport v = verify_result(res, straight_overtake());
  EXPECT_FALSE(v.collision);
  EXPECT_GE(v.min_euclid_separation, v.body_clearance);
  EXPECT_LE(v.max_bound_violation, 1e-6);
}

TEST(Overtake, CollisionStepNeverBeatsTheWarmstart) {
  const auto& res = straight_result();
  EXPECT_GE(res.ego_finish_time, res.warmstart_finish_time - 1e-6);
}

TEST(Overtake, TargetIgnoresTheEgo) {
  const auto& res = straight_result();
  OvertakeScenario other = straight_overtake();
  const RacelineResult alone = solve_raceline(target_problem(other));
  ASSERT_EQ(alone.traj.intervals(), res.target_traj.intervals());
  for (int k = 0; k < alone.traj.intervals(); ++k)
    for (int j = 0; j <= alone.traj.degree(); ++j)
      for (int i = 0; i < alone.traj.nx; ++i) ASSERT_EQ(alone.traj.x[k][j][i], res.target_traj.x[k][j][i]);
}

TEST(Overtake, ValidationRejectsBadScenarios) {
  auto with = [](auto edit) {
    OvertakeScenario sc = straight_overtake();
    edit(sc);
    return sc;
  };
  expect_code(ErrorCode::invalid_scenario, [&] { validate(with([](OvertakeScenario& s) { s.target.s0 = 2.0; })); });
  expect_code(ErrorCode::invalid_scenario, [&] { validate(with([](OvertakeScenario& s) { s.ego.s0 = 9.0; })); });
  expect_code(ErrorCode::invalid_scenario, [&] { validate(with([](OvertakeScenario& s) { s.r = 3.7; })); });
  expect_code(ErrorCode::invalid_scenario, [&] { validate(with([](OvertakeScenario& s) { s.r = 0.0; })); });
  expect_code(ErrorCode::invalid_scenario, [&] { validate(with([](OvertakeScenario& s) { s.surface.reset(); })); });
  EXPECT_NO_THROW(validate(straight_overtake()));
}
