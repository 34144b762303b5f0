#include <benchmark/benchmark.h>

#include <memory>

#include "raceopt/geometry/surface.hpp"
#include "raceopt/models/kinematic.hpp"
#include "raceopt/models/two_track.hpp"
#include "raceopt/racing/raceline.hpp"

using namespace raceopt;

namespace {

const geometry::TrackSurface& chicane() {
  static const geometry::TrackSurface s(geometry::chicane_track());
  return s;
}

void BM_SurfaceFrame(benchmark::State& state) {
  const auto& s = chicane();
  double sv = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(s.frame({30.0 + sv, 1.5}));
    sv = sv > 60.0 ? 0.0 : sv + 0.37;
  }
}
BENCHMARK(BM_SurfaceFrame);

void BM_KinematicRhs(benchmark::State& state) {
  const models::VehicleParams p;
  const std::array<double, models::KinematicModel::nx> x{50.0, 1.0, 0.05, 20.0, 3.0};
  const std::array<double, models::KinematicModel::nu> u{1.0, 0.02};
  for (auto _ : state) benchmark::DoNotOptimize(models::kinematic_rhs(x, u, chicane(), p));
}
BENCHMARK(BM_KinematicRhs);

void BM_TwoTrackRhs(benchmark::State& state) {
  const models::VehicleParams p;
  const std::array<double, models::TwoTrackModel::nx> x{50.0, 1.0, 0.05, 20.0, 0.2, 0.1, 3.0};
  const std::array<double, models::TwoTrackModel::nu> u{0.02, 0.05, 0.05};
  for (auto _ : state) benchmark::DoNotOptimize(models::two_track_rhs(x, u, chicane(), p));
}
BENCHMARK(BM_TwoTrackRhs);

racing::RacelineProblem chicane_raceline(racing::ModelKind kind, int intervals) {
  racing::RacelineProblem p;
  p.surface = std::make_shared<const geometry::TrackSurface>(geometry::chicane_track());
  p.agent.model = kind;
  p.agent.v0 = 15.0;
  p.intervals = intervals;
  return p;
}

// Constraint values and Jacobian of the transcribed raceline NLP.
void BM_NlpJacobian(benchmark::State& state) {
  const auto kind = state.range(0) == 0 ? racing::ModelKind::kinematic : racing::ModelKind::two_track;
  auto r = racing::build_raceline_nlp(chicane_raceline(kind, 40));
  r.tr.nlp.finalize();
  const auto& nlp = r.tr.nlp;
  const nlp::Vector z = nlp.initial_point();
  nlp::Vector g;
  nlp::SparseMatrix J = nlp.jacobian_structure();
  for (auto _ : state) {
    nlp.constraints(z, g);
    nlp.jacobian(z, J);
    benchmark::DoNotOptimize(J.valuePtr());
  }
  state.counters["nnz"] = static_cast<double>(J.nonZeros());
}
BENCHMARK(BM_NlpJacobian)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_NlpHessian(benchmark::State& state) {
  auto r = racing::build_raceline_nlp(chicane_raceline(racing::ModelKind::two_track, 40));
  r.tr.nlp.finalize();
  const auto& nlp = r.tr.nlp;
  const nlp::Vector z = nlp.initial_point();
  const nlp::Vector lambda = nlp::Vector::Constant(nlp.num_constraints(), 0.1);
  nlp::SparseMatrix H = nlp.hessian_structure();
  for (auto _ : state) {
    nlp.hessian(z, 1.0, lambda, H);
    benchmark::DoNotOptimize(H.valuePtr());
  }
}
BENCHMARK(BM_NlpHessian)->Unit(benchmark::kMicrosecond);

// Full kinematic raceline solve through the chicane.
void BM_RacelineSolve(benchmark::State& state) {
  const auto p = chicane_raceline(racing::ModelKind::kinematic, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const auto res = racing::solve_raceline(p);
    benchmark::DoNotOptimize(res.finish_time());
  }
}
BENCHMARK(BM_RacelineSolve)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
