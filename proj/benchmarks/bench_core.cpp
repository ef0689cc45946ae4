#include <benchmark/benchmark.h>

#include <random>

#include "aslap/beliefs.hpp"
#include "aslap/evaluation.hpp"
#include "aslap/gp.hpp"
#include "aslap/ingest.hpp"
#include "aslap/offline_models.hpp"
#include "aslap/planner.hpp"

using namespace aslap;

namespace {

std::vector<gp::Observation> random_observations(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<gp::Observation> obs(n);
  for (auto& o : obs) {
    o.input = {unit(rng), unit(rng)};
    o.target = unit(rng);
    o.noise_variance = 1e-3;
  }
  return obs;
}

struct World {
  GridEnvironment env;
  models::LatentMapping g;
  std::vector<models::CorrelationModel> h;
};

const World& world() {
  static const World w = [] {
    SynthesisSpec spec;
    spec.fields = {{1.5, 0.9}, {1.5, 0.9}};
    spec.shared_length_scale = 1.5;
    spec.latent = {{0.5, 0.5}, 0.0, 0.05};
    auto env = synthesize(25, 25, spec, 7);
    auto g = models::train_latent_mapping(ingest::dataset_from_environment(env, 100, 1),
                                          gp::Kernel::isotropic(2, 1.0, 0.1), 0.0025);
    const auto all = ingest::dataset_from_environment(env, 0, 1);
    std::vector<models::CorrelationModel> h;
    for (std::size_t s = 0; s < 2; ++s) h.push_back(models::train_correlation(all, s, {}));
    return World{std::move(env), std::move(g), std::move(h)};
  }();
  return w;
}

planner::MissionConfig mission_config() {
  planner::MissionConfig m;
  m.horizon = 1000;
  m.mc_samples = 64;
  m.belief.length_scale = 0.06;
  m.belief.signal_variance = 0.1;
  m.start_positions = evaluation::sample_starts(world().env, 3);
  return m;
}

}  // namespace

static void BM_GpFit(benchmark::State& state) {
  const auto obs = random_observations(static_cast<std::size_t>(state.range(0)), 1);
  const auto kernel = gp::Kernel::isotropic(2, 0.2, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(gp::GPModel::fit(kernel, obs));
}
BENCHMARK(BM_GpFit)->Arg(50)->Arg(200)->Arg(400);

static void BM_GpExtendOne(benchmark::State& state) {
  const auto obs = random_observations(static_cast<std::size_t>(state.range(0)) + 1, 2);
  const auto model = gp::GPModel::fit(gp::Kernel::isotropic(2, 0.2, 1.0),
                                      std::vector<gp::Observation>(obs.begin(), obs.end() - 1));
  for (auto _ : state) benchmark::DoNotOptimize(model.extend(std::span(obs).last(1)));
}
BENCHMARK(BM_GpExtendOne)->Arg(50)->Arg(200)->Arg(400);

static void BM_GpPredictGrid(benchmark::State& state) {
  const auto model = gp::GPModel::fit(gp::Kernel::isotropic(2, 0.2, 1.0),
                                      random_observations(static_cast<std::size_t>(state.range(0)), 3));
  Eigen::MatrixXd grid(2, 625);
  for (int i = 0; i < 625; ++i) grid.col(i) << (i % 25) / 24.0, (i / 25) / 24.0;
  Eigen::VectorXd mean, var;
  for (auto _ : state) {
    model.predict(grid, mean, var);
    benchmark::DoNotOptimize(var.data());
  }
}
BENCHMARK(BM_GpPredictGrid)->Arg(50)->Arg(200);

static void BM_RecomputeLatent(benchmark::State& state) {
  const auto& w = world();
  beliefs::ObservableBelief b(w.env);
  for (int i = 0; i < 20; ++i) b.ingest_direct(i % 2, {i, (3 * i) % 25}, 0.5);
  const auto samples = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(beliefs::recompute_latent(b, w.g, w.env, samples, ++seed));
}
BENCHMARK(BM_RecomputeLatent)->Arg(16)->Arg(64);

static void BM_MissionStep(benchmark::State& state) {
  const auto& w = world();
  auto config = mission_config();
  config.use_correlations = state.range(0) != 0;
  planner::Mission mission(w.env, w.g, w.h, config);
  for (int i = 0; i < 50; ++i) mission.step();
  for (auto _ : state) {
    state.PauseTiming();
    planner::Mission copy = mission;
    state.ResumeTiming();
    copy.step();
  }
}
BENCHMARK(BM_MissionStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
