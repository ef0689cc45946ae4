#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "aslap/error.hpp"
#include "aslap/ingest.hpp"
#include "aslap/planner.hpp"
#include "oracles.hpp"

using namespace aslap;
using namespace aslap::planner;

namespace {

struct World {
  GridEnvironment env;
  models::LatentMapping g;
  std::vector<models::CorrelationModel> h;
};

World make_world(std::size_t size, double shared_weight, std::uint64_t seed) {
  SynthesisSpec spec;
  spec.fields = {{1.5, shared_weight}, {1.5, shared_weight}};
  spec.shared_length_scale = 1.5;
  spec.latent = {{0.5, 0.5}, 0.0, 0.05};
  auto env = synthesize(size, size, spec, seed);
  const auto data = ingest::dataset_from_environment(env, 100, 1);
  auto g = models::train_latent_mapping(data, gp::Kernel::isotropic(2, 1.0, 0.1), 0.0025);
  std::vector<models::CorrelationModel> h;
  for (std::size_t s = 0; s < 2; ++s) {
    models::CorrelationOptions opt;
    opt.min_bin_population = 2;
    h.push_back(models::train_correlation(ingest::dataset_from_environment(env, 0, 1), s, opt));
  }
  return {std::move(env), std::move(g), std::move(h)};
}

MissionConfig base_config(std::size_t horizon, std::vector<Cell> starts) {
  MissionConfig c;
  c.horizon = horizon;
  c.start_positions = std::move(starts);
  c.mc_samples = 16;
  c.seed = 5;
  c.belief.length_scale = 0.1;
  c.belief.signal_variance = 0.1;
  return c;
}

beliefs::LatentBelief row_of_variances(const std::vector<double>& v) {
  beliefs::LatentBelief b{Raster(v.size(), 1, 0.5), Raster(v.size(), 1), 1, 0};
  b.variance.values() = v;
  return b;
}

bool adjacent(const Cell& a, const Cell& b) {
  return std::max(std::abs(a.col - b.col), std::abs(a.row - b.row)) == 1;
}

}  // namespace

TEST_CASE("acquire picks the highest-variance candidate") {
  const auto latent = row_of_variances({0.1, 0.3, 0.2, 0.3});
  std::mt19937_64 rng(1);
  const std::vector<Cell> one{{2, 0}};
  CHECK(acquire(latent, one, TieBreak::FirstInOrder, rng) == Cell{2, 0});
  const std::vector<Cell> three{{0, 0}, {1, 0}, {2, 0}};
  CHECK(acquire(latent, three, TieBreak::FirstInOrder, rng) == Cell{1, 0});
  CHECK(acquire(latent, three, TieBreak::SeededRandom, rng) == Cell{1, 0});
}

TEST_CASE("acquire tie policies") {
  const auto latent = row_of_variances({0.2, 0.2, 0.2 - 1e-13, 0.1});
  const std::vector<Cell> tied{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  std::mt19937_64 rng(1);
  CHECK(acquire(latent, tied, TieBreak::FirstInOrder, rng) == Cell{0, 0});
  auto draw = [&](std::uint64_t seed) {
    std::mt19937_64 r(seed);
    std::vector<Cell> picks;
    for (int i = 0; i < 30; ++i) picks.push_back(acquire(latent, tied, TieBreak::SeededRandom, r));
    return picks;
  };
  const auto a = draw(9);
  CHECK(a == draw(9));
  bool saw_second = false;
  for (const Cell& c : a) {
    CHECK(c.col <= 2);
    saw_second = saw_second || c.col != 0;
  }
  CHECK(saw_second);
  try {
    acquire(latent, {}, TieBreak::FirstInOrder, rng);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StuckRobot);
  }
}

TEST_CASE("tie policy names") {
  CHECK(parse_tie_break("first-in-order") == TieBreak::FirstInOrder);
  CHECK(parse_tie_break("seeded-random") == TieBreak::SeededRandom);
  CHECK(std::string(to_string(TieBreak::SeededRandom)) == "seeded-random");
  CHECK_THROWS_AS(parse_tie_break("random"), Error);
}

TEST_CASE("a single robot moves to its max-variance neighbour every step") {
  SynthesisSpec spec;
  spec.fields = {{2.0, 0.0}};
  spec.latent = {{1.0}, 0.0, 0.0};
  const auto env = synthesize(8, 8, spec, 3);
  const auto g = models::train_latent_mapping(ingest::dataset_from_environment(env, 0, 1),
                                              gp::Kernel::isotropic(1, 0.5, 0.1), 0.001);
  auto cfg = base_config(12, {{3, 3}});
  cfg.use_correlations = false;
  Mission m(env, g, {}, cfg);
  std::mt19937_64 unused(0);
  while (!m.done()) {
    const Cell from = m.robots()[0].position;
    const auto candidates = env.neighbors(from);
    const Cell expected = acquire(m.latent(), candidates, TieBreak::FirstInOrder, unused);
    double best = 0.0;
    for (const Cell& c : candidates) best = std::max(best, m.latent().variance.at(c));
    m.step();
    CHECK(m.robots()[0].position == expected);
    CHECK(m.latent().variance.at(expected) <= best);
  }
  CHECK(m.spread_series() == std::vector<double>(13, 0.0));
}

TEST_CASE("observation bookkeeping with and without correlations") {
  const auto w = make_world(10, 0.8, 4);
  for (bool corr : {false, true}) {
    auto cfg = base_config(6, {{1, 1}, {8, 8}});
    cfg.use_correlations = corr;
    Mission m(w.env, w.g, w.h, cfg);
    for (std::size_t t = 0;; ++t) {
      for (std::size_t s = 0; s < 2; ++s) {
        CHECK(m.belief().count(s, beliefs::Provenance::Direct) == t + 1);
        CHECK(m.belief().count(s, beliefs::Provenance::CrossInferred) == (corr ? t + 1 : 0));
        CHECK(m.belief().model(s).size() == (corr ? 2 : 1) * (t + 1));
      }
      if (m.done()) break;
      m.step();
    }
  }
}

TEST_CASE("one step on a 3x3 grid") {
  const auto w = make_world(3, 0.5, 5);
  const auto cfg = base_config(1, {{0, 0}, {2, 2}});
  const auto r = run_mission(w.env, w.g, w.h, cfg);
  for (const auto& robot : r.robots) {
    REQUIRE(robot.trajectory.size() == 2);
    CHECK(robot.trajectory[0].cell == cfg.start_positions[robot.id]);
    CHECK(adjacent(robot.trajectory[0].cell, robot.trajectory[1].cell));
    CHECK(robot.position == robot.trajectory[1].cell);
  }
  CHECK(r.mse.size() == 2);
  CHECK(r.spread.size() == 2);
  CHECK(r.spread[0] == doctest::Approx(std::sqrt(8.0)));
}

TEST_CASE("mission invariants over a longer run") {
  const auto w = make_world(12, 0.6, 6);
  auto cfg = base_config(40, {{0, 0}, {11, 5}});
  cfg.sensor_noise_std = 0.01;
  cfg.tie_break = TieBreak::SeededRandom;
  const auto r = run_mission(w.env, w.g, w.h, cfg);
  CHECK(r.mse.size() == 41);
  CHECK(r.spread.size() == 41);
  for (const auto& robot : r.robots) {
    REQUIRE(robot.trajectory.size() == 41);
    CHECK(robot.trajectory.front().cell == cfg.start_positions[robot.id]);
    for (std::size_t t = 0; t < robot.trajectory.size(); ++t) {
      CHECK(robot.trajectory[t].t == t);
      CHECK(w.env.is_valid(robot.trajectory[t].cell));
      if (t > 0) CHECK(adjacent(robot.trajectory[t - 1].cell, robot.trajectory[t].cell));
    }
  }
  for (std::size_t t = 0; t <= 40; ++t) {
    CHECK(r.mse[t] >= 0.0);
    const auto& a = r.robots[0].trajectory[t].cell;
    const auto& b = r.robots[1].trajectory[t].cell;
    CHECK(r.spread[t] == doctest::Approx(std::hypot(a.col - b.col, a.row - b.row)).epsilon(1e-12));
  }
  for (const Cell& c : w.env.cells()) CHECK(r.final_latent.variance.at(c) >= 0.0);
}

TEST_CASE("missions are deterministic") {
  const auto w = make_world(10, 0.7, 7);
  auto cfg = base_config(15, {{2, 7}, {6, 1}});
  cfg.sensor_noise_std = 0.02;
  cfg.tie_break = TieBreak::SeededRandom;
  const auto a = run_mission(w.env, w.g, w.h, cfg);
  const auto b = run_mission(w.env, w.g, w.h, cfg);
  std::ostringstream ta, tb;
  write_trace(ta, a);
  write_trace(tb, b);
  CHECK(ta.str() == tb.str());
  CHECK(a.final_latent.mean == b.final_latent.mean);
  CHECK(a.final_latent.variance == b.final_latent.variance);
  cfg.seed = 6;
  std::ostringstream tc;
  write_trace(tc, run_mission(w.env, w.g, w.h, cfg));
  CHECK(tc.str() != ta.str());
}

TEST_CASE("correlations help when the observables are identical") {
  const auto w = make_world(15, 1.0, 8);
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, w.env.cells().size() - 1);
    auto cfg = base_config(20, {w.env.cells()[pick(rng)], w.env.cells()[pick(rng)]});
    cfg.seed = seed;
    cfg.use_correlations = true;
    const double with = run_mission(w.env, w.g, w.h, cfg).mse.back();
    cfg.use_correlations = false;
    const double without = run_mission(w.env, w.g, w.h, cfg).mse.back();
    if (with <= without) ++wins;
  }
  CHECK(wins > 10);
}

TEST_CASE("the ablation never evaluates a correlation model") {
  const auto w = make_world(10, 0.8, 9);
  auto cfg = base_config(20, {{0, 0}, {9, 9}});
  cfg.use_correlations = false;
  models::reset_predict_cross_calls();
  run_mission(w.env, w.g, w.h, cfg);
  Mission m(w.env, w.g, w.h, cfg);
  while (!m.done()) m.step();
  CHECK(models::predict_cross_calls() == 0);
  cfg.use_correlations = true;
  run_mission(w.env, w.g, w.h, cfg);
  CHECK(models::predict_cross_calls() == 2 * 21);
}

TEST_CASE("a stuck robot reports the timestep") {
  auto base = make_world(6, 0.5, 10);
  auto fields = base.env.fields();
  for (auto& f : fields) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        if (r != 1 || c != 1) f.at({c, r}) = std::nan("");
      }
    }
  }
  const GridEnvironment env(fields);
  const auto cfg = base_config(3, {{4, 4}, {1, 1}});
  try {
    run_mission(env, base.g, base.h, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StuckRobot);
    CHECK(std::string(e.what()).find("timestep 1") != std::string::npos);
    CHECK(std::string(e.what()).find("(1,1)") != std::string::npos);
  }
}

TEST_CASE("mission configuration errors") {
  const auto w = make_world(6, 0.5, 11);
  auto expect_kind = [&](MissionConfig cfg, ErrorKind kind, const std::vector<models::CorrelationModel>& h) {
    try {
      Mission(w.env, w.g, h, std::move(cfg));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == kind);
    }
  };
  expect_kind(base_config(0, {{0, 0}, {1, 1}}), ErrorKind::Config, w.h);
  expect_kind(base_config(5, {{0, 0}}), ErrorKind::Config, w.h);
  expect_kind(base_config(5, {{0, 0}, {6, 1}}), ErrorKind::InvalidLocation, w.h);
  expect_kind(base_config(5, {{0, 0}, {1, 1}}), ErrorKind::Config, {});
  expect_kind(base_config(5, {{0, 0}, {1, 1}}), ErrorKind::Config, {w.h[1], w.h[0]});
  auto off = base_config(5, {{0, 0}, {1, 1}});
  off.use_correlations = false;
  CHECK_NOTHROW(Mission(w.env, w.g, {}, off));

  Mission m(w.env, w.g, w.h, base_config(1, {{0, 0}, {1, 1}}));
  m.step();
  CHECK_THROWS_AS(m.step(), Error);
}

TEST_CASE("co-located readings refine the correlation model") {
  auto w = make_world(8, 0.7, 12);
  std::vector<models::CorrelationModel> h;
  models::CorrelationOptions opt;
  opt.min_bin_population = 2;
  opt.refit_threshold = 1;
  const auto data = ingest::dataset_from_environment(w.env, 0, 1);
  for (std::size_t s = 0; s < 2; ++s) h.push_back(models::train_correlation(data, s, opt));

  // Both robots share a start, so they make the same first move.
  auto cfg = base_config(1, {{3, 3}, {3, 3}});
  cfg.refine_enabled = true;
  Mission m(w.env, w.g, h, cfg);
  m.step();
  const Cell at = m.robots()[0].position;
  REQUIRE(m.robots()[1].position == at);
  CHECK(m.correlations()[0].buffer().empty());
  REQUIRE(m.correlations()[1].buffer().size() == 1);
  const auto& pair = m.correlations()[1].buffer()[0];
  CHECK(pair.source_reading == w.env.observable(1).at(at));
  CHECK(pair.target_sensor == 0);
  CHECK(pair.target_reading == w.env.observable(0).at(at));
  CHECK(m.correlations()[1].pending() == 0);

  // Refinement alone still leaves the belief free of cross-inferred data.
  cfg.use_correlations = false;
  Mission ablated(w.env, w.g, h, cfg);
  ablated.step();
  CHECK(ablated.belief().count(0, beliefs::Provenance::CrossInferred) == 0);
  CHECK(ablated.correlations()[1].buffer().size() == 1);
}

TEST_CASE("trace export format") {
  const auto w = make_world(6, 0.5, 13);
  const auto r = run_mission(w.env, w.g, w.h, base_config(4, {{0, 0}, {5, 5}}));
  std::ostringstream out;
  write_trace(out, r);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,robot,col,row,reading,mse_after_step");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
  }
  CHECK(rows == 2 * 5);
  CHECK(out.str().find("\n0,1,5,5,") != std::string::npos);
}
