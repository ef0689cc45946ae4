#include "aslap/planner.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>

#include "aslap/error.hpp"
#include "aslap/metrics.hpp"
#include "aslap/seed.hpp"

namespace aslap::planner {
namespace {

constexpr double kTieTolerance = 1e-12;

}  // namespace

const char* to_string(TieBreak tie_break) noexcept {
  return tie_break == TieBreak::FirstInOrder ? "first-in-order" : "seeded-random";
}

TieBreak parse_tie_break(const std::string& text) {
  if (text == "first-in-order") return TieBreak::FirstInOrder;
  if (text == "seeded-random") return TieBreak::SeededRandom;
  throw Error(ErrorKind::Config, "unknown tie_break '" + text + "' (expected first-in-order or seeded-random)");
}

Cell acquire(const beliefs::LatentBelief& latent, std::span<const Cell> candidates, TieBreak tie_break,
             std::mt19937_64& rng) {
  if (candidates.empty()) throw Error(ErrorKind::StuckRobot, "no candidate cells to move to");
  double best = -std::numeric_limits<double>::infinity();
  for (const Cell& c : candidates) best = std::max(best, latent.variance.at(c));
  std::vector<Cell> tied;
  for (const Cell& c : candidates) {
    if (latent.variance.at(c) >= best - kTieTolerance) tied.push_back(c);
  }
  if (tie_break == TieBreak::FirstInOrder || tied.size() == 1) return tied.front();
  std::uniform_int_distribution<std::size_t> pick(0, tied.size() - 1);
  return tied[pick(rng)];
}

Mission::Mission(const GridEnvironment& env, const models::LatentMapping& g,
                 std::vector<models::CorrelationModel> correlations, MissionConfig config)
    : env_(env),
      g_(g),
      correlations_(std::move(correlations)),
      config_(std::move(config)),
      sense_rng_(derive_seed(config_.seed, kSensorNoiseStream)),
      tie_rng_(derive_seed(config_.seed, kTieBreakStream)),
      belief_(env, config_.belief) {
  const std::size_t s = env.sensor_count();
  if (config_.horizon < 1) throw Error(ErrorKind::Config, "mission horizon must be at least 1");
  if (config_.start_positions.size() != s) {
    throw Error(ErrorKind::Config, "mission needs " + std::to_string(s) + " start positions, got " +
                                       std::to_string(config_.start_positions.size()));
  }
  if (config_.use_correlations || config_.refine_enabled) {
    if (correlations_.size() != s) {
      throw Error(ErrorKind::Config, "mission needs one correlation model per sensor");
    }
    for (std::size_t k = 0; k < s; ++k) {
      if (correlations_[k].source() != k) {
        throw Error(ErrorKind::Config, "correlation model " + std::to_string(k) + " has the wrong source sensor");
      }
    }
  }
  if (g_.input_dim() != s) throw Error(ErrorKind::Config, "latent mapping does not match the sensor count");

  // Measure at the start positions and build the first beliefs.
  std::vector<TrajectoryPoint> newest;
  for (std::size_t k = 0; k < s; ++k) {
    const Cell start = config_.start_positions[k];
    env_.require_valid(start);
    const double z = sense(env_, k, start, config_.sensor_noise_std, sense_rng_);
    robots_.push_back({k, start, {{0, start, z}}});
    readings_at_[env_.raster_index(start)].emplace_back(k, z);
    newest.push_back({0, start, z});
  }
  update_beliefs(newest);
  record_metrics();
}

void Mission::update_beliefs(std::span<const TrajectoryPoint> newest) {
  if (config_.use_correlations) {
    for (std::size_t k = 0; k < newest.size(); ++k) {
      belief_.ingest_cross(k, newest[k].cell, newest[k].reading, correlations_[k]);
    }
  }
  for (std::size_t k = 0; k < newest.size(); ++k) belief_.ingest_direct(k, newest[k].cell, newest[k].reading);
  // Fresh draws every timestep so a fixed sampling error cannot pin a robot
  // between two cells.
  const std::uint64_t seed = derive_seed(config_.seed, kLatentSampleStream, newest.front().t);
  latent_ = beliefs::recompute_latent(belief_, g_, env_, config_.mc_samples, seed, config_.mc_sampling);
}

void Mission::record_metrics() {
  mse_.push_back(evaluation::mse(latent_, env_));
  if (robots_.size() < 2) {
    spread_.push_back(0.0);
    return;
  }
  std::vector<Cell> positions;
  for (const auto& r : robots_) positions.push_back(r.position);
  spread_.push_back(evaluation::spread(positions));
}

void Mission::step() {
  if (done()) throw Error(ErrorKind::InvalidArgument, "mission already reached its horizon");
  const std::size_t t = t_ + 1;
  try {
    // Every robot decides against the same start-of-timestep latent belief.
    std::vector<TrajectoryPoint> newest;
    for (auto& robot : robots_) {
      const std::size_t s = robot.id;
      const auto candidates = env_.neighbors(robot.position);
      const Cell next = acquire(latent_, candidates, config_.tie_break, tie_rng_);
      const double z = sense(env_, s, next, config_.sensor_noise_std, sense_rng_);
      auto& here = readings_at_[env_.raster_index(next)];
      if (config_.refine_enabled) {
        std::vector<models::ColocatedPair> pairs;
        for (const auto& [other, value] : here) {
          if (other != s) pairs.push_back({z, other, value});
        }
        correlations_[s] = models::refine_correlation(correlations_[s], pairs);
      }
      here.emplace_back(s, z);
      robot.position = next;
      robot.trajectory.push_back({t, next, z});
      newest.push_back({t, next, z});
    }
    update_beliefs(newest);
  } catch (const Error& e) {
    throw Error(e.kind(), "timestep " + std::to_string(t) + ": " + e.message());
  }
  t_ = t;
  record_metrics();
}

MissionResult Mission::result() const { return {latent_, robots_, mse_, spread_}; }

MissionResult run_mission(const GridEnvironment& env, const models::LatentMapping& g,
                          const std::vector<models::CorrelationModel>& correlations, const MissionConfig& config) {
  Mission mission(env, g, config.use_correlations || config.refine_enabled ? correlations
                                                                           : std::vector<models::CorrelationModel>{},
                  config);
  while (!mission.done()) mission.step();
  return mission.result();
}

void write_trace(std::ostream& out, const MissionResult& result) {
  out << "t,robot,col,row,reading,mse_after_step\n";
  char buf[128];
  const std::size_t steps = result.mse.size();
  for (std::size_t t = 0; t < steps; ++t) {
    for (const auto& r : result.robots) {
      const auto& p = r.trajectory.at(t);
      std::snprintf(buf, sizeof buf, "%zu,%zu,%d,%d,%.17g,%.17g\n", p.t, r.id, p.cell.col, p.cell.row, p.reading,
                    result.mse[t]);
      out << buf;
    }
  }
}

}  // namespace aslap::planner
