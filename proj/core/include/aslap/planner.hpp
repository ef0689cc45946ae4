#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "aslap/beliefs.hpp"
#include "aslap/environment.hpp"
#include "aslap/offline_models.hpp"

namespace aslap::planner {

enum class TieBreak { FirstInOrder, SeededRandom };

const char* to_string(TieBreak tie_break) noexcept;
TieBreak parse_tie_break(const std::string& text);

struct TrajectoryPoint {
  std::size_t t = 0;
  Cell cell;
  double reading = 0.0;
};

struct RobotState {
  std::size_t id = 0;  // equals the sensor index
  Cell position;
  std::vector<TrajectoryPoint> trajectory;
};

struct MissionConfig {
  std::size_t horizon = 150;
  std::vector<Cell> start_positions;
  bool use_correlations = true;
  bool refine_enabled = false;
  std::size_t mc_samples = beliefs::kDefaultMcSamples;
  std::uint64_t seed = 0;
  TieBreak tie_break = TieBreak::FirstInOrder;
  double sensor_noise_std = 0.0;
  beliefs::BeliefOptions belief;
  beliefs::LatentSampling mc_sampling = beliefs::LatentSampling::Common;
};

struct MissionResult {
  beliefs::LatentBelief final_latent;
  std::vector<RobotState> robots;
  /// Index t holds the value after timestep t (t = 0 is the initial measurement).
  std::vector<double> mse;
  std::vector<double> spread;
};

/// Candidate with the largest latent variance. Ties (within 1e-12) go to the
/// first candidate, or to a uniformly drawn one under SeededRandom.
Cell acquire(const beliefs::LatentBelief& latent, std::span<const Cell> candidates, TieBreak tie_break,
             std::mt19937_64& rng);

/// One multi-robot mission. Construction takes the initial measurement at the
/// start positions and builds the first beliefs; each step() then advances
/// one timestep for the whole team.
///
/// The environment and latent mapping are borrowed and must outlive the
/// mission. Correlation models are copied because refinement mutates them.
class Mission {
 public:
  Mission(const GridEnvironment& env, const models::LatentMapping& g,
          std::vector<models::CorrelationModel> correlations, MissionConfig config);

  std::size_t time() const noexcept { return t_; }
  bool done() const noexcept { return t_ >= config_.horizon; }

  void step();

  const MissionConfig& config() const noexcept { return config_; }
  const beliefs::ObservableBelief& belief() const noexcept { return belief_; }
  const beliefs::LatentBelief& latent() const noexcept { return latent_; }
  const std::vector<RobotState>& robots() const noexcept { return robots_; }
  const std::vector<models::CorrelationModel>& correlations() const noexcept { return correlations_; }
  const std::vector<double>& mse_series() const noexcept { return mse_; }
  const std::vector<double>& spread_series() const noexcept { return spread_; }

  MissionResult result() const;

 private:
  void update_beliefs(std::span<const TrajectoryPoint> newest);
  void record_metrics();

  const GridEnvironment& env_;
  const models::LatentMapping& g_;
  std::vector<models::CorrelationModel> correlations_;
  MissionConfig config_;
  std::mt19937_64 sense_rng_;
  std::mt19937_64 tie_rng_;

  std::size_t t_ = 0;
  std::vector<RobotState> robots_;
  beliefs::ObservableBelief belief_;
  beliefs::LatentBelief latent_;
  /// Every reading taken so far, keyed by raster index: (sensor, value).
  std::unordered_map<std::size_t, std::vector<std::pair<std::size_t, double>>> readings_at_;
  std::vector<double> mse_;
  std::vector<double> spread_;
};

MissionResult run_mission(const GridEnvironment& env, const models::LatentMapping& g,
                          const std::vector<models::CorrelationModel>& correlations, const MissionConfig& config);

/// Header `t,robot,col,row,reading,mse_after_step`, one line per robot per
/// timestep.
void write_trace(std::ostream& out, const MissionResult& result);

}  // namespace aslap::planner
