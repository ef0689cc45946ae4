#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aslap/environment.hpp"
#include "aslap/gp.hpp"
#include "aslap/offline_models.hpp"

namespace aslap::beliefs {

enum class Provenance { Direct, CrossInferred };

struct BeliefRecord {
  Cell cell;
  double value = 0.0;
  double noise_variance = 0.0;
  Provenance provenance = Provenance::Direct;
};

struct BeliefOptions {
  /// Spatial length scale as a fraction of the grid extent (inputs are cell
  /// centres mapped to [0,1]^2).
  double length_scale = 0.15;
  double signal_variance = 0.5;
  /// Noise variance attached to direct sensor readings.
  double floor_noise = 1e-4;
  /// Constant prior mean; fields are normalized to [0,1].
  double prior_mean = 0.5;
};

/// Online belief: one GP per observable field over cell coordinates.
class ObservableBelief {
 public:
  ObservableBelief(const GridEnvironment& env, BeliefOptions options = {});

  std::size_t sensor_count() const noexcept { return models_.size(); }
  const BeliefOptions& options() const noexcept { return options_; }

  /// Extends `sensor`'s GP with (cell, value, floor_noise).
  void ingest_direct(std::size_t sensor, const Cell& cell, double value);

  /// Adds h's prediction for every sensor other than `source` as a
  /// pseudo-observation at `cell`. The source sensor is left alone.
  void ingest_cross(std::size_t source, const Cell& cell, double reading, const models::CorrelationModel& h);

  gp::Prediction predict(std::size_t sensor, const Cell& cell) const;
  /// Batch prediction at `cells`; outputs are resized to cells.size().
  void predict(std::size_t sensor, std::span<const Cell> cells, Eigen::VectorXd& mean,
               Eigen::VectorXd& variance) const;

  /// The underlying GP is fitted to value - prior_mean.
  const gp::GPModel& model(std::size_t sensor) const { return models_.at(sensor); }
  const std::vector<BeliefRecord>& records(std::size_t sensor) const { return records_.at(sensor); }
  std::size_t count(std::size_t sensor, Provenance provenance) const;

  std::array<double, 2> input_of(const Cell& cell) const noexcept;

 private:
  void require_cell(const Cell& cell) const;
  void require_sensor(std::size_t sensor) const;

  std::size_t width_;
  std::size_t height_;
  std::vector<bool> valid_;
  BeliefOptions options_;
  std::vector<gp::GPModel> models_;
  std::vector<std::vector<BeliefRecord>> records_;
};

/// Latent belief: per-cell latent mean and variance (NaN on masked cells).
struct LatentBelief {
  Raster mean;
  Raster variance;
  std::size_t mc_samples = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kDefaultMcSamples = 64;

enum class LatentSampling {
  /// One set of standard-normal draws, shared by every cell.
  Common,
  /// An independent stream per cell, seeded by (seed, raster index).
  PerCell,
};

const char* to_string(LatentSampling sampling) noexcept;
LatentSampling parse_latent_sampling(const std::string& text);

/// For every valid cell, draws mc_samples vectors z ~ prod_s N(mu_s, sigma_s^2)
/// and pushes them through g. The cell mean is avg(m_i); the variance is
/// avg(v_i) + var(m_i). Either way the result does not depend on the order
/// in which cells are evaluated.
LatentBelief recompute_latent(const ObservableBelief& belief, const models::LatentMapping& g,
                              const GridEnvironment& env, std::size_t mc_samples, std::uint64_t seed,
                              LatentSampling sampling = LatentSampling::Common);

/// Writes mean and variance in the environment raster format
/// (header `width height 1`, mean raster then variance raster).
void save_latent_belief(const LatentBelief& latent, const std::string& path);

}  // namespace aslap::beliefs
