#include "aslap/beliefs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "aslap/error.hpp"
#include "aslap/seed.hpp"

namespace aslap::beliefs {
namespace {

// Cells per batch handed to g; fixed so results never depend on batching.
constexpr std::size_t kCellsPerBatch = 32;

}  // namespace

ObservableBelief::ObservableBelief(const GridEnvironment& env, BeliefOptions options)
    : width_(env.width()), height_(env.height()), valid_(env.mask()), options_(options) {
  if (!(options_.floor_noise >= 0.0)) throw Error(ErrorKind::InvalidArgument, "floor noise must be non-negative");
  if (!std::isfinite(options_.prior_mean)) throw Error(ErrorKind::InvalidArgument, "prior mean must be finite");
  const gp::Kernel kernel = gp::Kernel::isotropic(2, options_.length_scale, options_.signal_variance);
  models_.assign(env.sensor_count(), gp::GPModel::fit(kernel, {}));
  records_.assign(env.sensor_count(), {});
}

std::array<double, 2> ObservableBelief::input_of(const Cell& cell) const noexcept {
  return {(cell.col + 0.5) / static_cast<double>(width_), (cell.row + 0.5) / static_cast<double>(height_)};
}

void ObservableBelief::require_cell(const Cell& cell) const {
  const bool inside = cell.col >= 0 && cell.row >= 0 && static_cast<std::size_t>(cell.col) < width_ &&
                      static_cast<std::size_t>(cell.row) < height_;
  if (!inside || !valid_[static_cast<std::size_t>(cell.row) * width_ + static_cast<std::size_t>(cell.col)]) {
    throw Error(ErrorKind::InvalidLocation, "cell " + to_string(cell) + " is outside the region");
  }
}

void ObservableBelief::require_sensor(std::size_t sensor) const {
  if (sensor >= models_.size()) throw Error(ErrorKind::InvalidArgument, "sensor " + std::to_string(sensor) + " out of range");
}

void ObservableBelief::ingest_direct(std::size_t sensor, const Cell& cell, double value) {
  require_sensor(sensor);
  require_cell(cell);
  const auto x = input_of(cell);
  const gp::Observation obs{{x[0], x[1]}, value - options_.prior_mean, options_.floor_noise};
  models_[sensor] = models_[sensor].extend(std::span<const gp::Observation>(&obs, 1));
  records_[sensor].push_back({cell, value, options_.floor_noise, Provenance::Direct});
}

void ObservableBelief::ingest_cross(std::size_t source, const Cell& cell, double reading,
                                    const models::CorrelationModel& h) {
  require_sensor(source);
  require_cell(cell);
  if (models_.size() < 2) return;
  if (h.source() != source || h.sensor_count() != models_.size()) {
    throw Error(ErrorKind::InvalidArgument, "correlation model does not match source sensor " + std::to_string(source));
  }
  const auto x = input_of(cell);
  for (const auto& est : models::predict_cross(h, reading).targets) {
    const gp::Observation obs{{x[0], x[1]}, est.mean - options_.prior_mean, est.variance};
    models_[est.target] = models_[est.target].extend(std::span<const gp::Observation>(&obs, 1));
    records_[est.target].push_back({cell, est.mean, est.variance, Provenance::CrossInferred});
  }
}

gp::Prediction ObservableBelief::predict(std::size_t sensor, const Cell& cell) const {
  require_sensor(sensor);
  const auto x = input_of(cell);
  auto p = models_[sensor].predict(x);
  p.mean += options_.prior_mean;
  return p;
}

void ObservableBelief::predict(std::size_t sensor, std::span<const Cell> cells, Eigen::VectorXd& mean,
                               Eigen::VectorXd& variance) const {
  require_sensor(sensor);
  Eigen::MatrixXd q(2, static_cast<Eigen::Index>(cells.size()));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto x = input_of(cells[i]);
    q(0, static_cast<Eigen::Index>(i)) = x[0];
    q(1, static_cast<Eigen::Index>(i)) = x[1];
  }
  models_[sensor].predict(q, mean, variance);
  mean.array() += options_.prior_mean;
}

std::size_t ObservableBelief::count(std::size_t sensor, Provenance provenance) const {
  const auto& r = records_.at(sensor);
  return static_cast<std::size_t>(
      std::count_if(r.begin(), r.end(), [&](const BeliefRecord& b) { return b.provenance == provenance; }));
}

const char* to_string(LatentSampling sampling) noexcept {
  return sampling == LatentSampling::Common ? "common" : "per-cell";
}

LatentSampling parse_latent_sampling(const std::string& text) {
  if (text == "common") return LatentSampling::Common;
  if (text == "per-cell") return LatentSampling::PerCell;
  throw Error(ErrorKind::Config, "unknown mc sampling '" + text + "' (expected common or per-cell)");
}

LatentBelief recompute_latent(const ObservableBelief& belief, const models::LatentMapping& g,
                              const GridEnvironment& env, std::size_t mc_samples, std::uint64_t seed,
                              LatentSampling sampling) {
  if (mc_samples < 1) throw Error(ErrorKind::InvalidArgument, "mc_samples must be at least 1");
  const std::size_t s = belief.sensor_count();
  if (g.input_dim() != s) {
    throw Error(ErrorKind::InvalidArgument, "latent mapping input dimension does not match the sensor count");
  }
  const auto& cells = env.cells();
  const std::size_t ncells = cells.size();

  std::vector<Eigen::VectorXd> mu(s), sd(s);
  for (std::size_t k = 0; k < s; ++k) {
    Eigen::VectorXd var;
    belief.predict(k, cells, mu[k], var);
    sd[k] = var.array().sqrt();
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  LatentBelief out{Raster(env.width(), env.height(), nan), Raster(env.width(), env.height(), nan), mc_samples, seed};
  const auto m = static_cast<Eigen::Index>(mc_samples);
  const auto inv_m = 1.0 / static_cast<double>(mc_samples);
  std::normal_distribution<double> unit(0.0, 1.0);

  // Standard-normal draws, sample-major then sensor: shared[i * s + k].
  std::vector<double> shared;
  if (sampling == LatentSampling::Common) {
    std::mt19937_64 rng(derive_seed(seed, kLatentSampleStream));
    shared.resize(mc_samples * s);
    for (double& e : shared) e = unit(rng);
  }

  Eigen::MatrixXd z;
  Eigen::VectorXd means, vars;
  for (std::size_t begin = 0; begin < ncells; begin += kCellsPerBatch) {
    const std::size_t end = std::min(begin + kCellsPerBatch, ncells);
    z.resize(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(end - begin) * m);
    for (std::size_t c = begin; c < end; ++c) {
      const auto base = static_cast<Eigen::Index>(c - begin) * m;
      const auto ci = static_cast<Eigen::Index>(c);
      if (sampling == LatentSampling::Common) {
        for (Eigen::Index i = 0; i < m; ++i) {
          for (std::size_t k = 0; k < s; ++k) {
            z(static_cast<Eigen::Index>(k), base + i) =
                mu[k](ci) + sd[k](ci) * shared[static_cast<std::size_t>(i) * s + k];
          }
        }
        continue;
      }
      std::mt19937_64 rng(derive_seed(seed, kLatentSampleStream, env.raster_index(cells[c])));
      unit.reset();
      for (Eigen::Index i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < s; ++k) {
          z(static_cast<Eigen::Index>(k), base + i) = mu[k](ci) + sd[k](ci) * unit(rng);
        }
      }
    }
    g.predict(z, means, vars);
    for (std::size_t c = begin; c < end; ++c) {
      const auto block = static_cast<Eigen::Index>(c - begin) * m;
      const double mean = means.segment(block, m).sum() * inv_m;
      const double spread = (means.segment(block, m).array() - mean).square().sum() * inv_m;
      const double aleatoric = vars.segment(block, m).sum() * inv_m;
      out.mean.at(cells[c]) = mean;
      out.variance.at(cells[c]) = aleatoric + spread;
    }
  }
  return out;
}

void save_latent_belief(const LatentBelief& latent, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  write_rasters(out, {latent.mean, latent.variance}, 1);
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path);
}

}  // namespace aslap::beliefs
