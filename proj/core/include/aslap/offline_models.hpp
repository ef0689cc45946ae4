#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aslap/gp.hpp"
#include "aslap/ingest.hpp"

namespace aslap::models {

/// g: observable vector (normalized, length S) -> latent value. The returned
/// variance is the GP posterior variance plus the homoscedastic noise
/// variance, i.e. the aleatoric spread of the latent value given z.
class LatentMapping {
 public:
  /// `gp` models latent - prior_mean.
  LatentMapping(gp::GPModel gp, double noise_variance, double prior_mean = 0.0);

  std::size_t input_dim() const noexcept { return gp_.kernel().dim(); }
  double noise_variance() const noexcept { return noise_variance_; }
  double prior_mean() const noexcept { return prior_mean_; }
  const gp::GPModel& gp() const noexcept { return gp_; }

  gp::Prediction predict(std::span<const double> z) const;
  /// `z` is S x m; outputs are resized to m.
  void predict(const Eigen::MatrixXd& z, Eigen::VectorXd& mean, Eigen::VectorXd& variance) const;

 private:
  gp::GPModel gp_;
  double noise_variance_;
  double prior_mean_;
};

inline constexpr double kDefaultLatentNoise = 0.01;

/// Targets are centred on their sample mean, which becomes the prior mean.
LatentMapping train_latent_mapping(const ingest::HistoricalDataset& data, const gp::Kernel& kernel,
                                   double noise_variance = kDefaultLatentNoise);

gp::Prediction predict_latent(const LatentMapping& g, std::span<const double> z);

struct CorrelationOptions {
  std::size_t bin_count = 10;
  std::size_t min_bin_population = 3;
  double std_floor = 1e-3;
  /// Buffered pairs needed before refine_correlation refits; 0 disables refits.
  std::size_t refit_threshold = 0;
  double curve_signal_variance = 0.25;
  /// Curve length scale in units of bin width.
  double curve_length_scale_bins = 2.0;
  /// Noise floor added to each bin's sampling variance in the curve fits.
  double curve_noise = 1e-4;
};

struct BinStat {
  double center = 0.0;
  std::size_t population = 0;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

struct BinSpec {
  std::size_t count = 0;
  double lo = 0.0;
  double hi = 0.0;
  /// Bins that met the population floor, in increasing order.
  std::vector<BinStat> populated;

  double width() const noexcept { return (hi - lo) / static_cast<double>(count); }
};

struct ColocatedPair {
  double source_reading = 0.0;
  std::size_t target_sensor = 0;
  double target_reading = 0.0;
};

struct CrossEstimate {
  std::size_t target = 0;
  double mean = 0.0;
  double variance = 0.0;
};

struct CrossPrediction {
  std::vector<CrossEstimate> targets;
  bool extrapolated = false;
};

/// One source sensor's reading -> mean and variance of every other
/// observable field at the same location.
class CorrelationModel {
 public:
  struct Curve {
    std::size_t target = 0;
    BinSpec bins;
    gp::GPModel mean_model;
    gp::GPModel std_model;
    /// Historical (source, target) pairs the curve was first trained on.
    std::vector<std::pair<double, double>> training;
  };

  std::size_t source() const noexcept { return source_; }
  std::size_t sensor_count() const noexcept { return sensor_count_; }
  const CorrelationOptions& options() const noexcept { return options_; }
  const std::vector<Curve>& curves() const noexcept { return curves_; }
  const Curve& curve(std::size_t target) const;
  const std::vector<ColocatedPair>& buffer() const noexcept { return buffer_; }
  std::size_t pending() const noexcept { return pending_; }

  CrossPrediction predict(double reading) const;
  CorrelationModel refine(std::span<const ColocatedPair> colocated) const;

  void save(std::ostream& out) const;
  static CorrelationModel load(std::istream& in);

  friend CorrelationModel train_correlation(const ingest::HistoricalDataset&, std::size_t,
                                            const CorrelationOptions&);

 private:
  CorrelationModel() = default;

  std::size_t source_ = 0;
  std::size_t sensor_count_ = 0;
  CorrelationOptions options_;
  std::vector<Curve> curves_;
  std::vector<ColocatedPair> buffer_;
  std::size_t pending_ = 0;
};

/// Equal-width bins over the source column's range; for each bin with at least
/// min_bin_population points, the target's mean and standard deviation. One
/// 1-D GP per target fits centres -> means and another centres -> stds.
CorrelationModel train_correlation(const ingest::HistoricalDataset& data, std::size_t source,
                                   const CorrelationOptions& options = {});

/// Readings are clamped to the populated bin-centre span; readings outside the
/// trained range are flagged `extrapolated`. Variance is max(std_floor, std)^2.
CrossPrediction predict_cross(const CorrelationModel& h, double reading);

/// Appends pairs to the model's buffer. When refits are enabled and the buffer
/// has grown by refit_threshold since the last fit, rebins original + buffered
/// pairs. Pairs that do not target another sensor are ignored.
CorrelationModel refine_correlation(const CorrelationModel& h, std::span<const ColocatedPair> colocated);

/// Bin statistics for (source, target) pairs; exposed for refits and tests.
BinSpec bin_pairs(std::span<const std::pair<double, double>> pairs, std::size_t bin_count,
                  std::size_t min_bin_population);

/// Process-wide count of predict_cross evaluations (instrumentation).
std::uint64_t predict_cross_calls() noexcept;
void reset_predict_cross_calls() noexcept;

void save_latent_mapping(const LatentMapping& g, std::ostream& out);
LatentMapping load_latent_mapping(std::istream& in);

void save_latent_mapping(const LatentMapping& g, const std::string& path);
LatentMapping load_latent_mapping(const std::string& path);
void save_correlation_model(const CorrelationModel& h, const std::string& path);
CorrelationModel load_correlation_model(const std::string& path);

}  // namespace aslap::models
