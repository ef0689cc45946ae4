#include "aslap/offline_models.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "aslap/error.hpp"

namespace aslap::models {
namespace {

std::atomic<std::uint64_t> g_predict_cross_calls{0};

struct FittedCurve {
  BinSpec bins;
  gp::GPModel mean_model;
  gp::GPModel std_model;
};

FittedCurve fit_curve(std::span<const std::pair<double, double>> pairs, const CorrelationOptions& opt) {
  BinSpec bins = bin_pairs(pairs, opt.bin_count, opt.min_bin_population);
  if (bins.populated.size() < 2) {
    throw Error(ErrorKind::InsufficientData,
                "only " + std::to_string(bins.populated.size()) + " bins reach the population floor of " +
                    std::to_string(opt.min_bin_population));
  }
  const gp::Kernel kernel({opt.curve_length_scale_bins * bins.width()}, opt.curve_signal_variance);
  std::vector<gp::Observation> means, stds;
  // Each bin statistic is an estimate; its sampling variance (s^2/n for the
  // mean, about s^2/2n for the std) is the observation noise of the curve.
  for (const auto& b : bins.populated) {
    const double n = static_cast<double>(b.population);
    const double s2 = b.std * b.std;
    means.push_back({{b.center}, b.mean, opt.curve_noise + s2 / n});
    stds.push_back({{b.center}, b.std, opt.curve_noise + s2 / (2.0 * n)});
  }
  return {std::move(bins), gp::GPModel::fit(kernel, std::move(means)), gp::GPModel::fit(kernel, std::move(stds))};
}

}  // namespace

LatentMapping::LatentMapping(gp::GPModel gp, double noise_variance, double prior_mean)
    : gp_(std::move(gp)), noise_variance_(noise_variance), prior_mean_(prior_mean) {
  if (!std::isfinite(prior_mean_)) throw Error(ErrorKind::InvalidArgument, "latent prior mean must be finite");
}

gp::Prediction LatentMapping::predict(std::span<const double> z) const {
  if (z.size() != input_dim()) {
    throw Error(ErrorKind::InvalidArgument, "latent mapping expects " + std::to_string(input_dim()) +
                                                " inputs, got " + std::to_string(z.size()));
  }
  auto p = gp_.predict(z);
  p.mean += prior_mean_;
  p.variance += noise_variance_;
  return p;
}

void LatentMapping::predict(const Eigen::MatrixXd& z, Eigen::VectorXd& mean, Eigen::VectorXd& variance) const {
  gp_.predict(z, mean, variance);
  mean.array() += prior_mean_;
  variance.array() += noise_variance_;
}

LatentMapping train_latent_mapping(const ingest::HistoricalDataset& data, const gp::Kernel& kernel,
                                   double noise_variance) {
  const std::size_t s = data.sensor_count();
  if (kernel.dim() != s) {
    throw Error(ErrorKind::InvalidArgument, "latent kernel has " + std::to_string(kernel.dim()) +
                                                " input dims but the dataset has " + std::to_string(s) +
                                                " observable columns");
  }
  if (!(noise_variance >= 0.0)) throw Error(ErrorKind::InvalidArgument, "latent noise must be non-negative");
  for (const auto& col : data.observables) {
    if (col.size() != data.size()) throw Error(ErrorKind::InvalidArgument, "dataset columns are not aligned");
  }
  if (data.size() == 0) throw Error(ErrorKind::InsufficientData, "latent mapping needs at least one record");
  double centre = 0.0;
  for (double y : data.latent) centre += y;
  centre /= static_cast<double>(data.size());
  std::vector<gp::Observation> obs;
  obs.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    gp::Observation o;
    o.input.resize(s);
    for (std::size_t k = 0; k < s; ++k) o.input[k] = data.observables[k][i];
    o.target = data.latent[i] - centre;
    o.noise_variance = noise_variance;
    obs.push_back(std::move(o));
  }
  return LatentMapping(gp::GPModel::fit(kernel, std::move(obs)), noise_variance, centre);
}

gp::Prediction predict_latent(const LatentMapping& g, std::span<const double> z) { return g.predict(z); }

BinSpec bin_pairs(std::span<const std::pair<double, double>> pairs, std::size_t bin_count,
                  std::size_t min_bin_population) {
  if (bin_count < 2) throw Error(ErrorKind::InvalidArgument, "bin_count must be at least 2");
  BinSpec spec;
  spec.count = bin_count;
  spec.lo = std::numeric_limits<double>::infinity();
  spec.hi = -std::numeric_limits<double>::infinity();
  for (const auto& [x, y] : pairs) {
    spec.lo = std::min(spec.lo, x);
    spec.hi = std::max(spec.hi, x);
  }
  if (pairs.empty() || !(spec.hi > spec.lo)) {
    spec.lo = pairs.empty() ? 0.0 : spec.lo;
    spec.hi = spec.lo;
    return spec;
  }
  std::vector<std::vector<double>> members(bin_count);
  const double width = spec.width();
  for (const auto& [x, y] : pairs) {
    auto b = static_cast<std::size_t>(std::floor((x - spec.lo) / width));
    members[std::min(b, bin_count - 1)].push_back(y);
  }
  for (std::size_t b = 0; b < bin_count; ++b) {
    auto& m = members[b];
    if (m.size() < std::max<std::size_t>(min_bin_population, 1)) continue;
    std::sort(m.begin(), m.end());
    double sum = 0.0;
    for (double v : m) sum += v;
    const double mean = sum / static_cast<double>(m.size());
    double ss = 0.0;
    for (double v : m) ss += (v - mean) * (v - mean);
    spec.populated.push_back({spec.lo + (static_cast<double>(b) + 0.5) * width, m.size(), mean,
                              std::sqrt(ss / static_cast<double>(m.size()))});
  }
  return spec;
}

CorrelationModel train_correlation(const ingest::HistoricalDataset& data, std::size_t source,
                                   const CorrelationOptions& options) {
  const std::size_t s = data.sensor_count();
  if (source >= s) throw Error(ErrorKind::InvalidArgument, "correlation source sensor out of range");
  if (s < 2) throw Error(ErrorKind::InvalidArgument, "correlation models need at least two sensors");
  if (options.bin_count < 2) throw Error(ErrorKind::InvalidArgument, "bin_count must be at least 2");
  if (!(options.std_floor > 0.0)) throw Error(ErrorKind::InvalidArgument, "std_floor must be positive");

  CorrelationModel h;
  h.source_ = source;
  h.sensor_count_ = s;
  h.options_ = options;
  const auto& src = data.observables[source];
  for (std::size_t t = 0; t < s; ++t) {
    if (t == source) continue;
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) pairs.emplace_back(src[i], data.observables[t][i]);
    auto fitted = fit_curve(pairs, options);
    h.curves_.push_back({t, std::move(fitted.bins), std::move(fitted.mean_model), std::move(fitted.std_model),
                         std::move(pairs)});
  }
  return h;
}

const CorrelationModel::Curve& CorrelationModel::curve(std::size_t target) const {
  for (const auto& c : curves_) {
    if (c.target == target) return c;
  }
  throw Error(ErrorKind::InvalidArgument, "no correlation curve for sensor " + std::to_string(target));
}

CrossPrediction CorrelationModel::predict(double reading) const {
  g_predict_cross_calls.fetch_add(1, std::memory_order_relaxed);
  if (!std::isfinite(reading)) throw Error(ErrorKind::InvalidArgument, "cross-sensor reading is not finite");
  CrossPrediction out;
  for (const auto& c : curves_) {
    const double first = c.bins.populated.front().center;
    const double last = c.bins.populated.back().center;
    if (reading < c.bins.lo || reading > c.bins.hi) out.extrapolated = true;
    const double x = std::clamp(reading, first, last);
    const double mean = c.mean_model.predict(std::span<const double>(&x, 1)).mean;
    const double sd = std::max(options_.std_floor, c.std_model.predict(std::span<const double>(&x, 1)).mean);
    out.targets.push_back({c.target, mean, sd * sd});
  }
  return out;
}

CorrelationModel CorrelationModel::refine(std::span<const ColocatedPair> colocated) const {
  CorrelationModel next = *this;
  for (const auto& p : colocated) {
    if (p.target_sensor == source_ || p.target_sensor >= sensor_count_) continue;
    if (!std::isfinite(p.source_reading) || !std::isfinite(p.target_reading)) continue;
    next.buffer_.push_back(p);
    ++next.pending_;
  }
  if (options_.refit_threshold == 0 || next.pending_ < options_.refit_threshold) return next;

  for (auto& c : next.curves_) {
    std::vector<std::pair<double, double>> pairs = c.training;
    for (const auto& p : next.buffer_) {
      if (p.target_sensor == c.target) pairs.emplace_back(p.source_reading, p.target_reading);
    }
    auto fitted = fit_curve(pairs, options_);
    c.bins = std::move(fitted.bins);
    c.mean_model = std::move(fitted.mean_model);
    c.std_model = std::move(fitted.std_model);
  }
  next.pending_ = 0;
  return next;
}

CrossPrediction predict_cross(const CorrelationModel& h, double reading) { return h.predict(reading); }

CorrelationModel refine_correlation(const CorrelationModel& h, std::span<const ColocatedPair> colocated) {
  return h.refine(colocated);
}

std::uint64_t predict_cross_calls() noexcept { return g_predict_cross_calls.load(std::memory_order_relaxed); }
void reset_predict_cross_calls() noexcept { g_predict_cross_calls.store(0, std::memory_order_relaxed); }

}  // namespace aslap::models
