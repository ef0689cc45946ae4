#include "aslap/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aslap/error.hpp"

namespace aslap {

std::string to_string(const Cell& cell) {
  return "(" + std::to_string(cell.col) + "," + std::to_string(cell.row) + ")";
}

Raster::Raster(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), values_(width * height, fill) {}

bool operator==(const Raster& a, const Raster& b) {
  if (a.width_ != b.width_ || a.height_ != b.height_) return false;
  for (std::size_t i = 0; i < a.values_.size(); ++i) {
    const double x = a.values_[i];
    const double y = b.values_[i];
    if (std::isnan(x) != std::isnan(y)) return false;
    if (!std::isnan(x) && x != y) return false;
  }
  return true;
}

Bounds normalize(Raster& raster) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : raster.values()) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) return {};
  for (double& v : raster.values()) {
    if (!std::isfinite(v)) continue;
    v = hi > lo ? (v - lo) / (hi - lo) : 0.5;
  }
  return {lo, hi};
}

GridEnvironment::GridEnvironment(std::vector<Raster> fields) : fields_(std::move(fields)) {
  if (fields_.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "environment needs at least one observable field and a latent field");
  }
  width_ = fields_.front().width();
  height_ = fields_.front().height();
  if (width_ == 0 || height_ == 0) throw Error(ErrorKind::InvalidArgument, "environment has zero cells");
  for (const auto& f : fields_) {
    if (f.width() != width_ || f.height() != height_) {
      throw Error(ErrorKind::InvalidArgument, "environment fields differ in dimensions");
    }
  }
  valid_.assign(width_ * height_, false);
  for (std::size_t i = 0; i < width_ * height_; ++i) {
    std::size_t finite = 0;
    for (const auto& f : fields_) {
      const double v = f.values()[i];
      if (std::isfinite(v)) {
        if (v < 0.0 || v > 1.0) {
          throw Error(ErrorKind::InvalidArgument, "ground-truth value outside [0,1] at raster index " +
                                                      std::to_string(i));
        }
        ++finite;
      }
    }
    if (finite != 0 && finite != fields_.size()) {
      throw Error(ErrorKind::InvalidArgument, "fields disagree on the mask at raster index " + std::to_string(i));
    }
    valid_[i] = finite != 0;
  }
  for (std::size_t r = 0; r < height_; ++r) {
    for (std::size_t c = 0; c < width_; ++c) {
      if (valid_[r * width_ + c]) cells_.push_back({static_cast<int>(c), static_cast<int>(r)});
    }
  }
  if (cells_.empty()) throw Error(ErrorKind::InvalidArgument, "environment has no valid cells");
}

const Raster& GridEnvironment::field(std::size_t index) const {
  if (index >= fields_.size()) throw Error(ErrorKind::InvalidArgument, "field index out of range");
  return fields_[index];
}

const Raster& GridEnvironment::observable(std::size_t sensor) const {
  if (sensor >= sensor_count()) {
    throw Error(ErrorKind::InvalidArgument,
                "sensor " + std::to_string(sensor) + " does not exist (the latent field cannot be sensed)");
  }
  return fields_[sensor];
}

bool GridEnvironment::is_valid(const Cell& c) const noexcept {
  if (c.col < 0 || c.row < 0 || static_cast<std::size_t>(c.col) >= width_ ||
      static_cast<std::size_t>(c.row) >= height_) {
    return false;
  }
  return valid_[raster_index(c)];
}

void GridEnvironment::require_valid(const Cell& c) const {
  if (!is_valid(c)) throw Error(ErrorKind::InvalidLocation, "cell " + to_string(c) + " is outside the region");
}

std::vector<Cell> GridEnvironment::neighbors(const Cell& c) const {
  require_valid(c);
  std::vector<Cell> out;
  out.reserve(8);
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      if (dr == 0 && dc == 0) continue;
      const Cell n{c.col + dc, c.row + dr};
      if (is_valid(n)) out.push_back(n);
    }
  }
  if (out.empty()) throw Error(ErrorKind::StuckRobot, "cell " + to_string(c) + " has no valid neighbours");
  return out;
}

double sense(const GridEnvironment& env, std::size_t sensor, const Cell& cell, double noise_std,
             std::mt19937_64& rng) {
  const Raster& truth = env.observable(sensor);
  env.require_valid(cell);
  double value = truth.at(cell);
  if (noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_std);
    value += noise(rng);
  }
  return value;
}

namespace {

// Separable Gaussian filter of white noise. Filtering with std sigma yields a
// squared-exponential covariance with length scale sigma * sqrt(2).
Raster smooth_noise(std::size_t width, std::size_t height, double length_scale, std::mt19937_64& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  const double sigma = std::max(length_scale / std::sqrt(2.0), 1e-6);
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  // Pad so that the filtered field has no edge attenuation.
  const std::size_t pw = width + 2 * static_cast<std::size_t>(radius);
  const std::size_t ph = height + 2 * static_cast<std::size_t>(radius);
  std::vector<double> noise(pw * ph);
  for (double& v : noise) v = unit(rng);

  std::vector<double> taps(2 * static_cast<std::size_t>(radius) + 1);
  for (int k = -radius; k <= radius; ++k) {
    taps[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * (k / sigma) * (k / sigma));
  }

  std::vector<double> rows(width * ph, 0.0);
  for (std::size_t r = 0; r < ph; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < taps.size(); ++k) acc += taps[k] * noise[r * pw + c + k];
      rows[r * width + c] = acc;
    }
  }
  Raster out(width, height);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < taps.size(); ++k) acc += taps[k] * rows[(r + k) * width + c];
      out.values()[r * width + c] = acc;
    }
  }
  // Unit marginal variance.
  double energy = 0.0;
  for (double t : taps) energy += t * t;
  for (double& v : out.values()) v /= energy;
  return out;
}

}  // namespace

GridEnvironment synthesize(std::size_t width, std::size_t height, const SynthesisSpec& spec,
                           std::uint64_t seed) {
  if (width == 0 || height == 0) throw Error(ErrorKind::InvalidArgument, "synthesis needs at least one cell");
  if (spec.fields.empty()) throw Error(ErrorKind::InvalidArgument, "synthesis needs at least one observable field");
  if (spec.latent.weights.size() != spec.fields.size()) {
    throw Error(ErrorKind::InvalidArgument, "latent rule needs one weight per observable field");
  }
  std::mt19937_64 rng(seed);
  const Raster shared = smooth_noise(width, height, spec.shared_length_scale, rng);

  std::vector<Raster> fields;
  for (const auto& fs : spec.fields) {
    if (fs.shared_weight < 0.0 || fs.shared_weight > 1.0) {
      throw Error(ErrorKind::InvalidArgument, "shared_weight must lie in [0,1]");
    }
    Raster own = smooth_noise(width, height, fs.length_scale, rng);
    const double a = fs.shared_weight;
    const double b = std::sqrt(1.0 - a * a);
    for (std::size_t i = 0; i < own.size(); ++i) {
      own.values()[i] = a * shared.values()[i] + b * own.values()[i];
    }
    normalize(own);
    fields.push_back(std::move(own));
  }

  Raster latent(width, height);
  std::normal_distribution<double> eps(0.0, 1.0);
  for (std::size_t i = 0; i < latent.size(); ++i) {
    double v = spec.latent.bias;
    for (std::size_t k = 0; k < fields.size(); ++k) v += spec.latent.weights[k] * fields[k].values()[i];
    if (spec.latent.noise_std > 0.0) v += spec.latent.noise_std * eps(rng);
    latent.values()[i] = std::clamp(v, 0.0, 1.0);
  }
  fields.push_back(std::move(latent));
  return GridEnvironment(std::move(fields));
}

}  // namespace aslap
