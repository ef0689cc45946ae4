#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace aslap {

struct Cell {
  int col = 0;
  int row = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

std::string to_string(const Cell& cell);

/// Row-major scalar grid. Masked cells hold NaN.
class Raster {
 public:
  Raster() = default;
  Raster(std::size_t width, std::size_t height, double fill = 0.0);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }

  bool contains(const Cell& c) const noexcept {
    return c.col >= 0 && c.row >= 0 && static_cast<std::size_t>(c.col) < width_ &&
           static_cast<std::size_t>(c.row) < height_;
  }
  std::size_t index(const Cell& c) const noexcept {
    return static_cast<std::size_t>(c.row) * width_ + static_cast<std::size_t>(c.col);
  }
  double& at(const Cell& c) { return values_[index(c)]; }
  double at(const Cell& c) const { return values_[index(c)]; }

  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const Raster&, const Raster&);

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> values_;
};

struct Bounds {
  double min = 0.0;
  double max = 1.0;
};

/// Min-max normalizes the finite values of `raster` in place and returns the
/// bounds used. A constant raster maps to 0.5.
Bounds normalize(Raster& raster);

/// The simulation world: S observable ground-truth fields plus one latent
/// field on a shared grid and mask. Values on valid cells lie in [0, 1].
class GridEnvironment {
 public:
  /// `fields` holds S observable rasters followed by the latent raster. A cell
  /// is valid when every field is finite there; mixed masks are rejected.
  GridEnvironment(std::vector<Raster> fields);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t sensor_count() const noexcept { return fields_.size() - 1; }

  const Raster& field(std::size_t index) const;
  const Raster& observable(std::size_t sensor) const;
  const Raster& latent() const noexcept { return fields_.back(); }
  const std::vector<Raster>& fields() const noexcept { return fields_; }

  bool is_valid(const Cell& c) const noexcept;
  /// Valid cells in row-major order.
  const std::vector<Cell>& cells() const noexcept { return cells_; }
  std::size_t raster_index(const Cell& c) const noexcept {
    return static_cast<std::size_t>(c.row) * width_ + static_cast<std::size_t>(c.col);
  }
  const std::vector<bool>& mask() const noexcept { return valid_; }

  /// Moore neighbourhood of `c` restricted to valid cells, in row-major order
  /// over the 3x3 block with the centre skipped.
  std::vector<Cell> neighbors(const Cell& c) const;

  /// Throws InvalidLocation if `c` is out of bounds or masked.
  void require_valid(const Cell& c) const;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<Raster> fields_;
  std::vector<bool> valid_;
  std::vector<Cell> cells_;
};

/// Reads `sensor`'s ground truth at `cell`, plus N(0, noise_std^2) noise when
/// noise_std > 0. The caller owns the noise stream.
double sense(const GridEnvironment& env, std::size_t sensor, const Cell& cell, double noise_std,
             std::mt19937_64& rng);

struct FieldSpec {
  /// Smoothness of the field's private component, in cells.
  double length_scale = 4.0;
  /// Weight of the shared component; 0 gives a field independent of the
  /// others, 1 makes all fields with weight 1 identical before normalization.
  double shared_weight = 0.0;
};

struct LatentRule {
  std::vector<double> weights;  // one per observable field
  double bias = 0.0;
  double noise_std = 0.0;
};

struct SynthesisSpec {
  std::vector<FieldSpec> fields;
  double shared_length_scale = 4.0;
  LatentRule latent;
};

/// Smooth random observable fields (Gaussian-filtered white noise, min-max
/// normalized) and latent = bias + sum_k w_k z_k + eps, clamped to [0, 1].
GridEnvironment synthesize(std::size_t width, std::size_t height, const SynthesisSpec& spec,
                           std::uint64_t seed);

/// Text raster format: a `width height sensor_count` header, then for each of
/// the sensor_count + 1 fields one whitespace-separated line per raster row.
/// Masked cells are written as `nan`.
void write_rasters(std::ostream& out, const std::vector<Raster>& fields, std::size_t sensor_count);
std::vector<Raster> read_rasters(std::istream& in, std::size_t* sensor_count = nullptr);

void save_environment(const GridEnvironment& env, const std::string& path);
GridEnvironment load_environment(const std::string& path);

}  // namespace aslap
