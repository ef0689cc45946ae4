#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "aslap/environment.hpp"

namespace aslap::ingest {

/// Which CSV columns carry position, time and the sensor parameters.
struct ColumnMapping {
  std::string lat_col;
  std::string lon_col;
  std::string time_col;
  std::vector<std::string> parameters;
};

struct RawRecord {
  std::string timestamp;
  double latitude = 0.0;
  double longitude = 0.0;
  std::map<std::string, double> readings;
};

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
};

struct LoadResult {
  std::vector<RawRecord> records;
  LoadReport report;
};

/// Comma-separated UTF-8 with one header row. Rows whose mapped numeric
/// columns do not parse to finite values (or whose coordinates are out of
/// range) are dropped and counted.
LoadResult load_csv(const std::string& path, const ColumnMapping& mapping);
LoadResult parse_csv(std::istream& in, const ColumnMapping& mapping, const std::string& source = "<stream>");

/// Historical training tuple: positions in local metres, S observable columns
/// and the latent column, all min-max normalized.
struct HistoricalDataset {
  std::vector<std::array<double, 2>> locations;
  std::vector<std::vector<double>> observables;
  std::vector<double> latent;
  /// Raw (min, max) per column: observables first, latent last.
  std::vector<Bounds> bounds;
  std::vector<std::string> names;

  std::size_t size() const noexcept { return latent.size(); }
  std::size_t sensor_count() const noexcept { return observables.size(); }
  /// Column `column` (observables first, latent last) as a list.
  const std::vector<double>& column(std::size_t column) const;
  double normalize(std::size_t column, double raw) const;
  double denormalize(std::size_t column, double normalized) const;
};

HistoricalDataset build_dataset(const std::vector<RawRecord>& records,
                                const std::vector<std::string>& observable_params,
                                const std::string& latent_param);

/// Equirectangular projection about the coordinate centroid, in metres
/// (x east, y north).
std::vector<std::array<double, 2>> project_local(const std::vector<RawRecord>& records);

struct GridSpec {
  std::size_t width = 25;
  std::size_t height = 25;
  double fill_radius = 3.0;
};

struct RasterReport {
  std::size_t populated = 0;
  std::size_t filled = 0;
  std::size_t masked = 0;
};

struct RasterizeResult {
  GridEnvironment environment;
  /// Per-field cell means before normalization (NaN where masked).
  std::vector<Raster> raw;
  std::vector<Bounds> bounds;
  RasterReport report;
};

/// Bins records into a width x height grid over their projected bounding box
/// (row 0 is the northern edge). Each cell holds the mean of its records;
/// empty cells copy the nearest populated cell within fill_radius cells and
/// are masked otherwise. Fields are then min-max normalized.
RasterizeResult rasterize(const std::vector<RawRecord>& records,
                          const std::vector<std::string>& observable_params,
                          const std::string& latent_param, const GridSpec& grid);

/// Dataset file: `#bounds,min,max,...` line, a header row, then one
/// comma-separated row per sample (x, y, observables..., latent).
void save_dataset(const HistoricalDataset& data, const std::string& path);
HistoricalDataset load_dataset(const std::string& path);

/// A dataset sampled from an environment's valid cells (positions are cell
/// centres). Used for synthetic runs where no survey CSV exists.
HistoricalDataset dataset_from_environment(const GridEnvironment& env, std::size_t max_points,
                                           std::uint64_t seed);

}  // namespace aslap::ingest
