#include "aslap/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "aslap/error.hpp"

namespace aslap::ingest {
namespace {

constexpr double kEarthRadius = 6371008.8;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += ch;
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool parse_finite(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size() && std::isfinite(out);
}

// Order-independent sum: sort first so permuted inputs give identical bits.
double stable_mean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double reading(const RawRecord& r, const std::string& name) {
  const auto it = r.readings.find(name);
  if (it == r.readings.end()) throw Error(ErrorKind::Schema, "record has no parameter '" + name + "'");
  return it->second;
}

Bounds column_bounds(const std::vector<RawRecord>& records, const std::string& name) {
  Bounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& r : records) {
    const double v = reading(r, name);
    b.min = std::min(b.min, v);
    b.max = std::max(b.max, v);
  }
  return b;
}

}  // namespace

LoadResult parse_csv(std::istream& in, const ColumnMapping& mapping, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::EmptyInput, source + " is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  const auto locate = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorKind::Schema, source + " has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t lat_idx = locate(mapping.lat_col);
  const std::size_t lon_idx = locate(mapping.lon_col);
  const std::size_t time_idx = mapping.time_col.empty() ? header.size() : locate(mapping.time_col);
  std::vector<std::size_t> param_idx;
  for (const auto& p : mapping.parameters) param_idx.push_back(locate(p));

  LoadResult result;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++result.report.rows_read;
    const auto fields = split_csv_line(line);
    RawRecord rec;
    bool ok = lat_idx < fields.size() && lon_idx < fields.size() &&
              parse_finite(fields[lat_idx], rec.latitude) && parse_finite(fields[lon_idx], rec.longitude) &&
              std::abs(rec.latitude) <= 90.0 && std::abs(rec.longitude) <= 180.0;
    for (std::size_t k = 0; ok && k < param_idx.size(); ++k) {
      double v = 0.0;
      ok = param_idx[k] < fields.size() && parse_finite(fields[param_idx[k]], v);
      if (ok) rec.readings[mapping.parameters[k]] = v;
    }
    if (!ok) {
      ++result.report.rows_dropped;
      continue;
    }
    if (time_idx < fields.size()) rec.timestamp = trim(fields[time_idx]);
    result.records.push_back(std::move(rec));
  }
  return result;
}

LoadResult load_csv(const std::string& path, const ColumnMapping& mapping) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return parse_csv(in, mapping, path);
}

const std::vector<double>& HistoricalDataset::column(std::size_t column) const {
  if (column < observables.size()) return observables[column];
  if (column == observables.size()) return latent;
  throw Error(ErrorKind::InvalidArgument, "dataset column " + std::to_string(column) + " out of range");
}

double HistoricalDataset::normalize(std::size_t column, double raw) const {
  const Bounds& b = bounds.at(column);
  return (raw - b.min) / (b.max - b.min);
}

double HistoricalDataset::denormalize(std::size_t column, double normalized) const {
  const Bounds& b = bounds.at(column);
  return b.min + normalized * (b.max - b.min);
}

std::vector<std::array<double, 2>> project_local(const std::vector<RawRecord>& records) {
  std::vector<double> lats, lons;
  for (const auto& r : records) {
    lats.push_back(r.latitude);
    lons.push_back(r.longitude);
  }
  const double lat0 = stable_mean(lats);
  const double lon0 = stable_mean(lons);
  constexpr double deg = std::numbers::pi / 180.0;
  const double coslat = std::cos(lat0 * deg);
  std::vector<std::array<double, 2>> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back({kEarthRadius * (r.longitude - lon0) * deg * coslat, kEarthRadius * (r.latitude - lat0) * deg});
  }
  return out;
}

HistoricalDataset build_dataset(const std::vector<RawRecord>& records,
                                const std::vector<std::string>& observable_params,
                                const std::string& latent_param) {
  if (records.size() < 2) {
    throw Error(ErrorKind::InsufficientData,
                "dataset needs at least 2 records, got " + std::to_string(records.size()));
  }
  if (observable_params.empty()) throw Error(ErrorKind::InvalidArgument, "no observable parameters named");

  HistoricalDataset data;
  data.locations = project_local(records);
  data.names = observable_params;
  data.names.push_back(latent_param);

  for (std::size_t col = 0; col < data.names.size(); ++col) {
    const std::string& name = data.names[col];
    const Bounds b = column_bounds(records, name);
    if (!(b.max > b.min)) throw Error(ErrorKind::Normalization, "column '" + name + "' is constant");
    std::vector<double> values;
    values.reserve(records.size());
    for (const auto& r : records) values.push_back((reading(r, name) - b.min) / (b.max - b.min));
    data.bounds.push_back(b);
    if (col < observable_params.size()) {
      data.observables.push_back(std::move(values));
    } else {
      data.latent = std::move(values);
    }
  }
  return data;
}

RasterizeResult rasterize(const std::vector<RawRecord>& records,
                          const std::vector<std::string>& observable_params,
                          const std::string& latent_param, const GridSpec& grid) {
  if (records.empty()) throw Error(ErrorKind::EmptyInput, "no records to rasterize");
  if (grid.width == 0 || grid.height == 0) throw Error(ErrorKind::InvalidArgument, "grid has zero cells");

  std::vector<std::string> names = observable_params;
  names.push_back(latent_param);
  const std::size_t nfields = names.size();
  const std::size_t w = grid.width;
  const std::size_t h = grid.height;

  const auto pos = project_local(records);
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& p : pos) {
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  }
  const auto bin = [](double v, double lo, double hi, std::size_t n) -> std::size_t {
    if (!(hi > lo)) return 0;
    const auto i = static_cast<std::size_t>(std::floor((v - lo) / (hi - lo) * static_cast<double>(n)));
    return std::min(i, n - 1);
  };

  // Per cell, per field: the record values falling in it.
  std::vector<std::vector<std::vector<double>>> buckets(w * h, std::vector<std::vector<double>>(nfields));
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::size_t c = bin(pos[i][0], xmin, xmax, w);
    const std::size_t r = (h - 1) - bin(pos[i][1], ymin, ymax, h);
    for (std::size_t f = 0; f < nfields; ++f) buckets[r * w + c][f].push_back(reading(records[i], names[f]));
  }

  std::vector<Raster> raw(nfields, Raster(w, h, std::numeric_limits<double>::quiet_NaN()));
  std::vector<Bounds> bounds;
  RasterReport report;
  std::vector<std::size_t> populated;
  for (std::size_t idx = 0; idx < w * h; ++idx) {
    if (buckets[idx][0].empty()) continue;
    populated.push_back(idx);
    for (std::size_t f = 0; f < nfields; ++f) raw[f].values()[idx] = stable_mean(buckets[idx][f]);
  }
  if (populated.empty()) throw Error(ErrorKind::EmptyInput, "no populated cells");
  report.populated = populated.size();

  const double r2max = grid.fill_radius * grid.fill_radius;
  std::vector<Raster> filled = raw;
  for (std::size_t idx = 0; idx < w * h; ++idx) {
    if (!buckets[idx][0].empty()) continue;
    const double c = static_cast<double>(idx % w);
    const double r = static_cast<double>(idx / w);
    double best = std::numeric_limits<double>::infinity();
    std::size_t source = 0;
    for (std::size_t p : populated) {
      const double dc = static_cast<double>(p % w) - c;
      const double dr = static_cast<double>(p / w) - r;
      const double d2 = dc * dc + dr * dr;
      if (d2 < best) {
        best = d2;
        source = p;
      }
    }
    if (best <= r2max) {
      for (std::size_t f = 0; f < nfields; ++f) filled[f].values()[idx] = raw[f].values()[source];
      ++report.filled;
    } else {
      ++report.masked;
    }
  }

  // Normalize with the record-level bounds so the raster shares units with
  // build_dataset over the same records.
  for (std::size_t f = 0; f < nfields; ++f) {
    const Bounds b = column_bounds(records, names[f]);
    bounds.push_back(b);
    for (double& v : filled[f].values()) {
      if (std::isfinite(v)) v = b.max > b.min ? std::clamp((v - b.min) / (b.max - b.min), 0.0, 1.0) : 0.5;
    }
  }
  return RasterizeResult{GridEnvironment(std::move(filled)), std::move(raw), std::move(bounds), report};
}

void save_dataset(const HistoricalDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << "#bounds";
  for (const auto& b : data.bounds) out << ',' << format_double(b.min) << ',' << format_double(b.max);
  out << "\nx,y";
  for (const auto& n : data.names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << format_double(data.locations[i][0]) << ',' << format_double(data.locations[i][1]);
    for (const auto& col : data.observables) out << ',' << format_double(col[i]);
    out << ',' << format_double(data.latent[i]) << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path);
}

HistoricalDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("#bounds", 0) != 0) {
    throw Error(ErrorKind::Parse, path + ": missing #bounds line");
  }
  const auto bound_fields = split_csv_line(line);
  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, path + ": missing header");
  const auto header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "x" || header[1] != "y") {
    throw Error(ErrorKind::Parse, path + ": header must start with x,y and name at least two columns");
  }
  const std::size_t ncols = header.size() - 2;
  if (bound_fields.size() != 1 + 2 * ncols) throw Error(ErrorKind::Parse, path + ": bounds do not match header");

  HistoricalDataset data;
  data.names.assign(header.begin() + 2, header.end());
  for (std::size_t c = 0; c < ncols; ++c) {
    Bounds b;
    if (!parse_finite(bound_fields[1 + 2 * c], b.min) || !parse_finite(bound_fields[2 + 2 * c], b.max)) {
      throw Error(ErrorKind::Parse, path + ": bad bounds");
    }
    data.bounds.push_back(b);
  }
  data.observables.assign(ncols - 1, {});
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": wrong number of fields");
    }
    std::vector<double> v(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (!parse_finite(fields[k], v[k])) {
        throw Error(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": bad number");
      }
    }
    data.locations.push_back({v[0], v[1]});
    for (std::size_t c = 0; c + 1 < ncols; ++c) data.observables[c].push_back(v[2 + c]);
    data.latent.push_back(v.back());
  }
  return data;
}

HistoricalDataset dataset_from_environment(const GridEnvironment& env, std::size_t max_points,
                                           std::uint64_t seed) {
  std::vector<Cell> cells = env.cells();
  if (max_points > 0 && max_points < cells.size()) {
    std::mt19937_64 rng(seed);
    std::vector<Cell> picked;
    std::sample(cells.begin(), cells.end(), std::back_inserter(picked), max_points, rng);
    cells = std::move(picked);
  }
  HistoricalDataset data;
  const std::size_t s = env.sensor_count();
  data.observables.assign(s, {});
  for (std::size_t k = 0; k < s; ++k) data.names.push_back("z" + std::to_string(k));
  data.names.push_back("latent");
  data.bounds.assign(s + 1, Bounds{0.0, 1.0});
  for (const Cell& c : cells) {
    data.locations.push_back({c.col + 0.5, c.row + 0.5});
    for (std::size_t k = 0; k < s; ++k) data.observables[k].push_back(env.observable(k).at(c));
    data.latent.push_back(env.latent().at(c));
  }
  return data;
}

}  // namespace aslap::ingest
