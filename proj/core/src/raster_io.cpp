#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "aslap/environment.hpp"
#include "aslap/error.hpp"

namespace aslap {
namespace {

void put_value(std::ostream& out, double v) {
  if (std::isnan(v)) {
    out << "nan";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

double parse_value(const std::string& token) {
  if (token == "nan" || token == "NaN" || token == "NAN") return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') throw Error(ErrorKind::Parse, "bad raster value '" + token + "'");
  return v;
}

}  // namespace

void write_rasters(std::ostream& out, const std::vector<Raster>& fields, std::size_t sensor_count) {
  if (fields.size() != sensor_count + 1) {
    throw Error(ErrorKind::InvalidArgument, "raster file must hold sensor_count + 1 fields");
  }
  const std::size_t w = fields.front().width();
  const std::size_t h = fields.front().height();
  out << w << ' ' << h << ' ' << sensor_count << '\n';
  for (const auto& f : fields) {
    if (f.width() != w || f.height() != h) throw Error(ErrorKind::InvalidArgument, "raster dimensions differ");
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        if (c) out << ' ';
        put_value(out, f.values()[r * w + c]);
      }
      out << '\n';
    }
  }
}

std::vector<Raster> read_rasters(std::istream& in, std::size_t* sensor_count) {
  std::size_t w = 0, h = 0, s = 0;
  if (!(in >> w >> h >> s) || w == 0 || h == 0) {
    throw Error(ErrorKind::Parse, "raster header must be 'width height sensor_count'");
  }
  std::vector<Raster> fields;
  std::string token;
  for (std::size_t f = 0; f <= s; ++f) {
    Raster r(w, h);
    for (double& v : r.values()) {
      if (!(in >> token)) throw Error(ErrorKind::Parse, "raster file ends early in field " + std::to_string(f));
      v = parse_value(token);
    }
    fields.push_back(std::move(r));
  }
  if (sensor_count) *sensor_count = s;
  return fields;
}

void save_environment(const GridEnvironment& env, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  write_rasters(out, env.fields(), env.sensor_count());
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path);
}

GridEnvironment load_environment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return GridEnvironment(read_rasters(in));
}

}  // namespace aslap
