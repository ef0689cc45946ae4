// Text serialization for trained models. Values are printed with 17
// significant digits so reloading refits bit-identical GP factorizations.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include "aslap/error.hpp"
#include "aslap/offline_models.hpp"

namespace aslap::models {
namespace {

constexpr const char* kLatentMagic = "aslap-latent-mapping";
constexpr const char* kCorrelationMagic = "aslap-correlation-model";
constexpr int kFormatVersion = 1;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw Error(ErrorKind::Parse, "model file ends unexpectedly");
    return w;
  }
  void expect(const std::string& keyword) {
    const std::string w = word();
    if (w != keyword) throw Error(ErrorKind::Parse, "expected '" + keyword + "' in model file, found '" + w + "'");
  }
  double real() {
    const std::string w = word();
    char* end = nullptr;
    const double v = std::strtod(w.c_str(), &end);
    if (end == w.c_str() || *end != '\0') throw Error(ErrorKind::Parse, "bad number '" + w + "' in model file");
    return v;
  }
  std::size_t count() {
    const double v = real();
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
      throw Error(ErrorKind::Parse, "bad count in model file");
    }
    return static_cast<std::size_t>(v);
  }
  double keyed(const std::string& keyword) {
    expect(keyword);
    return real();
  }
  std::size_t keyed_count(const std::string& keyword) {
    expect(keyword);
    return count();
  }

 private:
  std::istream& in_;
};

void write_gp(std::ostream& out, const gp::GPModel& model) {
  const auto& k = model.kernel();
  out << "kernel squared-exponential " << k.dim();
  for (double l : k.length_scales()) out << ' ' << num(l);
  out << ' ' << num(k.signal_variance()) << '\n';
  out << "observations " << model.size() << '\n';
  for (const auto& o : model.observations()) {
    for (double x : o.input) out << num(x) << ' ';
    out << num(o.target) << ' ' << num(o.noise_variance) << '\n';
  }
}

gp::GPModel read_gp(Reader& r) {
  r.expect("kernel");
  r.expect("squared-exponential");
  const std::size_t dim = r.count();
  std::vector<double> ls(dim);
  for (double& l : ls) l = r.real();
  const double sv = r.real();
  gp::Kernel kernel(std::move(ls), sv);
  const std::size_t n = r.keyed_count("observations");
  std::vector<gp::Observation> obs(n);
  for (auto& o : obs) {
    o.input.resize(dim);
    for (double& x : o.input) x = r.real();
    o.target = r.real();
    o.noise_variance = r.real();
  }
  return gp::GPModel::fit(std::move(kernel), std::move(obs));
}

void check_header(Reader& r, const char* magic) {
  r.expect(magic);
  const std::size_t version = r.count();
  if (version != kFormatVersion) {
    throw Error(ErrorKind::Parse, std::string(magic) + " version " + std::to_string(version) + " is not supported");
  }
}

}  // namespace

void save_latent_mapping(const LatentMapping& g, std::ostream& out) {
  out << kLatentMagic << ' ' << kFormatVersion << '\n';
  out << "noise_variance " << num(g.noise_variance()) << '\n';
  out << "prior_mean " << num(g.prior_mean()) << '\n';
  write_gp(out, g.gp());
}

LatentMapping load_latent_mapping(std::istream& in) {
  Reader r(in);
  check_header(r, kLatentMagic);
  const double noise = r.keyed("noise_variance");
  const double prior = r.keyed("prior_mean");
  return LatentMapping(read_gp(r), noise, prior);
}

void CorrelationModel::save(std::ostream& out) const {
  out << kCorrelationMagic << ' ' << kFormatVersion << '\n';
  out << "source " << source_ << '\n';
  out << "sensor_count " << sensor_count_ << '\n';
  out << "bin_count " << options_.bin_count << '\n';
  out << "min_bin_population " << options_.min_bin_population << '\n';
  out << "std_floor " << num(options_.std_floor) << '\n';
  out << "refit_threshold " << options_.refit_threshold << '\n';
  out << "curve_signal_variance " << num(options_.curve_signal_variance) << '\n';
  out << "curve_length_scale_bins " << num(options_.curve_length_scale_bins) << '\n';
  out << "curve_noise " << num(options_.curve_noise) << '\n';
  out << "pending " << pending_ << '\n';
  out << "buffer " << buffer_.size() << '\n';
  for (const auto& p : buffer_) {
    out << num(p.source_reading) << ' ' << p.target_sensor << ' ' << num(p.target_reading) << '\n';
  }
  out << "curves " << curves_.size() << '\n';
  for (const auto& c : curves_) {
    out << "curve " << c.target << '\n';
    out << "bins " << c.bins.count << ' ' << num(c.bins.lo) << ' ' << num(c.bins.hi) << ' '
        << c.bins.populated.size() << '\n';
    for (const auto& b : c.bins.populated) {
      out << num(b.center) << ' ' << b.population << ' ' << num(b.mean) << ' ' << num(b.std) << '\n';
    }
    out << "training " << c.training.size() << '\n';
    for (const auto& [x, y] : c.training) out << num(x) << ' ' << num(y) << '\n';
    out << "mean_model\n";
    write_gp(out, c.mean_model);
    out << "std_model\n";
    write_gp(out, c.std_model);
  }
}

CorrelationModel CorrelationModel::load(std::istream& in) {
  Reader r(in);
  check_header(r, kCorrelationMagic);
  CorrelationModel h;
  h.source_ = r.keyed_count("source");
  h.sensor_count_ = r.keyed_count("sensor_count");
  h.options_.bin_count = r.keyed_count("bin_count");
  h.options_.min_bin_population = r.keyed_count("min_bin_population");
  h.options_.std_floor = r.keyed("std_floor");
  h.options_.refit_threshold = r.keyed_count("refit_threshold");
  h.options_.curve_signal_variance = r.keyed("curve_signal_variance");
  h.options_.curve_length_scale_bins = r.keyed("curve_length_scale_bins");
  h.options_.curve_noise = r.keyed("curve_noise");
  h.pending_ = r.keyed_count("pending");
  const std::size_t nbuf = r.keyed_count("buffer");
  h.buffer_.resize(nbuf);
  for (auto& p : h.buffer_) {
    p.source_reading = r.real();
    p.target_sensor = r.count();
    p.target_reading = r.real();
  }
  const std::size_t ncurves = r.keyed_count("curves");
  for (std::size_t i = 0; i < ncurves; ++i) {
    const std::size_t target = r.keyed_count("curve");
    BinSpec bins;
    bins.count = r.keyed_count("bins");
    bins.lo = r.real();
    bins.hi = r.real();
    bins.populated.resize(r.count());
    for (auto& b : bins.populated) {
      b.center = r.real();
      b.population = r.count();
      b.mean = r.real();
      b.std = r.real();
    }
    std::vector<std::pair<double, double>> training(r.keyed_count("training"));
    for (auto& [x, y] : training) {
      x = r.real();
      y = r.real();
    }
    r.expect("mean_model");
    gp::GPModel mean_model = read_gp(r);
    r.expect("std_model");
    gp::GPModel std_model = read_gp(r);
    if (bins.populated.size() < 2) throw Error(ErrorKind::Parse, "correlation curve has fewer than 2 bins");
    h.curves_.push_back({target, std::move(bins), std::move(mean_model), std::move(std_model), std::move(training)});
  }
  if (h.source_ >= h.sensor_count_ || h.curves_.size() + 1 != h.sensor_count_) {
    throw Error(ErrorKind::Parse, "correlation model does not cover every other sensor");
  }
  return h;
}

void save_latent_mapping(const LatentMapping& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  save_latent_mapping(g, out);
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path);
}

LatentMapping load_latent_mapping(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return load_latent_mapping(in);
}

void save_correlation_model(const CorrelationModel& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  h.save(out);
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path);
}

CorrelationModel load_correlation_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return CorrelationModel::load(in);
}

}  // namespace aslap::models
