#include "config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "aslap/error.hpp"

namespace aslap::cli {
namespace {

struct KeySpec {
  const char* key;
  const char* value;
  bool is_path;
};

// Model and mission defaults match the library defaults.
constexpr KeySpec kKeys[] = {
    {"output.dir", "out", true},

    {"ingest.source", "synthetic", false},
    {"ingest.csv", "", true},
    {"ingest.lat_col", "lat", false},
    {"ingest.lon_col", "lon", false},
    {"ingest.time_col", "", false},
    {"ingest.observable_cols", "", false},
    {"ingest.latent_col", "", false},
    {"ingest.grid.width", "25", false},
    {"ingest.grid.height", "25", false},
    {"ingest.grid.fill_radius", "3", false},
    {"ingest.synthetic.seed", "0", false},
    {"ingest.synthetic.length_scales", "4,4", false},
    {"ingest.synthetic.shared_weights", "0.7,0.7", false},
    {"ingest.synthetic.shared_length_scale", "4", false},
    {"ingest.synthetic.latent_weights", "0.5,0.5", false},
    {"ingest.synthetic.latent_bias", "0", false},
    {"ingest.synthetic.latent_noise", "0.05", false},
    {"ingest.synthetic.dataset_points", "0", false},
    {"ingest.synthetic.dataset_seed", "0", false},

    {"models.latent.length_scales", "1", false},
    {"models.latent.signal_variance", "0.1", false},
    {"models.latent.noise", "0.01", false},
    {"models.correlation.bin_count", "10", false},
    {"models.correlation.min_bin_population", "3", false},
    {"models.correlation.std_floor", "0.001", false},
    {"models.correlation.refit_threshold", "0", false},
    {"models.correlation.curve_signal_variance", "0.25", false},
    {"models.correlation.curve_length_scale_bins", "2", false},
    {"models.correlation.curve_noise", "0.0001", false},
    {"models.belief.length_scale", "0.15", false},
    {"models.belief.signal_variance", "0.5", false},
    {"models.belief.floor_noise", "0.0001", false},
    {"models.belief.prior_mean", "0.5", false},
    {"models.mc_samples", "64", false},
    {"models.mc_sampling", "common", false},

    {"mission.horizon", "150", false},
    {"mission.starts", "random", false},
    {"mission.use_correlations", "true", false},
    {"mission.refine_enabled", "false", false},
    {"mission.seed", "0", false},
    {"mission.tie_break", "first-in-order", false},
    {"mission.sensor_noise_std", "0", false},

    {"benchmark.n_trials", "200", false},
    {"benchmark.base_seed", "0", false},

    {"files.environment", "", true},
    {"files.dataset", "", true},
    {"files.models", "", true},
};

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : kKeys) {
    if (key == k.key) return &k;
  }
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw Error(ErrorKind::Config, key + " = '" + value + "' is not " + expected);
}

double to_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v)) {
    bad_value(key, text, "a finite number");
  }
  return v;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (t.empty() || t[0] == '-' || end != t.c_str() + t.size() || errno == ERANGE) {
    bad_value(key, text, "a non-negative integer");
  }
  return v;
}

}  // namespace

Config::Config() : base_dir_(std::filesystem::current_path()) {
  for (const auto& k : kKeys) values_[k.key] = k.value;
}

Config Config::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + file.string());
  const auto dir = std::filesystem::absolute(file).parent_path();
  return parse(in, dir, file.string());
}

Config Config::parse(std::istream& in, const std::filesystem::path& base_dir, const std::string& source) {
  Config c;
  c.base_dir_ = base_dir;
  for (const auto& k : kKeys) {
    if (k.is_path) c.set(k.key, k.value);
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw Error(ErrorKind::Config, where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (!find_key(key)) throw Error(ErrorKind::Config, where + ": unknown key '" + key + "'");
    c.set(key, trim(line.substr(eq + 1)));
  }
  return c;
}

void Config::set(const std::string& key, const std::string& value) {
  const KeySpec* spec = find_key(key);
  if (!spec) throw Error(ErrorKind::Config, "unknown key '" + key + "'");
  if (spec->is_path && !value.empty()) {
    values_[key] = (base_dir_ / value).lexically_normal().string();
  } else {
    values_[key] = value;
  }
}

const std::string& Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorKind::Config, "unknown key '" + key + "'");
  return it->second;
}

double Config::number(const std::string& key) const { return to_number(key, get(key)); }

std::size_t Config::count(const std::string& key) const { return static_cast<std::size_t>(to_unsigned(key, get(key))); }

std::uint64_t Config::seed(const std::string& key) const { return to_unsigned(key, get(key)); }

bool Config::flag(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true") return true;
  if (v == "false") return false;
  bad_value(key, v, "true or false");
}

std::vector<std::string> Config::words(const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream ss(get(key));
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> Config::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& w : words(key)) out.push_back(to_number(key, w));
  return out;
}

std::filesystem::path Config::path(const std::string& key) const {
  const std::string& v = get(key);
  return v.empty() ? std::filesystem::path{} : std::filesystem::path(v);
}

void Config::print(std::ostream& out) const {
  for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
}

}  // namespace aslap::cli
