#include "commands.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "aslap/beliefs.hpp"
#include "aslap/environment.hpp"
#include "aslap/error.hpp"
#include "aslap/evaluation.hpp"
#include "aslap/ingest.hpp"
#include "aslap/offline_models.hpp"
#include "aslap/planner.hpp"

namespace fs = std::filesystem;

namespace aslap::cli {
namespace {

fs::path output_dir(const Config& c) { return c.path("output.dir"); }

fs::path input_or(const Config& c, const std::string& key, const fs::path& fallback) {
  const fs::path p = c.path(key);
  return p.empty() ? fallback : p;
}

fs::path models_dir(const Config& c) { return input_or(c, "files.models", output_dir(c) / "models"); }

std::string correlation_file(std::size_t sensor) { return "correlation_" + std::to_string(sensor) + ".txt"; }

// Re-raises a library parse failure as a config error naming the key.
template <typename F>
auto parse_key(const Config& c, const std::string& key, F&& parse) {
  try {
    return parse(c.get(key));
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, key + ": " + e.message());
  }
}

GridEnvironment load_env(const Config& c) {
  const fs::path p = input_or(c, "files.environment", output_dir(c) / "environment.txt");
  spdlog::info("loading environment {}", p.string());
  return load_environment(p.string());
}

models::LatentMapping load_g(const Config& c) {
  const fs::path p = models_dir(c) / "latent.txt";
  spdlog::info("loading latent mapping {}", p.string());
  return models::load_latent_mapping(p.string());
}

std::vector<models::CorrelationModel> load_h(const Config& c, std::size_t sensors) {
  std::vector<models::CorrelationModel> h;
  for (std::size_t s = 0; s < sensors; ++s) {
    const fs::path p = models_dir(c) / correlation_file(s);
    spdlog::info("loading correlation model {}", p.string());
    h.push_back(models::load_correlation_model(p.string()));
  }
  return h;
}

std::vector<Cell> parse_starts(const std::string& text) {
  std::vector<Cell> cells;
  std::stringstream all(text);
  for (std::string item; std::getline(all, item, ';');) {
    std::istringstream in(item);
    Cell c;
    char comma = 0;
    std::string rest;
    if (!(in >> c.col >> comma >> c.row) || comma != ',' || (in >> rest)) {
      throw Error(ErrorKind::Config, "mission.starts: expected 'random' or 'col,row;col,row', got '" + text + "'");
    }
    cells.push_back(c);
  }
  if (cells.empty()) throw Error(ErrorKind::Config, "mission.starts is empty");
  return cells;
}

planner::MissionConfig mission_config(const Config& c) {
  planner::MissionConfig m;
  m.horizon = c.count("mission.horizon");
  m.use_correlations = c.flag("mission.use_correlations");
  m.refine_enabled = c.flag("mission.refine_enabled");
  m.seed = c.seed("mission.seed");
  m.tie_break = parse_key(c, "mission.tie_break", planner::parse_tie_break);
  m.sensor_noise_std = c.number("mission.sensor_noise_std");
  m.mc_samples = c.count("models.mc_samples");
  m.mc_sampling = parse_key(c, "models.mc_sampling", beliefs::parse_latent_sampling);
  m.belief.length_scale = c.number("models.belief.length_scale");
  m.belief.signal_variance = c.number("models.belief.signal_variance");
  m.belief.floor_noise = c.number("models.belief.floor_noise");
  m.belief.prior_mean = c.number("models.belief.prior_mean");
  return m;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  f.close();
  if (!f) throw Error(ErrorKind::Io, "cannot write " + path.string());
}

}  // namespace

OutputSet::OutputSet(fs::path dir) : dir_(std::move(dir)) {}

OutputSet::~OutputSet() {
  if (committed_) return;
  for (const auto& f : files_) {
    std::error_code ec;
    fs::remove(f, ec);
  }
}

fs::path OutputSet::claim(const std::string& name) {
  const fs::path p = dir_ / name;
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create directory " + p.parent_path().string() + ": " + ec.message());
  files_.push_back(p);
  return p;
}

void cmd_ingest(const Config& c, OutputSet& out) {
  ingest::HistoricalDataset data;
  std::optional<GridEnvironment> env;
  std::ostringstream report;
  const std::string source = c.get("ingest.source");

  if (source == "csv") {
    const fs::path csv = c.path("ingest.csv");
    if (csv.empty()) throw Error(ErrorKind::Config, "ingest.csv must be set when ingest.source = csv");
    const auto observables = c.words("ingest.observable_cols");
    const std::string latent = c.get("ingest.latent_col");
    if (observables.empty() || latent.empty()) {
      throw Error(ErrorKind::Config, "ingest.observable_cols and ingest.latent_col must be set");
    }
    ingest::ColumnMapping mapping{c.get("ingest.lat_col"), c.get("ingest.lon_col"), c.get("ingest.time_col"),
                                  observables};
    mapping.parameters.push_back(latent);
    spdlog::info("reading {}", csv.string());
    const auto loaded = ingest::load_csv(csv.string(), mapping);
    data = ingest::build_dataset(loaded.records, observables, latent);
    ingest::GridSpec grid{c.count("ingest.grid.width"), c.count("ingest.grid.height"),
                          c.number("ingest.grid.fill_radius")};
    auto raster = ingest::rasterize(loaded.records, observables, latent, grid);
    report << "source = csv\n"
           << "rows_read = " << loaded.report.rows_read << '\n'
           << "rows_dropped = " << loaded.report.rows_dropped << '\n'
           << "cells_populated = " << raster.report.populated << '\n'
           << "cells_filled = " << raster.report.filled << '\n'
           << "cells_masked = " << raster.report.masked << '\n';
    env = std::move(raster.environment);
  } else if (source == "synthetic") {
    const auto scales = c.numbers("ingest.synthetic.length_scales");
    const auto shared = c.numbers("ingest.synthetic.shared_weights");
    if (scales.size() != shared.size()) {
      throw Error(ErrorKind::Config,
                  "ingest.synthetic.length_scales and ingest.synthetic.shared_weights differ in length");
    }
    SynthesisSpec spec;
    for (std::size_t i = 0; i < scales.size(); ++i) spec.fields.push_back({scales[i], shared[i]});
    spec.shared_length_scale = c.number("ingest.synthetic.shared_length_scale");
    spec.latent = {c.numbers("ingest.synthetic.latent_weights"), c.number("ingest.synthetic.latent_bias"),
                   c.number("ingest.synthetic.latent_noise")};
    env = synthesize(c.count("ingest.grid.width"), c.count("ingest.grid.height"), spec,
                     c.seed("ingest.synthetic.seed"));
    data = ingest::dataset_from_environment(*env, c.count("ingest.synthetic.dataset_points"),
                                            c.seed("ingest.synthetic.dataset_seed"));
    const std::size_t cells = env->width() * env->height();
    report << "source = synthetic\n"
           << "rows_read = 0\n"
           << "rows_dropped = 0\n"
           << "cells_populated = " << env->cells().size() << '\n'
           << "cells_filled = 0\n"
           << "cells_masked = " << cells - env->cells().size() << '\n';
  } else {
    throw Error(ErrorKind::Config, "ingest.source must be csv or synthetic, got '" + source + "'");
  }

  report << "dataset_rows = " << data.size() << '\n';
  save_environment(*env, out.claim("environment.txt").string());
  ingest::save_dataset(data, out.claim("dataset.csv").string());
  write_text(out.claim("ingest_report.txt"), report.str());
  spdlog::info("ingest: {} dataset rows, {}x{} grid", data.size(), env->width(), env->height());
}

void cmd_train(const Config& c, OutputSet& out) {
  const fs::path path = input_or(c, "files.dataset", output_dir(c) / "dataset.csv");
  spdlog::info("loading dataset {}", path.string());
  const auto data = ingest::load_dataset(path.string());
  if (data.size() < 2) {
    throw Error(ErrorKind::InsufficientData,
                "training needs at least 2 dataset rows, " + path.string() + " has " + std::to_string(data.size()));
  }
  const std::size_t sensors = data.sensor_count();

  const auto scales = c.numbers("models.latent.length_scales");
  const double sv = c.number("models.latent.signal_variance");
  gp::Kernel kernel = scales.size() == 1 ? gp::Kernel::isotropic(sensors, scales[0], sv) : gp::Kernel(scales, sv);
  const auto g = models::train_latent_mapping(data, kernel, c.number("models.latent.noise"));

  models::CorrelationOptions opt;
  opt.bin_count = c.count("models.correlation.bin_count");
  opt.min_bin_population = c.count("models.correlation.min_bin_population");
  opt.std_floor = c.number("models.correlation.std_floor");
  opt.refit_threshold = c.count("models.correlation.refit_threshold");
  opt.curve_signal_variance = c.number("models.correlation.curve_signal_variance");
  opt.curve_length_scale_bins = c.number("models.correlation.curve_length_scale_bins");
  opt.curve_noise = c.number("models.correlation.curve_noise");
  std::vector<models::CorrelationModel> h;
  for (std::size_t s = 0; s < sensors; ++s) h.push_back(models::train_correlation(data, s, opt));

  models::save_latent_mapping(g, out.claim("models/latent.txt").string());
  for (std::size_t s = 0; s < sensors; ++s) {
    models::save_correlation_model(h[s], out.claim("models/" + correlation_file(s)).string());
  }
  spdlog::info("train: {} rows, {} sensors", data.size(), sensors);
}

void cmd_simulate(const Config& c, OutputSet& out) {
  auto mission = mission_config(c);
  const auto env = load_env(c);
  const auto g = load_g(c);
  const std::vector<models::CorrelationModel> h =
      mission.use_correlations ? load_h(c, env.sensor_count()) : std::vector<models::CorrelationModel>{};
  const std::string starts = c.get("mission.starts");
  mission.start_positions = starts == "random" ? evaluation::sample_starts(env, mission.seed) : parse_starts(starts);

  const auto result = planner::run_mission(env, g, h, mission);

  std::ostringstream trace;
  planner::write_trace(trace, result);
  write_text(out.claim("trace.csv"), trace.str());
  beliefs::save_latent_belief(result.final_latent, out.claim("latent.txt").string());
  spdlog::info("simulate: {} timesteps, final mse {:.6g}", mission.horizon, result.mse.back());
}

void cmd_benchmark(const Config& c, OutputSet& out, unsigned jobs) {
  evaluation::BenchmarkSpec spec;
  spec.mission = mission_config(c);
  const auto env = load_env(c);
  const auto g = load_g(c);
  const auto h = load_h(c, env.sensor_count());

  spec.horizon = spec.mission.horizon;
  spec.n_trials = c.count("benchmark.n_trials");
  spec.base_seed = c.seed("benchmark.base_seed");
  spec.jobs = jobs;
  std::atomic<std::size_t> done{0};
  spec.on_trial_done = [&](std::size_t trial) {
    spdlog::debug("trial {} finished ({}/{})", trial, ++done, spec.n_trials);
  };

  const auto report = evaluation::run_benchmark(env, g, h, spec);

  std::ostringstream summary, raw;
  evaluation::write_report(summary, report);
  evaluation::write_raw(raw, report);
  write_text(out.claim("report.csv"), summary.str());
  write_text(out.claim("raw.csv"), raw.str());
  spdlog::info("benchmark: {} trials, horizon {}", spec.n_trials, spec.horizon);
}

void configure_logging(const char* level) {
  static const auto logger = [] {
    auto l = spdlog::stderr_logger_mt("aslap");
    l->set_pattern("[%l] %v");
    spdlog::set_default_logger(l);
    return l;
  }();
  const std::string name = level ? level : "";
  if (name.empty() || name == "info") {
    logger->set_level(spdlog::level::info);
  } else if (name == "error") {
    logger->set_level(spdlog::level::err);
  } else if (name == "debug") {
    logger->set_level(spdlog::level::debug);
  } else {
    throw Error(ErrorKind::Config, "ASLAP_LOG must be error, info or debug, got '" + name + "'");
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-robot latent field mapping with heterogeneous sensors"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  unsigned jobs = 1;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration file")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides output.dir)");
  };
  auto* ingest = app.add_subcommand("ingest", "Rasterize survey data and build the training dataset");
  auto* train = app.add_subcommand("train", "Fit the latent mapping and correlation models");
  auto* simulate = app.add_subcommand("simulate", "Run one mission and export its trace");
  auto* bench = app.add_subcommand("benchmark", "Run paired trials with and without correlations");
  for (auto* sub : {ingest, train, simulate, bench}) add_common(sub);
  bench->add_option("--jobs", jobs, "Parallel trials")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    configure_logging(std::getenv("ASLAP_LOG"));
    Config config = Config::load(config_path);
    if (!out_dir.empty()) config.set("output.dir", fs::absolute(out_dir).string());
    out << "# effective configuration\n";
    config.print(out);
    out.flush();

    OutputSet outputs(output_dir(config));
    if (ingest->parsed()) {
      cmd_ingest(config, outputs);
    } else if (train->parsed()) {
      cmd_train(config, outputs);
    } else if (simulate->parsed()) {
      cmd_simulate(config, outputs);
    } else {
      cmd_benchmark(config, outputs, jobs);
    }
    outputs.commit();
    for (const auto& f : outputs.files()) out << "wrote " << f.string() << '\n';
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::Config ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace aslap::cli
