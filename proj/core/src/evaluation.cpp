#include "aslap/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <thread>

#include "aslap/error.hpp"
#include "aslap/seed.hpp"

namespace aslap::evaluation {

double mse(const beliefs::LatentBelief& latent, const GridEnvironment& env) {
  const Raster& truth = env.latent();
  if (latent.mean.width() != truth.width() || latent.mean.height() != truth.height()) {
    throw Error(ErrorKind::InvalidArgument, "latent belief and environment differ in dimensions");
  }
  double sum = 0.0;
  for (const Cell& c : env.cells()) {
    const double est = latent.mean.at(c);
    if (!std::isfinite(est)) {
      throw Error(ErrorKind::InvalidArgument, "latent belief has no estimate at valid cell " + to_string(c));
    }
    const double d = truth.at(c) - est;
    sum += d * d;
  }
  return sum / static_cast<double>(env.cells().size());
}

double spread(std::span<const Cell> positions) {
  if (positions.size() < 2) throw Error(ErrorKind::InvalidArgument, "spread needs at least two positions");
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      total += std::hypot(static_cast<double>(positions[i].col - positions[j].col),
                          static_cast<double>(positions[i].row - positions[j].row));
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

const char* to_string(Variant variant) noexcept {
  return variant == Variant::WithCorrelations ? "with_correlations" : "without_correlations";
}

const VariantReport& BenchmarkReport::variant(Variant v) const {
  for (const auto& r : variants) {
    if (r.variant == v) return r;
  }
  throw Error(ErrorKind::InvalidArgument, std::string("report has no variant ") + to_string(v));
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorKind::InvalidArgument, "percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<Cell> sample_starts(const GridEnvironment& env, std::uint64_t trial_seed) {
  std::mt19937_64 rng(derive_seed(trial_seed, kStartStream));
  std::uniform_int_distribution<std::size_t> pick(0, env.cells().size() - 1);
  std::vector<Cell> starts;
  for (std::size_t k = 0; k < env.sensor_count(); ++k) starts.push_back(env.cells()[pick(rng)]);
  return starts;
}

BenchmarkReport run_benchmark(const GridEnvironment& env, const models::LatentMapping& g,
                              const std::vector<models::CorrelationModel>& correlations, const BenchmarkSpec& spec) {
  if (spec.n_trials < 1) throw Error(ErrorKind::Config, "benchmark needs at least one trial");
  if (spec.variants.empty()) throw Error(ErrorKind::Config, "benchmark needs at least one variant");

  const std::size_t nv = spec.variants.size();
  // results[trial][variant]
  std::vector<std::vector<TrialSeries>> results(spec.n_trials, std::vector<TrialSeries>(nv));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex error_mutex;
  std::optional<std::size_t> failed_trial;
  std::exception_ptr failure;

  const auto run_trial = [&](std::size_t trial) {
    const std::uint64_t seed = spec.base_seed + trial;
    const auto starts = sample_starts(env, seed);
    for (std::size_t v = 0; v < nv; ++v) {
      planner::MissionConfig cfg = spec.mission;
      cfg.horizon = spec.horizon;
      cfg.start_positions = starts;
      cfg.seed = seed;
      cfg.use_correlations = spec.variants[v] == Variant::WithCorrelations;
      const auto res = planner::run_mission(env, g, correlations, cfg);
      results[trial][v] = {trial, seed, starts, res.mse, res.spread};
    }
  };

  const auto worker = [&] {
    for (;;) {
      if (abort.load()) return;
      const std::size_t trial = next.fetch_add(1);
      if (trial >= spec.n_trials) return;
      try {
        run_trial(trial);
        if (spec.on_trial_done) spec.on_trial_done(trial);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!failed_trial || trial < *failed_trial) {
          failed_trial = trial;
          failure = std::current_exception();
        }
        abort.store(true);
        return;
      }
    }
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(spec.jobs, static_cast<unsigned>(spec.n_trials)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const Error& e) {
      throw Error(e.kind(), "trial " + std::to_string(*failed_trial) + ": " + e.message());
    } catch (const std::exception& e) {
      throw Error(ErrorKind::InvalidArgument, "trial " + std::to_string(*failed_trial) + ": " + e.what());
    }
  }

  BenchmarkReport report;
  for (std::size_t v = 0; v < nv; ++v) {
    VariantReport vr;
    vr.variant = spec.variants[v];
    for (std::size_t trial = 0; trial < spec.n_trials; ++trial) vr.trials.push_back(std::move(results[trial][v]));
    const std::size_t steps = spec.horizon + 1;
    for (std::size_t t = 0; t < steps; ++t) {
      std::vector<double> column;
      column.reserve(spec.n_trials);
      for (const auto& tr : vr.trials) column.push_back(tr.mse.at(t));
      vr.mse.push_back({percentile(column, 0.25), percentile(column, 0.5), percentile(column, 0.75)});
    }
    report.variants.push_back(std::move(vr));
  }
  return report;
}

void write_report(std::ostream& out, const BenchmarkReport& report) {
  out << "variant,t,p25,median,p75\n";
  char buf[160];
  for (const auto& vr : report.variants) {
    for (std::size_t t = 0; t < vr.mse.size(); ++t) {
      const auto& row = vr.mse[t];
      std::snprintf(buf, sizeof buf, "%s,%zu,%.17g,%.17g,%.17g\n", to_string(vr.variant), t, row.p25, row.median,
                    row.p75);
      out << buf;
    }
  }
}

void write_raw(std::ostream& out, const BenchmarkReport& report) {
  out << "variant,trial,seed,t,mse,spread\n";
  char buf[160];
  for (const auto& vr : report.variants) {
    for (const auto& tr : vr.trials) {
      for (std::size_t t = 0; t < tr.mse.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%s,%zu,%llu,%zu,%.17g,%.17g\n", to_string(vr.variant), tr.trial,
                      static_cast<unsigned long long>(tr.seed), t, tr.mse[t], tr.spread[t]);
        out << buf;
      }
    }
  }
}

}  // namespace aslap::evaluation
