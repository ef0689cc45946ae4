#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "aslap/metrics.hpp"
#include "aslap/offline_models.hpp"
#include "aslap/planner.hpp"

namespace aslap::evaluation {

enum class Variant { WithCorrelations, WithoutCorrelations };

const char* to_string(Variant variant) noexcept;

struct BenchmarkSpec {
  std::size_t n_trials = 200;
  std::size_t horizon = 150;
  std::uint64_t base_seed = 0;
  std::vector<Variant> variants{Variant::WithCorrelations, Variant::WithoutCorrelations};
  /// Template for every mission; horizon, starts, seed and use_correlations
  /// are overwritten per trial and variant.
  planner::MissionConfig mission;
  unsigned jobs = 1;
  /// Called after each completed trial (from worker threads when jobs > 1).
  std::function<void(std::size_t trial)> on_trial_done;
};

struct TrialSeries {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::vector<Cell> starts;
  std::vector<double> mse;
  std::vector<double> spread;
};

struct PercentileRow {
  double p25 = 0.0;
  double median = 0.0;
  double p75 = 0.0;
};

struct VariantReport {
  Variant variant = Variant::WithCorrelations;
  std::vector<PercentileRow> mse;  // index t in [0, T]
  std::vector<TrialSeries> trials;
};

struct BenchmarkReport {
  std::vector<VariantReport> variants;

  const VariantReport& variant(Variant v) const;
};

/// Linear-interpolation percentile, q in [0, 1].
double percentile(std::vector<double> values, double q);

/// Start positions for a trial: one uniform draw from the valid cells per robot.
std::vector<Cell> sample_starts(const GridEnvironment& env, std::uint64_t trial_seed);

/// Runs n_trials seed-paired trials (seed = base_seed + trial) per variant
/// and aggregates per-timestep MSE percentiles. Any trial failure aborts the
/// run; the error names the lowest failing trial.
BenchmarkReport run_benchmark(const GridEnvironment& env, const models::LatentMapping& g,
                              const std::vector<models::CorrelationModel>& correlations, const BenchmarkSpec& spec);

/// `variant,t,p25,median,p75`
void write_report(std::ostream& out, const BenchmarkReport& report);
/// `variant,trial,seed,t,mse,spread`
void write_raw(std::ostream& out, const BenchmarkReport& report);

}  // namespace aslap::evaluation
