#pragma once

// Independent reference implementations used as test oracles. None of these
// touch Eigen or the library's factorization code.

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "aslap/environment.hpp"
#include "aslap/gp.hpp"
#include "aslap/ingest.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline double se_kernel(const std::vector<double>& a, const std::vector<double>& b,
                        const std::vector<double>& ls, double sv) {
  double r2 = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double u = (a[d] - b[d]) / ls[d];
    r2 += u * u;
  }
  return sv * std::exp(-0.5 * r2);
}

// Gauss-Jordan inverse with partial pivoting.
inline Matrix invert(Matrix a) {
  const std::size_t n = a.size();
  Matrix inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (a[pivot][col] == 0.0) throw std::runtime_error("singular matrix in oracle");
    std::swap(a[pivot], a[col]);
    std::swap(inv[pivot], inv[col]);
    const double p = a[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] /= p;
      inv[col][j] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

struct Posterior {
  double mean;
  double variance;
};

// mu = k*^T (K + Sigma + jitter I)^-1 y,  var = k** - k*^T (K + Sigma + jitter I)^-1 k*
inline Posterior dense_posterior(const std::vector<double>& ls, double sv,
                                 const std::vector<aslap::gp::Observation>& obs, double jitter,
                                 const std::vector<double>& query) {
  const std::size_t n = obs.size();
  if (n == 0) return {0.0, sv};
  Matrix k(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) k[i][j] = se_kernel(obs[i].input, obs[j].input, ls, sv);
    k[i][i] += obs[i].noise_variance + jitter;
  }
  const Matrix kinv = invert(k);
  std::vector<double> ks(n);
  for (std::size_t i = 0; i < n; ++i) ks[i] = se_kernel(obs[i].input, query, ls, sv);
  double mean = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      mean += ks[i] * kinv[i][j] * obs[j].target;
      quad += ks[i] * kinv[i][j] * ks[j];
    }
  }
  return {mean, sv - quad};
}

// Random GP problems with well-separated inputs so the oracle's plain inverse
// stays accurate.
struct Case {
  std::vector<double> ls;
  double sv;
  std::vector<aslap::gp::Observation> obs;
  std::vector<std::vector<double>> queries;
};

inline Case random_case(std::mt19937_64& rng, std::size_t max_obs = 10, std::size_t n_queries = 5) {
  std::uniform_int_distribution<std::size_t> dim_pick(1, 3);
  std::uniform_int_distribution<std::size_t> n_pick(0, max_obs);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Case c;
  const std::size_t dim = dim_pick(rng);
  for (std::size_t d = 0; d < dim; ++d) c.ls.push_back(0.2 + 0.8 * unit(rng));
  c.sv = 0.1 + 2.0 * unit(rng);
  const std::size_t n = n_pick(rng);
  for (std::size_t i = 0; i < n; ++i) {
    aslap::gp::Observation o;
    for (std::size_t d = 0; d < dim; ++d) o.input.push_back(2.0 * unit(rng));
    o.target = 2.0 * unit(rng) - 1.0;
    // Heteroscedastic: a mix of small and large noise levels.
    o.noise_variance = unit(rng) < 0.5 ? 1e-3 + 0.01 * unit(rng) : 0.05 + 0.5 * unit(rng);
    c.obs.push_back(std::move(o));
  }
  for (std::size_t q = 0; q < n_queries; ++q) {
    std::vector<double> x;
    for (std::size_t d = 0; d < dim; ++d) x.push_back(-0.5 + 3.0 * unit(rng));
    c.queries.push_back(std::move(x));
  }
  return c;
}

// Fully valid environment built from explicit rasters.
inline aslap::GridEnvironment make_env(std::size_t w, std::size_t h, std::size_t sensors, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<aslap::Raster> fields;
  for (std::size_t f = 0; f <= sensors; ++f) {
    aslap::Raster r(w, h);
    for (double& v : r.values()) v = unit(rng);
    fields.push_back(std::move(r));
  }
  return aslap::GridEnvironment(std::move(fields));
}

// Dataset with uniform observables and a given latent rule.
template <class Rule>
aslap::ingest::HistoricalDataset uniform_dataset(std::size_t n, std::size_t sensors, std::uint64_t seed, Rule rule) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  aslap::ingest::HistoricalDataset d;
  d.observables.assign(sensors, {});
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> z(sensors);
    for (double& v : z) v = unit(rng);
    for (std::size_t k = 0; k < sensors; ++k) d.observables[k].push_back(z[k]);
    d.latent.push_back(rule(z, rng));
    d.locations.push_back({static_cast<double>(i), 0.0});
  }
  for (std::size_t k = 0; k <= sensors; ++k) d.bounds.push_back({0.0, 1.0});
  for (std::size_t k = 0; k < sensors; ++k) d.names.push_back("z" + std::to_string(k));
  d.names.push_back("latent");
  return d;
}

}  // namespace oracle
