#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace aslap::gp {

enum class KernelFamily { SquaredExponential };

/// Squared-exponential (ARD) covariance
///   k(a, b) = signal_variance * exp(-0.5 * sum_d ((a_d - b_d) / l_d)^2).
class Kernel {
 public:
  Kernel(std::vector<double> length_scales, double signal_variance);

  static Kernel isotropic(std::size_t dim, double length_scale, double signal_variance);

  KernelFamily family() const noexcept { return KernelFamily::SquaredExponential; }
  std::size_t dim() const noexcept { return length_scales_.size(); }
  const std::vector<double>& length_scales() const noexcept { return length_scales_; }
  double signal_variance() const noexcept { return signal_variance_; }

  double operator()(std::span<const double> a, std::span<const double> b) const;

  /// Columns of `points` are inputs (dim x n). Returns the n x n Gram matrix.
  Eigen::MatrixXd gram(const Eigen::MatrixXd& points) const;
  /// Returns the n x m matrix k(points_i, queries_j).
  Eigen::MatrixXd cross(const Eigen::MatrixXd& points, const Eigen::MatrixXd& queries) const;

  friend bool operator==(const Kernel&, const Kernel&) = default;

 private:
  std::vector<double> length_scales_;
  double signal_variance_;
};

struct Observation {
  std::vector<double> input;
  double target = 0.0;
  double noise_variance = 0.0;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Exact GP posterior with zero prior mean and per-observation noise.
///
/// Immutable once built: `fit` and `extend` return new models. The cached
/// lower Cholesky factor L is of K + diag(noise) + jitter * I, where jitter
/// starts at 1e-8 * signal_variance and doubles on factorization failure up
/// to 1e-4 * signal_variance. L^-1 is cached as well so batch prediction is a
/// single matrix product.
class GPModel {
 public:
  static GPModel fit(Kernel kernel, std::vector<Observation> observations);

  /// Equivalent to fit(kernel, observations ++ added); appends to the
  /// Cholesky factor when the current jitter suffices.
  GPModel extend(std::span<const Observation> added) const;

  Prediction predict(std::span<const double> query) const;

  /// Batch form. `queries` is dim x m; `mean` and `variance` are resized to m.
  void predict(const Eigen::MatrixXd& queries, Eigen::VectorXd& mean,
               Eigen::VectorXd& variance) const;

  const Kernel& kernel() const noexcept { return kernel_; }
  const std::vector<Observation>& observations() const noexcept { return observations_; }
  std::size_t size() const noexcept { return observations_.size(); }
  double jitter() const noexcept { return jitter_; }

 private:
  explicit GPModel(Kernel kernel);

  void factorize();
  void solve_weights();

  Kernel kernel_;
  std::vector<Observation> observations_;
  Eigen::MatrixXd inputs_;   // dim x n
  Eigen::VectorXd targets_;
  Eigen::MatrixXd chol_;     // lower, n x n
  Eigen::MatrixXd inv_chol_; // L^-1, lower
  Eigen::VectorXd weights_;  // (K + Sigma)^-1 y
  double jitter_ = 0.0;
};

}  // namespace aslap::gp
