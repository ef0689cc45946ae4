#include "aslap/gp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aslap/error.hpp"

namespace aslap::gp {
namespace {

constexpr double kInitialJitter = 1e-8;
constexpr double kMaxJitter = 1e-4;
constexpr double kNegativeVarianceTolerance = 1e-9;

void validate(const Kernel& kernel, std::span<const Observation> observations,
              std::size_t index_offset) {
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const auto& obs = observations[i];
    const std::string where = "observation " + std::to_string(index_offset + i);
    if (obs.input.size() != kernel.dim()) {
      throw Error(ErrorKind::InvalidArgument,
                  where + " has input dimension " + std::to_string(obs.input.size()) +
                      ", kernel expects " + std::to_string(kernel.dim()));
    }
    for (double v : obs.input) {
      if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, where + " has a non-finite input");
    }
    if (!std::isfinite(obs.target)) {
      throw Error(ErrorKind::InvalidArgument, where + " has a non-finite target");
    }
    if (!std::isfinite(obs.noise_variance) || obs.noise_variance < 0.0) {
      throw Error(ErrorKind::InvalidArgument, where + " has an invalid noise variance");
    }
  }
}

}  // namespace

Kernel::Kernel(std::vector<double> length_scales, double signal_variance)
    : length_scales_(std::move(length_scales)), signal_variance_(signal_variance) {
  if (length_scales_.empty()) {
    throw Error(ErrorKind::InvalidArgument, "kernel needs at least one input dimension");
  }
  for (double l : length_scales_) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw Error(ErrorKind::InvalidArgument, "kernel length scales must be positive and finite");
    }
  }
  if (!(signal_variance_ > 0.0) || !std::isfinite(signal_variance_)) {
    throw Error(ErrorKind::InvalidArgument, "kernel signal variance must be positive and finite");
  }
}

Kernel Kernel::isotropic(std::size_t dim, double length_scale, double signal_variance) {
  return Kernel(std::vector<double>(dim, length_scale), signal_variance);
}

double Kernel::operator()(std::span<const double> a, std::span<const double> b) const {
  double r2 = 0.0;
  for (std::size_t d = 0; d < length_scales_.size(); ++d) {
    const double u = (a[d] - b[d]) / length_scales_[d];
    r2 += u * u;
  }
  return signal_variance_ * std::exp(-0.5 * r2);
}

Eigen::MatrixXd Kernel::cross(const Eigen::MatrixXd& points, const Eigen::MatrixXd& queries) const {
  const Eigen::Index n = points.cols();
  const Eigen::Index m = queries.cols();
  Eigen::ArrayXXd r2 = Eigen::ArrayXXd::Zero(n, m);
  for (std::size_t d = 0; d < length_scales_.size(); ++d) {
    const double inv = 1.0 / length_scales_[d];
    const Eigen::ArrayXd p = points.row(static_cast<Eigen::Index>(d)).transpose().array() * inv;
    const Eigen::ArrayXd q = queries.row(static_cast<Eigen::Index>(d)).transpose().array() * inv;
    for (Eigen::Index j = 0; j < m; ++j) {
      r2.col(j) += (p - q(j)).square();
    }
  }
  return (signal_variance_ * (-0.5 * r2).exp()).matrix();
}

Eigen::MatrixXd Kernel::gram(const Eigen::MatrixXd& points) const {
  Eigen::MatrixXd k = cross(points, points);
  // Exact symmetry and diagonal regardless of rounding in the distance loop.
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    k(i, i) = signal_variance_;
    for (Eigen::Index j = 0; j < i; ++j) k(j, i) = k(i, j);
  }
  return k;
}

GPModel::GPModel(Kernel kernel) : kernel_(std::move(kernel)) {}

GPModel GPModel::fit(Kernel kernel, std::vector<Observation> observations) {
  validate(kernel, observations, 0);
  GPModel model(std::move(kernel));
  model.observations_ = std::move(observations);
  const auto n = static_cast<Eigen::Index>(model.observations_.size());
  const auto dim = static_cast<Eigen::Index>(model.kernel_.dim());
  model.inputs_.resize(dim, n);
  model.targets_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& obs = model.observations_[static_cast<std::size_t>(i)];
    for (Eigen::Index d = 0; d < dim; ++d) model.inputs_(d, i) = obs.input[static_cast<std::size_t>(d)];
    model.targets_(i) = obs.target;
  }
  model.factorize();
  model.solve_weights();
  return model;
}

void GPModel::factorize() {
  const double sv = kernel_.signal_variance();
  const auto n = inputs_.cols();
  Eigen::MatrixXd k = kernel_.gram(inputs_);
  for (Eigen::Index i = 0; i < n; ++i) k(i, i) += observations_[static_cast<std::size_t>(i)].noise_variance;

  double jitter = kInitialJitter * sv;
  for (;;) {
    Eigen::MatrixXd shifted = k;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) {
      chol_ = llt.matrixL();
      inv_chol_ = chol_.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
      jitter_ = jitter;
      return;
    }
    if (jitter >= kMaxJitter * sv) break;
    jitter = std::min(2.0 * jitter, kMaxJitter * sv);
  }
  throw Error(ErrorKind::NumericDegeneracy,
              "covariance matrix of " + std::to_string(n) +
                  " observations is not positive definite even with jitter " + std::to_string(jitter));
}

void GPModel::solve_weights() {
  weights_ = chol_.triangularView<Eigen::Lower>().solve(targets_);
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(weights_);
}

GPModel GPModel::extend(std::span<const Observation> added) const {
  if (added.empty()) return *this;
  validate(kernel_, added, observations_.size());
  if (observations_.empty()) {
    return fit(kernel_, std::vector<Observation>(added.begin(), added.end()));
  }

  const Eigen::Index n = inputs_.cols();
  const auto p = static_cast<Eigen::Index>(added.size());
  const auto dim = inputs_.rows();

  GPModel model(kernel_);
  model.observations_ = observations_;
  model.observations_.insert(model.observations_.end(), added.begin(), added.end());
  model.inputs_.resize(dim, n + p);
  model.inputs_.leftCols(n) = inputs_;
  model.targets_.resize(n + p);
  model.targets_.head(n) = targets_;
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto& obs = added[static_cast<std::size_t>(j)];
    for (Eigen::Index d = 0; d < dim; ++d) model.inputs_(d, n + j) = obs.input[static_cast<std::size_t>(d)];
    model.targets_(n + j) = obs.target;
  }

  const Eigen::MatrixXd new_inputs = model.inputs_.rightCols(p);
  Eigen::MatrixXd k12 = kernel_.cross(inputs_, new_inputs);
  chol_.triangularView<Eigen::Lower>().solveInPlace(k12);  // becomes L21^T
  Eigen::MatrixXd k22 = kernel_.gram(new_inputs);
  for (Eigen::Index j = 0; j < p; ++j) {
    k22(j, j) += added[static_cast<std::size_t>(j)].noise_variance + jitter_;
  }
  k22.noalias() -= k12.transpose() * k12;
  Eigen::LLT<Eigen::MatrixXd> llt(k22);
  if (llt.info() != Eigen::Success) {
    // The appended block needs more jitter; refactor everything from scratch.
    model.factorize();
    model.solve_weights();
    return model;
  }
  model.jitter_ = jitter_;
  model.chol_.resize(n + p, n + p);
  model.chol_.topLeftCorner(n, n) = chol_;
  model.chol_.topRightCorner(n, p).setZero();
  model.chol_.bottomLeftCorner(p, n) = k12.transpose();
  model.chol_.bottomRightCorner(p, p) = llt.matrixL();
  // [L11 0; L21 L22]^-1 = [W11 0; -W22 L21 W11  W22]
  const Eigen::MatrixXd w22 =
      model.chol_.bottomRightCorner(p, p).triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(p, p));
  model.inv_chol_.resize(n + p, n + p);
  model.inv_chol_.topLeftCorner(n, n) = inv_chol_;
  model.inv_chol_.topRightCorner(n, p).setZero();
  model.inv_chol_.bottomRightCorner(p, p) = w22;
  model.inv_chol_.bottomLeftCorner(p, n).noalias() = -w22 * (k12.transpose() * inv_chol_);
  model.solve_weights();
  return model;
}

void GPModel::predict(const Eigen::MatrixXd& queries, Eigen::VectorXd& mean,
                      Eigen::VectorXd& variance) const {
  if (static_cast<std::size_t>(queries.rows()) != kernel_.dim()) {
    throw Error(ErrorKind::InvalidArgument,
                "query dimension " + std::to_string(queries.rows()) + " does not match kernel dimension " +
                    std::to_string(kernel_.dim()));
  }
  if (!queries.allFinite()) throw Error(ErrorKind::InvalidArgument, "query is not finite");

  const double sv = kernel_.signal_variance();
  const Eigen::Index m = queries.cols();
  if (observations_.empty()) {
    mean = Eigen::VectorXd::Zero(m);
    variance = Eigen::VectorXd::Constant(m, sv);
    return;
  }
  const Eigen::MatrixXd kx = kernel_.cross(inputs_, queries);
  mean.noalias() = kx.transpose() * weights_;
  const Eigen::MatrixXd whitened = inv_chol_ * kx;
  variance = (sv - whitened.colwise().squaredNorm().array()).matrix().transpose();
  for (Eigen::Index j = 0; j < m; ++j) {
    double& v = variance(j);
    if (v < 0.0) {
      if (v < -kNegativeVarianceTolerance) {
        throw Error(ErrorKind::NumericDegeneracy,
                    "posterior variance " + std::to_string(v) + " is negative beyond tolerance");
      }
      v = 0.0;
    }
  }
}

Prediction GPModel::predict(std::span<const double> query) const {
  if (query.size() != kernel_.dim()) {
    throw Error(ErrorKind::InvalidArgument,
                "query dimension " + std::to_string(query.size()) + " does not match kernel dimension " +
                    std::to_string(kernel_.dim()));
  }
  Eigen::MatrixXd q(static_cast<Eigen::Index>(query.size()), 1);
  for (std::size_t d = 0; d < query.size(); ++d) q(static_cast<Eigen::Index>(d), 0) = query[d];
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  predict(q, mean, variance);
  return {mean(0), variance(0)};
}

}  // namespace aslap::gp
