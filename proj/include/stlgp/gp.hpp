#pragma once

#include "stlgp/interval.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace stlgp {

using Point = std::vector<double>;

/// Arcsine (neural-network) covariance
///   k(x, y) = sf2 * 2/pi * asin(2 a'S b / sqrt((1 + 2 a'S a)(1 + 2 b'S b)))
/// with a = (1, x), b = (1, y) and S = diag(sigma). sigma[0] is the bias entry.
struct NeuralNetworkKernel {
  double signal_variance = 1.0;
  std::vector<double> sigma;

  std::size_t dim() const { return sigma.empty() ? 0 : sigma.size() - 1; }
  double operator()(std::span<const double> x, std::span<const double> y) const;
  void validate() const;
};

struct GPHyperparameters {
  NeuralNetworkKernel kernel;
  double noise_variance = 1e-8;
};

struct GPFitOptions {
  int restarts = 5;
  int evaluations = 100;
  /// Box for the signal variance and each sigma entry. The signal variance
  /// bound is relative to the output variance of the data.
  double lower = 1e-3;
  double upper = 1e3;
  /// Box for the noise variance, also relative to the output variance.
  double noise_lower = 1e-8;
  double noise_upper = 1.0;
  /// Replaces the empirical mean of the outputs when set.
  std::optional<double> fixed_mean;
  std::uint64_t seed = 0;
  /// Start point of the first restart, in data units. Default start otherwise.
  std::optional<GPHyperparameters> warm_start;
};

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;
};

/// Averages the outputs of inputs closer than tol (max-norm) to an earlier
/// input and drops the repeats. Order of first occurrence is kept.
void merge_duplicates(std::vector<Point>& inputs, std::vector<double>& outputs, double tol = 1e-10);

/// Exact GP regression with a constant mean and Gaussian noise.
class GPModel {
public:
  /// Conditions on the data with the given hyperparameters (no fitting).
  GPModel(std::vector<Point> inputs, std::vector<double> outputs, GPHyperparameters hyper,
          std::optional<double> fixed_mean = std::nullopt);

  /// Maximizes the log marginal likelihood over log-hyperparameters with
  /// restarted Nelder-Mead. Throws InsufficientDataError below 2 distinct points.
  static GPModel fit(std::vector<Point> inputs, std::vector<double> outputs,
                     const GPFitOptions& options = {});

  Posterior predict(std::span<const double> x) const;
  std::vector<Posterior> predict(const std::vector<Point>& xs) const;

  double log_marginal_likelihood() const { return lml_; }
  /// Gradient with respect to (log sf2, log sigma_0..sigma_D, log noise).
  std::vector<double> log_marginal_likelihood_gradient() const;

  const GPHyperparameters& hyperparameters() const { return hyper_; }
  double mean() const { return mean_; }
  /// Extra diagonal added on top of the noise to make the factorization succeed.
  double jitter() const { return jitter_; }
  std::size_t size() const { return inputs_.size(); }
  std::size_t dim() const { return hyper_.kernel.dim(); }
  const std::vector<Point>& inputs() const { return inputs_; }
  const std::vector<double>& outputs() const { return outputs_; }

private:
  std::vector<Point> inputs_;
  std::vector<double> outputs_;
  GPHyperparameters hyper_;
  double mean_ = 0.0;
  double jitter_ = 0.0;
  Eigen::MatrixXd x_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double lml_ = 0.0;
};

/// P(f in I) for f ~ N(mean, variance); the indicator of mean in I when the
/// variance is zero.
double prob_in_interval(const Posterior& p, const Interval& interval);

} // namespace stlgp
