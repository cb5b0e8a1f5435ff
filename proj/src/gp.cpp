#include "stlgp/gp.hpp"
#include "stlgp/errors.hpp"
#include "stlgp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace stlgp {

namespace {

constexpr double kTwoOverPi = 2.0 / 3.14159265358979323846;
constexpr double kLog2Pi = 1.8378770664093454836;

Eigen::MatrixXd to_matrix(const std::vector<Point>& xs, std::size_t dim) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].size() != dim) {
      throw ValidationError("input point has dimension " + std::to_string(xs[i].size()) +
                            ", expected " + std::to_string(dim));
    }
    for (std::size_t d = 0; d < dim; ++d) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = xs[i][d];
  }
  return m;
}

/// Pieces of the kernel shared by the value and its derivatives.
struct KernelParts {
  Eigen::VectorXd self_a;   // 1 + 2 x'Sx per row of A
  Eigen::VectorXd self_b;
  Eigen::MatrixXd z;        // asin argument
};

KernelParts kernel_parts(const NeuralNetworkKernel& k, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::Index dim = a.cols();
  Eigen::VectorXd s(dim);
  for (Eigen::Index d = 0; d < dim; ++d) s(d) = k.sigma[static_cast<std::size_t>(d) + 1];
  const double s0 = k.sigma[0];
  const Eigen::MatrixXd as = a * s.asDiagonal();
  KernelParts p;
  p.self_a = (1.0 + 2.0 * s0) + 2.0 * (as.cwiseProduct(a)).rowwise().sum().array();
  const Eigen::MatrixXd bs = b * s.asDiagonal();
  p.self_b = (1.0 + 2.0 * s0) + 2.0 * (bs.cwiseProduct(b)).rowwise().sum().array();
  Eigen::MatrixXd cross = (2.0 * s0) + 2.0 * (as * b.transpose()).array();
  const Eigen::ArrayXd ra = p.self_a.array().rsqrt();
  const Eigen::ArrayXd rb = p.self_b.array().rsqrt();
  cross.array().colwise() *= ra;
  cross.array().rowwise() *= rb.transpose();
  p.z = cross.cwiseMax(-1.0).cwiseMin(1.0);
  return p;
}

Eigen::MatrixXd kernel_matrix(const NeuralNetworkKernel& k, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const KernelParts p = kernel_parts(k, a, b);
  return (k.signal_variance * kTwoOverPi) * p.z.array().asin().matrix();
}

struct Factored {
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd alpha;
  double jitter = 0.0;
  double lml = 0.0;
};

/// Cholesky of K + noise*I with jitter escalation; throws NumericalError.
Factored factor(const Eigen::MatrixXd& k, double noise, const Eigen::VectorXd& y) {
  const Eigen::Index n = k.rows();
  const double scale = std::max(k.diagonal().mean(), std::numeric_limits<double>::min());
  Factored f;
  Eigen::MatrixXd a = k;
  a.diagonal().array() += noise;
  f.llt.compute(a);
  for (double j = 1e-8; f.llt.info() != Eigen::Success; j *= 10.0) {
    if (j > 1e-4 * 1.0000001) {
      throw NumericalError("covariance matrix not positive definite after jitter 1e-4");
    }
    f.jitter = j * scale;
    Eigen::MatrixXd b = a;
    b.diagonal().array() += f.jitter;
    f.llt.compute(b);
  }
  f.alpha = f.llt.solve(y);
  const Eigen::MatrixXd& l = f.llt.matrixLLT();
  double half_logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) half_logdet += std::log(l(i, i));
  f.lml = -0.5 * y.dot(f.alpha) - half_logdet - 0.5 * static_cast<double>(n) * kLog2Pi;
  if (!std::isfinite(f.lml)) throw NumericalError("log marginal likelihood is not finite");
  return f;
}

// Nelder-Mead minimization within an evaluation budget.
struct Simplex {
  std::vector<double> best;
  double value = std::numeric_limits<double>::infinity();
};

template <class F>
Simplex nelder_mead(F&& f, std::vector<double> start, double step, int budget) {
  const std::size_t n = start.size();
  std::vector<std::vector<double>> pts(n + 1, start);
  std::vector<double> vals(n + 1);
  int used = 0;
  auto eval = [&](const std::vector<double>& p) {
    ++used;
    return f(p);
  };
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
  for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

  std::vector<std::size_t> order(n + 1);
  while (used < budget) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t worst = order[n];
    const std::size_t second = order[n - 1];
    const std::size_t lowest = order[0];
    if (std::abs(vals[worst] - vals[lowest]) < 1e-10 * (1.0 + std::abs(vals[lowest]))) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d] / static_cast<double>(n);
    }
    auto along = [&](double coef) {
      std::vector<double> p(n);
      for (std::size_t d = 0; d < n; ++d) p[d] = centroid[d] + coef * (pts[worst][d] - centroid[d]);
      return p;
    };
    const auto reflected = along(-1.0);
    const double fr = eval(reflected);
    if (fr < vals[lowest]) {
      const auto expanded = along(-2.0);
      const double fe = used < budget ? eval(expanded) : fr;
      if (fe < fr) {
        pts[worst] = expanded;
        vals[worst] = fe;
      } else {
        pts[worst] = reflected;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = reflected;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const auto contracted = along(outside ? -0.5 : 0.5);
    const double fc = eval(contracted);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = contracted;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n && used < budget; ++i) {
      if (i == lowest) continue;
      for (std::size_t d = 0; d < n; ++d) pts[i][d] = pts[lowest][d] + 0.5 * (pts[i][d] - pts[lowest][d]);
      vals[i] = eval(pts[i]);
    }
  }
  Simplex out;
  for (std::size_t i = 0; i <= n; ++i) {
    if (vals[i] < out.value) {
      out.value = vals[i];
      out.best = pts[i];
    }
  }
  return out;
}

} // namespace

std::string Interval::to_string() const {
  return std::string(lo_closed ? "[" : "(") + std::to_string(lo) + ", " + std::to_string(hi) +
         (hi_closed ? "]" : ")");
}

double NeuralNetworkKernel::operator()(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != dim() || y.size() != dim()) {
    throw ValidationError("kernel of dimension " + std::to_string(dim()) + " applied to points of dimension " +
                          std::to_string(x.size()) + " and " + std::to_string(y.size()));
  }
  double xx = sigma[0], yy = sigma[0], xy = sigma[0];
  for (std::size_t d = 0; d < x.size(); ++d) {
    xx += sigma[d + 1] * x[d] * x[d];
    yy += sigma[d + 1] * y[d] * y[d];
    xy += sigma[d + 1] * (x[d] * y[d]);
  }
  const double z = 2.0 * xy / std::sqrt((1.0 + 2.0 * xx) * (1.0 + 2.0 * yy));
  return signal_variance * kTwoOverPi * std::asin(std::clamp(z, -1.0, 1.0));
}

void NeuralNetworkKernel::validate() const {
  if (sigma.empty()) throw ValidationError("kernel needs at least the bias entry");
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
    throw ValidationError("kernel signal variance must be positive");
  }
  for (double s : sigma) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("kernel length-scale entries must be positive");
  }
}

void merge_duplicates(std::vector<Point>& inputs, std::vector<double>& outputs, double tol) {
  if (inputs.size() != outputs.size()) throw ValidationError("inputs and outputs differ in length");
  std::vector<Point> xs;
  std::vector<double> sums;
  std::vector<int> counts;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    std::size_t hit = xs.size();
    for (std::size_t j = 0; j < xs.size() && hit == xs.size(); ++j) {
      if (xs[j].size() != inputs[i].size()) continue;
      double dist = 0.0;
      for (std::size_t d = 0; d < xs[j].size(); ++d) dist = std::max(dist, std::abs(xs[j][d] - inputs[i][d]));
      if (dist <= tol) hit = j;
    }
    if (hit == xs.size()) {
      xs.push_back(inputs[i]);
      sums.push_back(outputs[i]);
      counts.push_back(1);
    } else {
      sums[hit] += outputs[i];
      ++counts[hit];
    }
  }
  for (std::size_t j = 0; j < sums.size(); ++j) sums[j] /= counts[j];
  inputs = std::move(xs);
  outputs = std::move(sums);
}

GPModel::GPModel(std::vector<Point> inputs, std::vector<double> outputs, GPHyperparameters hyper,
                 std::optional<double> fixed_mean)
    : hyper_(std::move(hyper)) {
  hyper_.kernel.validate();
  if (!(hyper_.noise_variance >= 0.0)) throw ValidationError("noise variance must be non-negative");
  merge_duplicates(inputs, outputs);
  if (inputs.empty()) throw InsufficientDataError("GP needs at least one training point");
  for (double y : outputs) {
    if (!std::isfinite(y)) throw ValidationError("GP training output is not finite");
  }
  inputs_ = std::move(inputs);
  outputs_ = std::move(outputs);
  x_ = to_matrix(inputs_, hyper_.kernel.dim());
  mean_ = fixed_mean ? *fixed_mean
                     : std::accumulate(outputs_.begin(), outputs_.end(), 0.0) / static_cast<double>(outputs_.size());
  Eigen::VectorXd y(static_cast<Eigen::Index>(outputs_.size()));
  for (std::size_t i = 0; i < outputs_.size(); ++i) y(static_cast<Eigen::Index>(i)) = outputs_[i] - mean_;
  Factored f = factor(kernel_matrix(hyper_.kernel, x_, x_), hyper_.noise_variance, y);
  llt_ = std::move(f.llt);
  alpha_ = std::move(f.alpha);
  jitter_ = f.jitter;
  lml_ = f.lml;
}

GPModel GPModel::fit(std::vector<Point> inputs, std::vector<double> outputs, const GPFitOptions& options) {
  merge_duplicates(inputs, outputs);
  if (inputs.size() < 2) {
    throw InsufficientDataError("GP fit needs at least 2 distinct points, got " + std::to_string(inputs.size()));
  }
  if (options.restarts < 1 || options.evaluations < 1) throw ValidationError("GP fit needs a positive budget");
  const std::size_t dim = inputs[0].size();
  const Eigen::MatrixXd x = to_matrix(inputs, dim);
  const std::size_t n = outputs.size();
  const double mean = options.fixed_mean
                          ? *options.fixed_mean
                          : std::accumulate(outputs.begin(), outputs.end(), 0.0) / static_cast<double>(n);

  // Work on outputs scaled to unit variance so the bounds are scale free.
  double var = 0.0;
  for (double y : outputs) var += (y - mean) * (y - mean);
  var /= static_cast<double>(n);
  const double scale2 = var > 1e-24 ? var : 1.0;
  const double scale = std::sqrt(scale2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) y(static_cast<Eigen::Index>(i)) = (outputs[i] - mean) / scale;

  const std::size_t np = dim + 3;
  const double lo = std::log(options.lower), hi = std::log(options.upper);
  const double nlo = std::log(options.noise_lower), nhi = std::log(options.noise_upper);
  auto clip = [&](std::vector<double> th) {
    for (std::size_t i = 0; i + 1 < np; ++i) th[i] = std::clamp(th[i], lo, hi);
    th[np - 1] = std::clamp(th[np - 1], nlo, nhi);
    return th;
  };
  auto unpack = [&](const std::vector<double>& th) {
    GPHyperparameters h;
    h.kernel.signal_variance = std::exp(th[0]);
    h.kernel.sigma.resize(dim + 1);
    for (std::size_t d = 0; d <= dim; ++d) h.kernel.sigma[d] = std::exp(th[d + 1]);
    h.noise_variance = std::exp(th[np - 1]);
    return h;
  };
  auto objective = [&](const std::vector<double>& th) {
    const GPHyperparameters h = unpack(clip(th));
    try {
      return -factor(kernel_matrix(h.kernel, x, x), h.noise_variance, y).lml;
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  std::vector<double> start(np, 0.0);
  start[np - 1] = std::log(1e-4);
  if (options.warm_start) {
    const GPHyperparameters& w = *options.warm_start;
    if (w.kernel.sigma.size() != dim + 1) throw ValidationError("warm start has the wrong dimension");
    start[0] = std::log(w.kernel.signal_variance / scale2);
    for (std::size_t d = 0; d <= dim; ++d) start[d + 1] = std::log(w.kernel.sigma[d]);
    start[np - 1] = std::log(std::max(w.noise_variance / scale2, options.noise_lower));
    start = clip(start);
  }

  Rng rng(options.seed);
  Simplex best;
  for (int r = 0; r < options.restarts; ++r) {
    std::vector<double> th = start;
    if (r > 0) {
      th[0] = uniform(rng, std::log(0.1), std::log(10.0));
      for (std::size_t d = 1; d + 1 < np; ++d) th[d] = uniform(rng, std::log(1e-2), std::log(1e2));
      th[np - 1] = uniform(rng, std::log(1e-6), std::log(1e-2));
      th = clip(th);
    }
    Simplex s = nelder_mead(objective, th, 1.0, options.evaluations);
    if (s.value < best.value) best = std::move(s);
  }
  if (!std::isfinite(best.value)) throw NumericalError("no hyperparameter setting gave a valid factorization");

  GPHyperparameters h = unpack(clip(best.best));
  h.kernel.signal_variance *= scale2;
  h.noise_variance *= scale2;
  return GPModel(std::move(inputs), std::move(outputs), std::move(h), mean);
}

Posterior GPModel::predict(std::span<const double> x) const {
  return predict(std::vector<Point>{Point(x.begin(), x.end())}).front();
}

std::vector<Posterior> GPModel::predict(const std::vector<Point>& xs) const {
  std::vector<Posterior> out(xs.size());
  if (xs.empty()) return out;
  const Eigen::MatrixXd q = to_matrix(xs, dim());
  const KernelParts p = kernel_parts(hyper_.kernel, q, x_);
  const double c = hyper_.kernel.signal_variance * kTwoOverPi;
  const Eigen::MatrixXd ks = c * p.z.array().asin().matrix();  // M x N
  const Eigen::VectorXd mean = ks * alpha_;
  const Eigen::MatrixXd v = llt_.matrixL().solve(ks.transpose());  // N x M
  const Eigen::VectorXd explained = v.colwise().squaredNorm().transpose();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double a = p.self_a(ii);
    const double prior = c * std::asin(std::min(1.0, (a - 1.0) / a));
    out[i].mean = mean_ + mean(ii);
    out[i].variance = std::max(0.0, prior - explained(ii));
  }
  return out;
}

std::vector<double> GPModel::log_marginal_likelihood_gradient() const {
  const Eigen::Index n = x_.rows();
  const Eigen::Index dim = x_.cols();
  const KernelParts p = kernel_parts(hyper_.kernel, x_, x_);
  const double c = hyper_.kernel.signal_variance * kTwoOverPi;
  const Eigen::MatrixXd kf = c * p.z.array().asin().matrix();
  // W = alpha alpha' - (K + s2 I)^-1
  const Eigen::MatrixXd inv = llt_.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd w = alpha_ * alpha_.transpose() - inv;
  auto half_trace = [&](const Eigen::MatrixXd& dk) { return 0.5 * (w.cwiseProduct(dk)).sum(); };

  std::vector<double> g;
  g.push_back(half_trace(kf));

  // dk/dz = c / sqrt(1 - z^2); dz/dS_d = 2 a_d b_d / sqrt(bc) - z (a_d^2 / b + b_d^2 / c)
  const Eigen::MatrixXd dkdz = c * (1.0 - p.z.array().square()).max(1e-300).rsqrt().matrix();
  const Eigen::ArrayXd ra = p.self_a.array().rsqrt();
  Eigen::MatrixXd inv_sqrt = ra.matrix() * ra.matrix().transpose();
  for (Eigen::Index d = 0; d <= dim; ++d) {
    Eigen::VectorXd col = d == 0 ? Eigen::VectorXd::Ones(n) : Eigen::VectorXd(x_.col(d - 1));
    Eigen::MatrixXd dz = 2.0 * (col * col.transpose()).cwiseProduct(inv_sqrt);
    const Eigen::ArrayXd sq_over = col.array().square() / p.self_a.array();
    Eigen::MatrixXd both = sq_over.matrix().replicate(1, n) + sq_over.matrix().transpose().replicate(n, 1);
    dz -= p.z.cwiseProduct(both);
    const double s = hyper_.kernel.sigma[static_cast<std::size_t>(d)];
    g.push_back(half_trace(s * dkdz.cwiseProduct(dz)));
  }
  g.push_back(half_trace(hyper_.noise_variance * Eigen::MatrixXd::Identity(n, n)));
  return g;
}

double prob_in_interval(const Posterior& p, const Interval& interval) {
  if (interval.empty()) return 0.0;
  if (!(p.variance > 0.0)) return interval.contains(p.mean) ? 1.0 : 0.0;
  const double sd = std::sqrt(p.variance);
  const double a = (interval.lo - p.mean) / sd;
  const double b = (interval.hi - p.mean) / sd;
  constexpr double r2 = 0.70710678118654752440;
  // Work in whichever tail keeps the subtraction accurate.
  const double prob = a > 0.0 ? 0.5 * (std::erfc(a * r2) - std::erfc(b * r2))
                              : 0.5 * (std::erfc(-b * r2) - std::erfc(-a * r2));
  return std::clamp(prob, 0.0, 1.0);
}

} // namespace stlgp
