#pragma once

#include "stlconf/lti/model.hpp"
#include "stlconf/lti/simulate.hpp"
#include "stlconf/parallel.hpp"
#include "stlconf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

namespace stlconf::bayes {

/// Block lower-triangular map from stacked process noise w(0..N-1) to stacked
/// outputs y(0..N-1): block (r, c) = C(θ) A^{r-c-1} G for r > c, zero
/// otherwise. Shape (p·N) × (q·N); the last noise block never reaches an output.
inline Matrix build_M(const lti::ParametricLti& model, const Vector& theta, std::size_t n_exp) {
  if (n_exp == 0) throw DomainError("build_M: N_exp must be >= 1");
  const Matrix c = model.C(theta);
  const Eigen::Index p = model.p(), q = model.q();
  const auto N = static_cast<Eigen::Index>(n_exp);
  Matrix M = Matrix::Zero(p * N, q * N);
  Matrix ak_g = model.G();  // A^k G
  for (Eigen::Index k = 0; k + 1 < N; ++k) {
    const Matrix block = c * ak_g;
    for (Eigen::Index col = 0; col + k + 1 < N; ++col) M.block((col + k + 1) * p, col * q, p, q) = block;
    ak_g = model.A() * ak_g;
  }
  return M;
}

/// Stacked output distribution N(mean, cov) of y(0..N-1).
struct GaussianJoint {
  Vector mean;
  Matrix cov;
};

inline Matrix block_diagonal(const Matrix& block, std::size_t copies) {
  const auto n = static_cast<Eigen::Index>(copies);
  Matrix out = Matrix::Zero(block.rows() * n, block.cols() * n);
  for (Eigen::Index i = 0; i < n; ++i) out.block(i * block.rows(), i * block.cols(), block.rows(), block.cols()) = block;
  return out;
}

/// ȳ(t) = C Aᵗ x0 + Σ_{i<t} C Aⁱ B u(t-i-1);  Σ = M Σ_W Mᵀ + Σ_E.
inline GaussianJoint joint_distribution(const lti::ParametricLti& model, const Vector& theta,
                                        const Vector& x0, const std::vector<Vector>& inputs) {
  require_dim(x0.size(), model.n(), "x0");
  const std::size_t N = inputs.size();
  if (N == 0) throw DomainError("joint_distribution: need at least one input");
  const Matrix c = model.C(theta);
  const Eigen::Index p = model.p();

  GaussianJoint joint;
  joint.mean.resize(p * static_cast<Eigen::Index>(N));
  Vector x = x0;
  for (std::size_t t = 0; t < N; ++t) {
    require_dim(inputs[t].size(), model.m(), "input");
    joint.mean.segment(static_cast<Eigen::Index>(t) * p, p) = c * x;
    x = model.A() * x + model.B() * inputs[t];
  }
  const Matrix M = build_M(model, theta, N);
  joint.cov = M * block_diagonal(model.sigma_w(), N) * M.transpose() + block_diagonal(model.sigma_e(), N);
  joint.cov = 0.5 * (joint.cov + joint.cov.transpose());
  return joint;
}

/// log N(y; mean, cov) through a Cholesky factorization.
inline double gaussian_log_density(const Vector& y, const Vector& mean, const Matrix& cov) {
  require_dim(y.size(), mean.size(), "observation");
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericError("covariance is not positive definite");
  const Vector z = llt.matrixL().solve(y - mean);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * (z.squaredNorm() + log_det + static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi));
}

inline Vector stack(const std::vector<Vector>& xs) {
  Eigen::Index total = 0;
  for (const auto& x : xs) total += x.size();
  Vector out(total);
  Eigen::Index at = 0;
  for (const auto& x : xs) {
    out.segment(at, x.size()) = x;
    at += x.size();
  }
  return out;
}

inline std::string theta_text(const Vector& theta) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < theta.size(); ++i) s += (i ? ", " : "") + std::to_string(theta(i));
  return s + "]";
}

inline double log_likelihood(const Vector& theta, const lti::DataSet& data, const lti::ParametricLti& model) {
  if (data.size() == 0) return 0.0;
  const GaussianJoint joint = joint_distribution(model, theta, data.x0, data.inputs);
  try {
    return gaussian_log_density(stack(data.outputs), joint.mean, joint.cov);
  } catch (const NumericError&) {
    throw NumericError("likelihood covariance is not positive definite at theta = " + theta_text(theta));
  }
}

/// Likelihood specialised to one data set. The stacked state mean and
/// covariance do not depend on θ, so only the output map is applied per call:
///   ȳ = (I ⊗ C(θ)) X̄,   Σ_ỹ = (I ⊗ C(θ)) Σ_X (I ⊗ C(θ))ᵀ + Σ_E.
/// Agrees with log_likelihood to round-off.
class LikelihoodEvaluator {
 public:
  LikelihoodEvaluator(const lti::ParametricLti& model, const lti::DataSet& data)
      : model_(model), N_(data.size()) {
    if (N_ == 0) return;
    require_dim(data.x0.size(), model.n(), "x0");
    const Eigen::Index n = model.n();
    const auto N = static_cast<Eigen::Index>(N_);
    y_ = stack(data.outputs);
    require_dim(y_.size(), model.p() * N, "stacked outputs");

    state_mean_.resize(n * N);
    Vector x = data.x0;
    for (Eigen::Index t = 0; t < N; ++t) {
      state_mean_.segment(t * n, n) = x;
      x = model.A() * x + model.B() * data.inputs[static_cast<std::size_t>(t)];
    }
    // Cov(x(r), x(c)) = A^{r-c} S_c for r ≥ c, S_t = state covariance at t.
    state_cov_ = Matrix::Zero(n * N, n * N);
    const Matrix gwg = model.G() * model.sigma_w() * model.G().transpose();
    Matrix S = Matrix::Zero(n, n);
    for (Eigen::Index c = 0; c < N; ++c) {
      Matrix cross = S;
      for (Eigen::Index r = c; r < N; ++r) {
        state_cov_.block(r * n, c * n, n, n) = cross;
        if (r != c) state_cov_.block(c * n, r * n, n, n) = cross.transpose();
        cross = model.A() * cross;
      }
      S = model.A() * S * model.A().transpose() + gwg;
    }
    sigma_E_ = block_diagonal(model.sigma_e(), N_);
  }

  std::size_t size() const { return N_; }

  GaussianJoint joint(const Vector& theta) const {
    const Matrix c = model_.C(theta);
    const Eigen::Index n = model_.n(), p = model_.p();
    const auto N = static_cast<Eigen::Index>(N_);
    GaussianJoint j;
    j.mean.resize(p * N);
    j.cov.resize(p * N, p * N);
    for (Eigen::Index r = 0; r < N; ++r) {
      j.mean.segment(r * p, p) = c * state_mean_.segment(r * n, n);
      for (Eigen::Index col = 0; col <= r; ++col) {
        const Matrix block = c * state_cov_.block(r * n, col * n, n, n) * c.transpose();
        j.cov.block(r * p, col * p, p, p) = block;
        j.cov.block(col * p, r * p, p, p) = block.transpose();
      }
    }
    j.cov += sigma_E_;
    j.cov = 0.5 * (j.cov + j.cov.transpose());
    return j;
  }

  double operator()(const Vector& theta) const {
    if (N_ == 0) return 0.0;
    const GaussianJoint j = joint(theta);
    try {
      return gaussian_log_density(y_, j.mean, j.cov);
    } catch (const NumericError&) {
      throw NumericError("likelihood covariance is not positive definite at theta = " + theta_text(theta));
    }
  }

 private:
  const lti::ParametricLti& model_;
  std::size_t N_;
  Vector y_, state_mean_;
  Matrix state_cov_, sigma_E_;
};

enum class PriorKind { uniform_box, tabulated };

/// Prior p(θ) on a box support. A tabulated prior is piecewise constant on a
/// regular grid of shape[0] × shape[1] × … cells (first coordinate fastest);
/// values are relative weights and are normalized here.
class PriorSpec {
 public:
  static PriorSpec uniform(Box support) {
    PriorSpec p;
    p.kind_ = PriorKind::uniform_box;
    p.support_ = std::move(support);
    if (p.support_.empty || !(p.support_.volume() > 0.0)) throw DomainError("prior support must have positive volume");
    return p;
  }

  static PriorSpec tabulated(Box support, std::vector<std::size_t> shape, std::vector<double> values) {
    PriorSpec p = uniform(std::move(support));
    p.kind_ = PriorKind::tabulated;
    if (static_cast<Eigen::Index>(shape.size()) != p.support_.dim()) {
      throw DimensionError("tabulated prior: shape rank must equal the parameter dimension");
    }
    std::size_t total = 1;
    for (auto s : shape) {
      if (s == 0) throw DomainError("tabulated prior: empty axis");
      total *= s;
    }
    if (values.size() != total) throw DimensionError("tabulated prior: value count does not match shape");
    double sum = 0.0;
    for (double v : values) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("tabulated prior: values must be finite and >= 0");
      sum += v;
    }
    if (!(sum > 0.0)) throw DomainError("tabulated prior: all values are zero");
    const double cell_volume = p.support_.volume() / static_cast<double>(total);
    for (double& v : values) v /= sum * cell_volume;
    p.shape_ = std::move(shape);
    p.values_ = std::move(values);
    return p;
  }

  PriorKind kind() const { return kind_; }
  const Box& support() const { return support_; }
  const std::vector<std::size_t>& shape() const { return shape_; }
  const std::vector<double>& values() const { return values_; }

  double density(const Vector& theta) const {
    if (!support_.contains(theta)) return 0.0;
    if (kind_ == PriorKind::uniform_box) return 1.0 / support_.volume();
    std::size_t index = 0, stride = 1;
    for (Eigen::Index i = 0; i < support_.dim(); ++i) {
      const std::size_t n = shape_[static_cast<std::size_t>(i)];
      const double u = (theta(i) - support_.lower(i)) / (support_.upper(i) - support_.lower(i));
      const auto k = std::min(n - 1, static_cast<std::size_t>(u * static_cast<double>(n)));
      index += k * stride;
      stride *= n;
    }
    return values_[index];
  }

  double log_density(const Vector& theta) const {
    const double p = density(theta);
    return p > 0.0 ? std::log(p) : -kInfinity;
  }

 private:
  PriorKind kind_ = PriorKind::uniform_box;
  Box support_;
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

/// p(θ | D) = exp(log p(θ) + log p(D | θ) - log Z).
class PosteriorDensity {
 public:
  PosteriorDensity(const lti::ParametricLti& model, lti::DataSet data, PriorSpec prior)
      : model_(model), data_(std::move(data)), prior_(std::move(prior)), likelihood_(model_, data_) {}

  PosteriorDensity(const PosteriorDensity&) = delete;
  PosteriorDensity& operator=(const PosteriorDensity&) = delete;

  const PriorSpec& prior() const { return prior_; }
  const Box& support() const { return prior_.support(); }
  const lti::DataSet& data() const { return data_; }
  const LikelihoodEvaluator& likelihood() const { return likelihood_; }

  double log_unnormalized(const Vector& theta) const {
    const double lp = prior_.log_density(theta);
    if (lp == -kInfinity) return lp;
    return lp + likelihood_(theta);
  }

  double log_density(const Vector& theta) const { return log_unnormalized(theta) - log_Z_; }
  double density(const Vector& theta) const { return std::exp(log_density(theta)); }

  double log_normalizer() const { return log_Z_; }
  double normalizer() const { return std::exp(log_Z_); }
  /// Standard error of Z relative to Z.
  double normalizer_relative_error() const { return rel_se_; }
  std::size_t normalizer_samples() const { return samples_; }

  void set_normalizer(double log_Z, double relative_error, std::size_t samples) {
    log_Z_ = log_Z;
    rel_se_ = relative_error;
    samples_ = samples;
  }

 private:
  const lti::ParametricLti& model_;
  lti::DataSet data_;
  PriorSpec prior_;
  LikelihoodEvaluator likelihood_;
  double log_Z_ = 0.0;
  double rel_se_ = 0.0;
  std::size_t samples_ = 0;
};

namespace detail {

struct WeightedSample {
  Vector theta;
  double log_w = 0.0;
};

/// Gaussian proposal fitted to weighted samples, widened by `inflate` and
/// floored at `floor_sd` per axis so it never collapses onto one point.
struct Proposal {
  Vector mean;
  Matrix factor;
  Eigen::LLT<Matrix> llt;
  double log_norm = 0.0;

  Proposal(const std::vector<WeightedSample>& samples, const Vector& floor_sd, double inflate) {
    const Eigen::Index d = floor_sd.size();
    double mx = -kInfinity;
    for (const auto& s : samples) mx = std::max(mx, s.log_w);
    mean = Vector::Zero(d);
    Matrix cov = Matrix::Zero(d, d);
    double total = 0.0;
    for (const auto& s : samples) {
      const double w = std::exp(s.log_w - mx);
      total += w;
      mean += w * s.theta;
    }
    mean /= total;
    for (const auto& s : samples) {
      const Vector z = s.theta - mean;
      cov += std::exp(s.log_w - mx) / total * z * z.transpose();
    }
    cov *= inflate;
    for (Eigen::Index i = 0; i < d; ++i) cov(i, i) = std::max(cov(i, i), floor_sd(i) * floor_sd(i));
    llt.compute(cov);
    if (llt.info() != Eigen::Success) {
      cov = floor_sd.array().square().matrix().asDiagonal();
      llt.compute(cov);
    }
    factor = llt.matrixL();
    log_norm = -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) -
               factor.diagonal().array().log().sum();
  }

  double log_density(const Vector& theta) const {
    const Vector z = llt.matrixL().solve(theta - mean);
    return log_norm - 0.5 * z.squaredNorm();
  }
};

constexpr double kUniformShare = 0.1;

inline double log_add(double a, double b) {
  const double m = std::max(a, b);
  if (m == -kInfinity) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace detail

enum class NormalizerMethod { uniform, adaptive };

inline const char* to_string(NormalizerMethod m) { return m == NormalizerMethod::uniform ? "uniform" : "adaptive"; }

/// Build the posterior and estimate Z = ∫ p(D|θ) p(θ) dθ in log space.
///
/// uniform: plain Monte Carlo over the prior support, weight p(D|θ) p(θ) V.
/// adaptive: a uniform quarter seeds a Gaussian proposal, a second quarter
/// refits it, and the last half estimates Z by importance sampling from the
/// defensive mixture 0.1·U(support) + 0.9·N(m, S). Much lower variance once
/// the likelihood is peaked.
///
/// Samples are drawn in fixed chunks from per-chunk substreams so the
/// estimate is the same for any thread count. With no data the posterior is
/// the prior and Z = 1.
inline std::unique_ptr<PosteriorDensity> posterior(const lti::DataSet& data, const lti::ParametricLti& model,
                                                   const PriorSpec& prior, std::size_t mc_samples,
                                                   const RngStream& rng, std::size_t threads = 0,
                                                   NormalizerMethod method = NormalizerMethod::uniform) {
  auto post = std::make_unique<PosteriorDensity>(model, data, prior);
  if (data.size() == 0) {
    post->set_normalizer(0.0, 0.0, 0);
    return post;
  }
  if (mc_samples < 1000) throw DomainError("posterior: mc_samples must be >= 1000");

  constexpr std::size_t chunk = 1024;
  const Box& support = prior.support();
  const double log_volume = std::log(support.volume());
  const Eigen::Index d = support.dim();

  // Draw n samples; with a proposal, from the mixture, otherwise uniformly.
  auto pass = [&](std::size_t n, const char* name, const detail::Proposal* prop) {
    std::vector<detail::WeightedSample> out(n);
    const std::size_t chunks = (n + chunk - 1) / chunk;
    parallel_for(chunks, threads, [&](std::size_t c) {
      RngStream r = rng.substream(name, c);
      const std::size_t end = std::min(n, (c + 1) * chunk);
      for (std::size_t i = c * chunk; i < end; ++i) {
        Vector theta;
        double log_q = -log_volume;
        if (prop == nullptr || r.uniform() < detail::kUniformShare) {
          theta = r.uniform_in(support);
        } else {
          theta = prop->mean + r.normal_with_factor(prop->factor);
        }
        if (prop != nullptr) {
          log_q = detail::log_add(std::log(detail::kUniformShare) - log_volume,
                                  std::log(1.0 - detail::kUniformShare) + prop->log_density(theta));
        }
        const double lu = support.contains(theta) ? post->log_unnormalized(theta) : -kInfinity;
        out[i] = {std::move(theta), lu - log_q};
      }
    });
    return out;
  };
  auto underflow = [](const std::vector<detail::WeightedSample>& s) {
    return std::none_of(s.begin(), s.end(), [](const auto& x) { return std::isfinite(x.log_w); });
  };

  const bool adaptive = method == NormalizerMethod::adaptive;
  const std::size_t n_seed = adaptive ? mc_samples / 4 : mc_samples;
  const auto seed = pass(n_seed, "normalizer", nullptr);
  if (underflow(seed)) throw NumericError("posterior normalizer underflowed: every likelihood sample is zero");
  std::vector<detail::WeightedSample> last;
  if (adaptive) {
    const std::size_t n_adapt = mc_samples / 4;
    const Vector floor_sd =
        support.widths() / std::pow(static_cast<double>(n_seed), 1.0 / static_cast<double>(d)) / 2.0;
    const detail::Proposal first(seed, floor_sd, 4.0);
    const auto adapt = pass(n_adapt, "normalizer_adapt", &first);
    const detail::Proposal second(underflow(adapt) ? seed : adapt, floor_sd / 8.0, 2.0);
    last = pass(mc_samples - n_seed - n_adapt, "normalizer_final", &second);
    if (underflow(last)) throw NumericError("posterior normalizer underflowed: every likelihood sample is zero");
  } else {
    last = seed;
  }

  double mx = -kInfinity;
  for (const auto& s : last) mx = std::max(mx, s.log_w);
  double s1 = 0.0, s2 = 0.0;
  for (const auto& s : last) {
    const double w = std::exp(s.log_w - mx);
    s1 += w;
    s2 += w * w;
  }
  const auto n = static_cast<double>(last.size());
  const double mean = s1 / n;
  const double var = std::max(0.0, s2 / n - mean * mean) * n / (n - 1.0);
  post->set_normalizer(mx + std::log(mean), std::sqrt(var / n) / mean, mc_samples);
  return post;
}

}  // namespace stlconf::bayes
