#include "case_study.hpp"
#include "stlconf/bayes/inference.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <numeric>

using namespace stlconf;
using namespace stlconf::bayes;

namespace {

Vector theta(double a, double b) {
  Vector t(2);
  t << a, b;
  return t;
}

std::vector<Vector> random_inputs(RngStream& rng, std::size_t n, Eigen::Index m, double bound) {
  std::vector<Vector> u;
  for (std::size_t i = 0; i < n; ++i) u.push_back(rng.uniform_in(Box(Vector::Constant(m, -bound), Vector::Constant(m, bound))));
  return u;
}

lti::DataSet case_data(std::size_t n, std::uint64_t seed, const Vector& th = theta(-0.5, 1.0)) {
  return lti::collect_data(fixtures::case_model(), th, lti::UniformInput{-2.0, 2.0}, n, Vector::Zero(2),
                           RngStream(seed));
}

}  // namespace

TEST(BuildM, SingleStepIsZero) {
  const auto model = fixtures::case_model();
  const Matrix M = build_M(model, theta(0.3, -0.2), 1);
  EXPECT_EQ(M.rows(), model.p());
  EXPECT_EQ(M.cols(), model.q());
  EXPECT_EQ(M.norm(), 0.0);
  EXPECT_THROW(build_M(model, theta(0, 0), 0), DomainError);
}

TEST(BuildM, IdentityDynamicsRepeatsCG) {
  Matrix G(2, 1);
  G << 1.0, 2.0;
  Matrix C1(1, 2);
  C1 << 1.0, 0.0;
  Matrix C2(1, 2);
  C2 << 0.0, 1.0;
  const lti::ParametricLti model(Matrix::Identity(2, 2), Matrix::Ones(2, 1), G, Matrix::Zero(1, 2), {C1, C2},
                                 Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                                 lti::InputBox(Vector::Constant(1, -1), Vector::Constant(1, 1)));
  const Vector th = theta(0.5, -1.5);
  const double cg = (model.C(th) * G)(0, 0);
  const Matrix M = build_M(model, th, 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) EXPECT_DOUBLE_EQ(M(r, c), r > c ? cg : 0.0) << r << "," << c;
  }
}

TEST(JointDistribution, MeanMatchesConvolution) {
  const auto model = fixtures::case_model();
  RngStream rng(3);
  const auto u = random_inputs(rng, 8, model.m(), 1.0);
  Vector x0(2);
  x0 << 0.4, -0.7;
  const Vector th = theta(1.1, 0.3);
  const auto joint = joint_distribution(model, th, x0, u);
  const auto powers = matrix_powers(model.A(), 8);
  const Matrix C = model.C(th);
  for (std::size_t t = 0; t < u.size(); ++t) {
    Vector y = C * powers[t] * x0;
    for (std::size_t i = 0; i < t; ++i) y += C * powers[i] * model.B() * u[t - i - 1];
    EXPECT_NEAR(joint.mean(static_cast<Eigen::Index>(t)), y(0), 1e-12);
  }
}

TEST(JointDistribution, CovarianceMatchesSimulation) {
  const auto model = fixtures::case_model();
  RngStream rng(4);
  const std::size_t N = 10;
  const auto u = random_inputs(rng, N, model.m(), 0.2);
  const Vector th = theta(-0.5, 1.0);
  const auto joint = joint_distribution(model, th, Vector::Zero(2), u);
  const int runs = 100000;
  Vector sum = Vector::Zero(N);
  Matrix sq = Matrix::Zero(N, N);
  for (int k = 0; k < runs; ++k) {
    const Vector y = stack(lti::simulate(model, th, Vector::Zero(2), u, rng).noisy_outputs);
    sum += y;
    sq += y * y.transpose();
  }
  const Vector mean = sum / runs;
  const Matrix cov = (sq - runs * mean * mean.transpose()) / (runs - 1.0);
  EXPECT_LT((cov - joint.cov).norm() / joint.cov.norm(), 0.1);
  EXPECT_LT((mean - joint.mean).cwiseAbs().maxCoeff(), 0.05);
}

TEST(JointDistribution, EigenvaluesBoundedByMeasurementNoise) {
  const auto model = fixtures::case_model();
  RngStream rng(5);
  const double floor = Eigen::SelfAdjointEigenSolver<Matrix>(model.sigma_e()).eigenvalues().minCoeff();
  for (int trial = 0; trial < 50; ++trial) {
    const Vector th = rng.uniform_in(Box(Vector::Constant(2, -10), Vector::Constant(2, 10)));
    const auto joint = joint_distribution(model, th, Vector::Zero(2), random_inputs(rng, 12, 1, 2.0));
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(joint.cov).eigenvalues().minCoeff(), floor - 1e-9);
  }
}

TEST(LogLikelihood, ScalarExample) {
  const auto model = fixtures::scalar_model(0.5, 1.0, 1.0, 1.0, 1.0);
  lti::DataSet data;
  data.x0 = Vector::Zero(1);
  data.inputs = {Vector::Zero(1)};
  data.outputs = {Vector::Constant(1, 2.0)};
  const double expected = -0.5 * (4.0 + std::log(2.0 * std::numbers::pi));
  EXPECT_NEAR(log_likelihood(Vector::Constant(1, 0.7), data, model), expected, 1e-14);
  EXPECT_NEAR(LikelihoodEvaluator(model, data)(Vector::Constant(1, 0.7)), expected, 1e-14);
}

TEST(LogLikelihood, EvaluatorMatchesDirectForm) {
  const auto model = fixtures::case_model();
  const auto data = case_data(30, 6);
  const LikelihoodEvaluator eval(model, data);
  RngStream rng(7);
  for (int i = 0; i < 20; ++i) {
    const Vector th = rng.uniform_in(Box(Vector::Constant(2, -10), Vector::Constant(2, 10)));
    const double direct = log_likelihood(th, data, model);
    EXPECT_NEAR(eval(th), direct, 1e-9 * std::max(1.0, std::abs(direct)));
  }
}

TEST(LogLikelihoodProperty, PermutationInvariant) {
  RngStream rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 8);
    Matrix L = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) L(i, j) = rng.uniform(-1, 1);
      L(i, i) = 0.5 + std::abs(L(i, i));
    }
    const Matrix cov = L * L.transpose();
    Vector y(n), mean(n);
    for (int i = 0; i < n; ++i) {
      y(i) = rng.normal();
      mean(i) = rng.normal();
    }
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(rng.uniform() * (i + 1))]);
    Eigen::PermutationMatrix<Eigen::Dynamic> P(n);
    for (int i = 0; i < n; ++i) P.indices()(i) = idx[static_cast<std::size_t>(i)];
    const Matrix pcov = P * cov * P.transpose();
    EXPECT_NEAR(gaussian_log_density(P * y, P * mean, pcov), gaussian_log_density(y, mean, cov), 1e-10);
  }
}

TEST(LogLikelihoodProperty, TrueParameterPreferred) {
  const auto model = fixtures::case_model();
  const Vector truth = theta(-0.5, 1.0), far = theta(2.0, -1.0);
  int wins = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto data = case_data(20, 100 + s);
    wins += log_likelihood(truth, data, model) > log_likelihood(far, data, model);
  }
  EXPECT_GE(wins, 95);
}

TEST(LogLikelihood, RejectsIndefiniteCovariance) {
  const lti::ParametricLti model(Matrix::Constant(1, 1, 0.5), Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                                 Matrix::Zero(1, 1), {Matrix::Ones(1, 1)}, Matrix::Zero(1, 1), Matrix::Zero(1, 1),
                                 lti::InputBox(Vector::Constant(1, -1), Vector::Constant(1, 1)));
  lti::DataSet data;
  data.x0 = Vector::Zero(1);
  data.inputs = {Vector::Zero(1)};
  data.outputs = {Vector::Zero(1)};
  EXPECT_THROW(log_likelihood(Vector::Constant(1, 1.0), data, model), NumericError);
}

TEST(Prior, TabulatedIsNormalized) {
  const Box support(theta(-1, 0), theta(1, 3));
  const auto prior = PriorSpec::tabulated(support, {2, 3}, {1, 2, 3, 4, 5, 6});
  double total = 0.0;
  for (double v : prior.values()) total += v * support.volume() / 6.0;
  EXPECT_NEAR(total, 1.0, 1e-14);
  EXPECT_NEAR(prior.density(theta(0.5, 2.5)), 6.0 / 21.0, 1e-14);
  EXPECT_NEAR(prior.density(theta(-0.5, 0.5)), 1.0 / 21.0, 1e-14);
  EXPECT_EQ(prior.density(theta(1.5, 0.5)), 0.0);
  EXPECT_THROW(PriorSpec::tabulated(support, {2, 2}, {1, 2, 3}), DimensionError);
  EXPECT_THROW(PriorSpec::tabulated(support, {2}, {1, 2}), DimensionError);
  EXPECT_THROW(PriorSpec::tabulated(support, {1, 2}, {0, 0}), DomainError);
  EXPECT_THROW(PriorSpec::uniform(Box(theta(0, 0), theta(0, 1))), DomainError);
}

TEST(Posterior, EmptyDataIsPrior) {
  const auto model = fixtures::case_model();
  lti::DataSet data;
  data.x0 = Vector::Zero(2);
  const auto prior = PriorSpec::uniform(Box(Vector::Constant(2, -10), Vector::Constant(2, 10)));
  const auto post = posterior(data, model, prior, 1000, RngStream(1));
  EXPECT_EQ(post->log_normalizer(), 0.0);
  EXPECT_DOUBLE_EQ(post->density(theta(1, 2)), 1.0 / 400.0);
  EXPECT_EQ(post->density(theta(11, 2)), 0.0);
}

TEST(Posterior, IntegratesToOne) {
  const auto model = fixtures::scalar_model(0.6, 1.0, 1.0, 0.5, 0.5);
  const auto data = lti::collect_data(model, Vector::Constant(1, 0.8), lti::UniformInput{-1, 1}, 8,
                                      Vector::Zero(1), RngStream(2));
  const auto prior = PriorSpec::uniform(Box(Vector::Constant(1, -3), Vector::Constant(1, 3)));
  for (auto method : {NormalizerMethod::uniform, NormalizerMethod::adaptive}) {
    const auto post = posterior(data, model, prior, 20000, RngStream(3), 0, method);
    const int n = 20000;
    const double h = 6.0 / n;
    double integral = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      integral += w * h * post->density(Vector::Constant(1, -3.0 + i * h));
    }
    EXPECT_NEAR(integral, 1.0, 4.0 * post->normalizer_relative_error() + 1e-3) << to_string(method);
    EXPECT_LT(post->normalizer_relative_error(), 0.02);
  }
}

TEST(Posterior, AdaptiveAgreesWithUniform) {
  const auto model = fixtures::case_model();
  const auto data = case_data(10, 9);
  const auto prior = PriorSpec::uniform(Box(Vector::Constant(2, -10), Vector::Constant(2, 10)));
  const auto u = posterior(data, model, prior, 40000, RngStream(10), 0, NormalizerMethod::uniform);
  const auto a = posterior(data, model, prior, 40000, RngStream(10), 0, NormalizerMethod::adaptive);
  const double se = std::hypot(u->normalizer_relative_error(), a->normalizer_relative_error());
  EXPECT_NEAR(u->log_normalizer(), a->log_normalizer(), 4.0 * se);
  EXPECT_LT(a->normalizer_relative_error(), u->normalizer_relative_error());
}

TEST(Posterior, ThreadCountDoesNotChangeNormalizer) {
  const auto model = fixtures::case_model();
  const auto data = case_data(10, 11);
  const auto prior = PriorSpec::uniform(Box(Vector::Constant(2, -10), Vector::Constant(2, 10)));
  for (auto method : {NormalizerMethod::uniform, NormalizerMethod::adaptive}) {
    const auto one = posterior(data, model, prior, 5000, RngStream(12), 1, method);
    const auto four = posterior(data, model, prior, 5000, RngStream(12), 4, method);
    EXPECT_EQ(one->log_normalizer(), four->log_normalizer());
  }
}

TEST(Posterior, UnderflowIsReported) {
  const auto model = fixtures::scalar_model(0.5, 1.0, 1.0, 0.5, 0.5);
  const auto data = lti::collect_data(model, Vector::Constant(1, 0.0), lti::UniformInput{-1, 1}, 5,
                                      Vector::Zero(1), RngStream(13));
  std::vector<double> values(1000000, 0.0);
  values[123456] = 1.0;
  const auto prior = PriorSpec::tabulated(Box(Vector::Constant(1, 0), Vector::Constant(1, 1)), {values.size()}, values);
  EXPECT_THROW(posterior(data, model, prior, 1000, RngStream(14)), NumericError);
  EXPECT_THROW(posterior(data, model, prior, 999, RngStream(14)), DomainError);
}
