#pragma once

#include "stlconf/decomp/chance.hpp"
#include "stlconf/decomp/quantile.hpp"
#include "stlconf/lti/model.hpp"
#include "stlconf/stl/formula.hpp"

#include <numbers>

namespace stlconf::decomp {

/// How the Gaussian chance constraint on a predicate becomes an algebraic margin.
///  - standard_deviation: Γ = σ·Φ⁻¹(δ), exact for Gaussian α(x).
///  - paper_literal:      Γ = σ²·q⁻¹(δ) with q(x) = erf(x)/√π; needs δ < 1/√π.
enum class GammaForm { standard_deviation, paper_literal };

inline const char* to_string(GammaForm g) {
  return g == GammaForm::standard_deviation ? "std" : "paper_literal";
}

/// Quantile factor multiplying σ (standard_deviation) or σ² (paper_literal).
inline double gamma_factor(double delta, GammaForm form) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("gamma: delta must lie in (0, 1)");
  return form == GammaForm::standard_deviation ? gaussian_quantile(delta) : literal_q_inverse(delta);
}

/// d(factor)/dδ.
inline double gamma_factor_derivative(double delta, GammaForm form) {
  const double z = gamma_factor(delta, form);
  if (form == GammaForm::standard_deviation) return 1.0 / normal_pdf(z);
  return 1.0 / (2.0 / std::numbers::pi * std::exp(-z * z));
}

/// σ² = θ̃ᵀ S_t θ̃ with S_t the state covariance at time t.
inline double predicate_variance(const Vector& theta_tilde, const lti::ParametricLti& model,
                                 std::size_t t) {
  require_dim(theta_tilde.size(), model.n(), "theta_tilde");
  return std::max(0.0, theta_tilde.dot(model.state_covariance(t) * theta_tilde));
}

inline double gamma(const Vector& theta_tilde, double delta, const lti::ParametricLti& model,
                    std::size_t t, GammaForm form = GammaForm::standard_deviation) {
  const double factor = gamma_factor(delta, form);
  const double var = predicate_variance(theta_tilde, model, t);
  return form == GammaForm::standard_deviation ? std::sqrt(var) * factor : var * factor;
}

/// ∂Γ/∂θ̃. σ is not differentiable at σ = 0; the zero subgradient is returned there.
inline Vector gamma_gradient(const Vector& theta_tilde, double delta, const lti::ParametricLti& model,
                             std::size_t t, GammaForm form = GammaForm::standard_deviation) {
  require_dim(theta_tilde.size(), model.n(), "theta_tilde");
  const double factor = gamma_factor(delta, form);
  const Vector s_theta = model.state_covariance(t) * theta_tilde;
  if (form == GammaForm::paper_literal) return 2.0 * factor * s_theta;
  const double sigma = std::sqrt(std::max(0.0, theta_tilde.dot(s_theta)));
  if (sigma == 0.0) return Vector::Zero(model.n());
  return factor / sigma * s_theta;
}

/// ∂Γ/∂δ.
inline double gamma_delta_derivative(const Vector& theta_tilde, double delta,
                                     const lti::ParametricLti& model, std::size_t t,
                                     GammaForm form = GammaForm::standard_deviation) {
  const double var = predicate_variance(theta_tilde, model, t);
  const double scale = form == GammaForm::standard_deviation ? std::sqrt(var) : var;
  return scale * gamma_factor_derivative(delta, form);
}

/// fᵀ[u(0); …; u(t-1)] + b ≥ 0.
struct AffineInputConstraint {
  Vector f;
  double b = 0.0;
  std::size_t time = 0;
};

/// Predicate on the leaf's own terms: either the leaf already asks for
/// Pr(α ≥ 0) ≥ 1 - δ, or Pr(α ≥ 0) ≤ threshold is rewritten as Pr(-α ≥ 0) ≥ 1 - threshold.
/// Returns the oriented predicate and δ.
inline std::pair<stl::LinearPredicate, double> orient(const stl::LinearPredicate& atom,
                                                      Direction direction, double threshold) {
  if (direction == Direction::at_least) return {atom, 1.0 - threshold};
  return {atom.negated(), threshold};
}

/// Stacked-input coefficient map: row block s of the result is (A^{t-1-s} B)ᵀ,
/// so f = F θ̃ for the mean of α(x(t)).
inline Matrix input_map(const lti::ParametricLti& model, std::size_t t) {
  const Eigen::Index m = model.m();
  Matrix F(m * static_cast<Eigen::Index>(t), model.n());
  Matrix ak_b = model.B();  // A^{k} B, k = t-1-s
  for (std::size_t k = 0; k < t; ++k) {
    const auto s = static_cast<Eigen::Index>(t - 1 - k);
    F.middleRows(s * m, m) = ak_b.transpose();
    ak_b = model.A() * ak_b;
  }
  return F;
}

/// Mean of x(t) from x0 under zero input: Aᵗ x0.
inline Vector free_response(const lti::ParametricLti& model, const Vector& x0, std::size_t t) {
  Vector x = x0;
  for (std::size_t k = 0; k < t; ++k) x = model.A() * x;
  return x;
}

/// Sufficient affine condition on the stacked input for a Gaussian leaf
/// constraint on the state at leaf.time:
///   θ̃₀ + θ̃ᵀAᵗx0 + Σ_s θ̃ᵀA^{t-1-s}B u(s) + Γ(θ̃, δ) ≥ 0.
/// At the limit δ = 0 the margin is 0 for a noise-free predicate and -∞ otherwise.
inline AffineInputConstraint to_affine(const ChanceConstraint<stl::LinearPredicate>& leaf,
                                       const lti::ParametricLti& model, const Vector& x0,
                                       GammaForm form = GammaForm::standard_deviation) {
  require_dim(x0.size(), model.n(), "x0");
  const auto [pred, delta] = orient(leaf.atom, leaf.direction, leaf.threshold);
  require_dim(pred.gradient.size(), model.n(), "predicate gradient");
  const std::size_t t = leaf.time;

  AffineInputConstraint c;
  c.time = t;
  c.f = input_map(model, t) * pred.gradient;
  c.b = pred.offset + pred.gradient.dot(free_response(model, x0, t));
  if (delta <= 0.0) {
    if (predicate_variance(pred.gradient, model, t) > 0.0) c.b = -kInfinity;
  } else if (delta < 1.0) {
    c.b += gamma(pred.gradient, delta, model, t, form);
  }
  return c;
}

enum class PredicateDomain { output, state };

/// Predicate whose gradient may depend on θ through the output map:
///   output: α(y) = offset + coeffsᵀ y, folded into the state as θ̃ = C(θ)ᵀ coeffs
///   state:  α(x) = offset + coeffsᵀ x
/// Measurement noise does not enter: the property is judged on C(θ)x.
struct ModelPredicate {
  PredicateDomain domain = PredicateDomain::output;
  double offset = 0.0;
  Vector coeffs;

  /// θ̃(θ) = base + jacobian·θ.
  struct ThetaMap {
    Vector base;
    Matrix jacobian;
  };

  ThetaMap theta_map(const lti::ParametricLti& model) const {
    ThetaMap map;
    if (domain == PredicateDomain::state) {
      require_dim(coeffs.size(), model.n(), "state predicate coefficients");
      map.base = coeffs;
      map.jacobian = Matrix::Zero(model.n(), model.d());
      return map;
    }
    require_dim(coeffs.size(), model.p(), "output predicate coefficients");
    map.base = model.C0().transpose() * coeffs;
    map.jacobian.resize(model.n(), model.d());
    for (Eigen::Index i = 0; i < model.d(); ++i) {
      map.jacobian.col(i) = model.C_basis()[static_cast<std::size_t>(i)].transpose() * coeffs;
    }
    return map;
  }

  stl::LinearPredicate instantiate(const lti::ParametricLti& model, const Vector& theta) const {
    require_dim(theta.size(), model.d(), "theta");
    const ThetaMap map = theta_map(model);
    return {offset, map.base + map.jacobian * theta};
  }
};

using ModelFormula = stl::BasicFormula<ModelPredicate>;

inline stl::StlFormula instantiate(const ModelFormula& f, const lti::ParametricLti& model,
                                   const Vector& theta) {
  return stl::transform_atoms(f, [&](const std::string&, const ModelPredicate& p) {
    return p.instantiate(model, theta);
  });
}

}  // namespace stlconf::decomp
