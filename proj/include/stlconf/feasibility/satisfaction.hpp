#pragma once

#include "stlconf/decomp/affine.hpp"
#include "stlconf/decomp/chance.hpp"
#include "stlconf/feasibility/robust.hpp"

#include <vector>

namespace stlconf::feasibility {

using decomp::GammaForm;
using decomp::ModelFormula;
using decomp::ModelPredicate;

/// One leaf chance constraint, precompiled as a function of θ:
///   θ̃(θ)  = base + J θ
///   f(θ)  = F θ̃(θ)
///   b(θ)  = offset + hᵀθ̃(θ) + Γ(θ̃(θ))
/// where F is the stacked-input map at the leaf's time and h = Aᵗx0.
class LeafKernel {
 public:
  LeafKernel(const decomp::ChanceConstraint<ModelPredicate>& leaf, const lti::ParametricLti& model,
             const Vector& x0, GammaForm form)
      : time_(leaf.time), form_(form), name_(leaf.name), path_(leaf.path) {
    require_dim(x0.size(), model.n(), "x0");
    ModelPredicate pred = leaf.atom;
    if (leaf.direction == decomp::Direction::at_least) {
      delta_ = 1.0 - leaf.threshold;
    } else {
      pred.offset = -pred.offset;
      pred.coeffs = -pred.coeffs;
      delta_ = leaf.threshold;
    }
    const auto map = pred.theta_map(model);
    offset_ = pred.offset;
    base_ = map.base;
    J_ = map.jacobian;
    S_ = model.state_covariance(time_);
    const Matrix F = decomp::input_map(model, time_);
    f_base_ = F * base_;
    f_jac_ = F * J_;
    h_ = decomp::free_response(model, x0, time_);
    if (delta_ > 0.0 && delta_ < 1.0) factor_ = decomp::gamma_factor(delta_, form_);
  }

  std::size_t time() const { return time_; }
  double delta() const { return delta_; }
  GammaForm form() const { return form_; }
  const std::string& name() const { return name_; }
  const std::string& path() const { return path_; }
  const Vector& base() const { return base_; }
  const Matrix& jacobian() const { return J_; }
  const Matrix& covariance() const { return S_; }
  /// Quantile factor of Γ; meaningless at the limits δ ∈ {0, 1}.
  double factor() const { return factor_; }
  Eigen::Index dim() const { return J_.cols(); }

  Vector theta_tilde(const Vector& theta) const { return base_ + J_ * theta; }

  /// f(θ) = f_base + f_jac θ.
  const Vector& f_base() const { return f_base_; }
  const Matrix& f_jacobian() const { return f_jac_; }

  /// Mean part of b, affine in θ: mean_const + mean_gradᵀθ.
  double mean_const() const { return offset_ + h_.dot(base_); }
  Vector mean_grad() const { return J_.transpose() * h_; }

  double variance(const Vector& theta) const {
    const Vector tt = theta_tilde(theta);
    return std::max(0.0, tt.dot(S_ * tt));
  }

  double gamma(const Vector& theta) const {
    const double var = variance(theta);
    if (delta_ <= 0.0) return var > 0.0 ? -kInfinity : 0.0;
    if (delta_ >= 1.0) return 0.0;
    return form_ == GammaForm::standard_deviation ? std::sqrt(var) * factor_ : var * factor_;
  }

  AffineInputConstraint constraint(const Vector& theta) const {
    require_dim(theta.size(), dim(), "theta");
    AffineInputConstraint c;
    c.time = time_;
    c.f = f_base_ + f_jac_ * theta;
    c.b = mean_const() + mean_grad().dot(theta) + gamma(theta);
    return c;
  }

 private:
  std::size_t time_;
  GammaForm form_;
  std::string name_, path_;
  double delta_ = 0.5;
  double factor_ = 0.0;
  double offset_ = 0.0;
  Vector base_, h_, f_base_;
  Matrix J_, S_, f_jac_;
};

enum class FeasibilityRoute { closed_form, farkas };

/// Decomposed chance constraint Pr(M(θ) ⊨ ψ) ≥ 1 - δ, ready for evaluation at many θ.
class VerificationProblem {
 public:
  VerificationProblem(lti::ParametricLti model, ModelFormula formula, double delta, Vector x0,
                      decomp::WeightScheme weights = {}, GammaForm form = GammaForm::standard_deviation)
      : model_(std::move(model)),
        formula_(std::move(formula)),
        delta_(delta),
        x0_(std::move(x0)),
        weights_(std::move(weights)),
        form_(form) {
    require_dim(x0_.size(), model_.n(), "x0");
    decomposition_ = decomp::decompose(formula_, delta_, weights_, 0);
    decomposition_.for_each_leaf([&](const auto& leaf) { kernels_.emplace_back(leaf, model_, x0_, form_); });
  }

  const lti::ParametricLti& model() const { return model_; }
  const ModelFormula& formula() const { return formula_; }
  double delta() const { return delta_; }
  const Vector& x0() const { return x0_; }
  const decomp::WeightScheme& weights() const { return weights_; }
  GammaForm form() const { return form_; }
  const InputBox& input_box() const { return model_.input_box(); }
  const decomp::DecompositionResult<ModelPredicate>& decomposition() const { return decomposition_; }
  const std::vector<LeafKernel>& kernels() const { return kernels_; }
  bool unsatisfiable() const { return decomposition_.unsatisfiable; }

  /// Smallest robust margin over all leaves at θ (+∞ if there are none).
  double min_margin(const Vector& theta) const {
    if (unsatisfiable()) return -kInfinity;
    double worst = kInfinity;
    for (const auto& k : kernels_) worst = std::min(worst, worst_case_margin(k.constraint(theta), input_box()));
    return worst;
  }

 private:
  lti::ParametricLti model_;
  ModelFormula formula_;
  double delta_;
  Vector x0_;
  decomp::WeightScheme weights_;
  GammaForm form_;
  decomp::DecompositionResult<ModelPredicate> decomposition_;
  std::vector<LeafKernel> kernels_;
};

/// Stochastic satisfaction function, under-approximated: 1 iff every leaf's
/// affine constraint holds for all admissible input trajectories.
inline int satisfaction_fn(const Vector& theta, const VerificationProblem& problem,
                           FeasibilityRoute route = FeasibilityRoute::closed_form) {
  require_dim(theta.size(), problem.model().d(), "theta");
  if (problem.unsatisfiable()) return 0;
  for (const auto& k : problem.kernels()) {
    const AffineInputConstraint c = k.constraint(theta);
    const bool ok = route == FeasibilityRoute::closed_form
                        ? worst_case_margin(c, problem.input_box()) >= -kFeasibilityTolerance
                        : farkas_feasible(c, problem.input_box()).feasible;
    if (!ok) return 0;
  }
  return 1;
}

}  // namespace stlconf::feasibility
