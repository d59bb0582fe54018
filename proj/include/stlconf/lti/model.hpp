#pragma once

#include "stlconf/core.hpp"

#include <cmath>
#include <vector>

namespace stlconf::lti {

/// Per-step bounds on the input vector u(t), identical at every step.
struct InputBox {
  Vector lower;
  Vector upper;

  InputBox() = default;
  InputBox(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
    require_dim(upper.size(), lower.size(), "InputBox upper bound");
    if ((lower.array() > upper.array()).any()) throw DomainError("InputBox: lower > upper");
  }
  Eigen::Index dim() const { return lower.size(); }
};

/// Stochastic LTI system whose output map depends affinely on θ:
///   x(t+1) = A x(t) + B u(t) + G w(t),   w ~ N(0, Σ_w)
///   y(t)   = C(θ) x(t) + e(t),            e ~ N(0, Σ_e)
///   C(θ)   = C₀ + Σᵢ θᵢ Cᵢ
class ParametricLti {
 public:
  ParametricLti(Matrix a, Matrix b, Matrix g, Matrix c0, std::vector<Matrix> c_basis,
                Matrix sigma_w, Matrix sigma_e, InputBox input_box)
      : a_(std::move(a)),
        b_(std::move(b)),
        g_(std::move(g)),
        c0_(std::move(c0)),
        c_basis_(std::move(c_basis)),
        sigma_w_(std::move(sigma_w)),
        sigma_e_(std::move(sigma_e)),
        input_box_(std::move(input_box)) {
    validate();
  }

  Eigen::Index n() const { return a_.rows(); }
  Eigen::Index m() const { return b_.cols(); }
  Eigen::Index p() const { return c0_.rows(); }
  Eigen::Index q() const { return g_.cols(); }
  Eigen::Index d() const { return static_cast<Eigen::Index>(c_basis_.size()); }

  const Matrix& A() const { return a_; }
  const Matrix& B() const { return b_; }
  const Matrix& G() const { return g_; }
  const Matrix& C0() const { return c0_; }
  const std::vector<Matrix>& C_basis() const { return c_basis_; }
  const Matrix& sigma_w() const { return sigma_w_; }
  const Matrix& sigma_e() const { return sigma_e_; }
  const InputBox& input_box() const { return input_box_; }

  Matrix C(const Vector& theta) const {
    require_dim(theta.size(), d(), "theta");
    Matrix c = c0_;
    for (Eigen::Index i = 0; i < d(); ++i) c += theta(i) * c_basis_[static_cast<std::size_t>(i)];
    return c;
  }

  /// Covariance of x(t) given a deterministic x(0):
  ///   Σ_{i=1}^{t} A^{i-1} G Σ_w Gᵀ (Aᵀ)^{i-1}
  Matrix state_covariance(std::size_t t) const {
    const Matrix gwg = g_ * sigma_w_ * g_.transpose();
    Matrix cov = Matrix::Zero(n(), n());
    for (std::size_t k = 0; k < t; ++k) cov = a_ * cov * a_.transpose() + gwg;
    return cov;
  }

 private:
  void validate() const {
    const Eigen::Index n_ = a_.rows();
    require_dim(a_.cols(), n_, "A columns");
    require_dim(b_.rows(), n_, "B rows");
    require_dim(g_.rows(), n_, "G rows");
    require_dim(c0_.cols(), n_, "C0 columns");
    for (const auto& ci : c_basis_) {
      require_dim(ci.rows(), c0_.rows(), "C_i rows");
      require_dim(ci.cols(), n_, "C_i columns");
    }
    require_dim(sigma_w_.rows(), g_.cols(), "Sigma_w rows");
    require_dim(sigma_w_.cols(), g_.cols(), "Sigma_w columns");
    require_dim(sigma_e_.rows(), c0_.rows(), "Sigma_e rows");
    require_dim(sigma_e_.cols(), c0_.rows(), "Sigma_e columns");
    require_dim(input_box_.dim(), b_.cols(), "input box");
    check_psd(sigma_w_, "Sigma_w");
    check_psd(sigma_e_, "Sigma_e");
  }

  static void check_psd(const Matrix& s, const char* name) {
    if (s.size() == 0) return;
    if (((s - s.transpose()).array().abs() > 1e-12 * std::max(1.0, s.norm())).any()) {
      throw DomainError(std::string(name) + " is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, s.norm())) {
      throw DomainError(std::string(name) + " is not positive semidefinite");
    }
  }

  Matrix a_, b_, g_, c0_;
  std::vector<Matrix> c_basis_;
  Matrix sigma_w_, sigma_e_;
  InputBox input_box_;
};

/// Two-state Laguerre-basis benchmark with coefficient a, |a| < 1:
///   A = [[a, 0], [1-a², a]],  B = [√(1-a²); -a√(1-a²)],  G = I₂,  C(θ) = θᵀ.
/// Σ_w = 0.5·I₂, Σ_e = 0.5 (scalar output), input box [-0.2, 0.2].
inline ParametricLti laguerre_model(double a, double process_variance = 0.5,
                                    double measurement_variance = 0.5, double input_bound = 0.2) {
  if (!(std::abs(a) < 1.0)) throw DomainError("laguerre_model: |a| must be < 1");
  const double s = std::sqrt(1.0 - a * a);
  Matrix A(2, 2);
  A << a, 0.0, 1.0 - a * a, a;
  Matrix B(2, 1);
  B << s, -a * s;
  Matrix C1(1, 2), C2(1, 2);
  C1 << 1.0, 0.0;
  C2 << 0.0, 1.0;
  return ParametricLti(A, B, Matrix::Identity(2, 2), Matrix::Zero(1, 2), {C1, C2},
                       process_variance * Matrix::Identity(2, 2),
                       measurement_variance * Matrix::Identity(1, 1),
                       InputBox(Vector::Constant(1, -input_bound), Vector::Constant(1, input_bound)));
}

}  // namespace stlconf::lti
