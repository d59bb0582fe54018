#pragma once

#include "stlconf/decomp/affine.hpp"
#include "stlconf/lti/model.hpp"
#include "stlconf/stl/parser.hpp"

#include <string>

namespace stlconf::fixtures {

inline decomp::ModelPredicate output_pred(double offset, double gain) {
  return {decomp::PredicateDomain::output, offset, Vector::Constant(1, gain)};
}

/// μ1: y ≥ -0.5, μ2: y ≤ 0.5, μ3: y ≥ -0.1, μ4: y ≤ 0.1.
inline stl::PredicateTable<decomp::ModelPredicate> case_predicates() {
  return {{"mu1", output_pred(0.5, 1.0)},
          {"mu2", output_pred(0.5, -1.0)},
          {"mu3", output_pred(0.1, 1.0)},
          {"mu4", output_pred(0.1, -1.0)}};
}

inline const char* kCaseFormula = "(mu1 & mu2) U[2,4] (mu3 & mu4)";

inline decomp::ModelFormula case_formula() { return stl::parse_stl(kCaseFormula, case_predicates()); }

inline lti::ParametricLti case_model() { return lti::laguerre_model(0.4); }

/// x(t+1) = a x(t) + b u(t) + g w(t), y = θ x + e; one parameter.
inline lti::ParametricLti scalar_model(double a, double b, double g, double var_w, double var_e,
                                       double input_bound = 1.0) {
  return lti::ParametricLti(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b), Matrix::Constant(1, 1, g),
                            Matrix::Zero(1, 1), {Matrix::Constant(1, 1, 1.0)}, Matrix::Constant(1, 1, var_w),
                            Matrix::Constant(1, 1, var_e),
                            lti::InputBox(Vector::Constant(1, -input_bound), Vector::Constant(1, input_bound)));
}

}  // namespace stlconf::fixtures
