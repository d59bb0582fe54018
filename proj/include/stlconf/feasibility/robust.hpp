#pragma once

#include "stlconf/decomp/affine.hpp"
#include "stlconf/feasibility/lp.hpp"
#include "stlconf/lti/model.hpp"

#include <optional>

namespace stlconf::feasibility {

using decomp::AffineInputConstraint;
using lti::InputBox;

namespace detail {

inline std::size_t stacked_steps(const AffineInputConstraint& c, const InputBox& box) {
  const Eigen::Index m = box.dim();
  if (m == 0) {
    require_dim(c.f.size(), 0, "stacked input");
    return 0;
  }
  if (c.f.size() % m != 0) {
    throw DimensionError("stacked input length " + std::to_string(c.f.size()) +
                         " is not a multiple of the input dimension " + std::to_string(m));
  }
  return static_cast<std::size_t>(c.f.size() / m);
}

}  // namespace detail

/// min over admissible stacked inputs of fᵀu + b.
inline double worst_case_margin(const AffineInputConstraint& c, const InputBox& box) {
  const std::size_t steps = detail::stacked_steps(c, box);
  const Eigen::Index m = box.dim();
  double margin = c.b;
  for (std::size_t s = 0; s < steps; ++s) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double f = c.f(static_cast<Eigen::Index>(s) * m + i);
      margin += std::min(f * box.lower(i), f * box.upper(i));
    }
  }
  return margin;
}

/// P ≥ 0 with Dᵀ P = -f and dᵀ P ≤ b, where D = [I; -I] and d = [ū; -u̲]
/// over the stacked inputs. Entries 0..mt-1 pair with upper bounds, the rest
/// with lower bounds.
struct FarkasCertificate {
  Vector P;
};

struct FarkasResult {
  bool feasible = false;
  std::optional<FarkasCertificate> certificate;
  double dual_value = kInfinity;  // min dᵀP over the certificate polyhedron
};

/// Robust feasibility of fᵀu + b ≥ 0 for every u with D u ≤ d, decided on the
/// dual side: it holds iff min { dᵀP : DᵀP = -f, P ≥ 0 } ≤ b.
inline FarkasResult farkas_feasible(const AffineInputConstraint& c, const InputBox& box,
                                    double tol = kFeasibilityTolerance) {
  const std::size_t steps = detail::stacked_steps(c, box);
  const Eigen::Index m = box.dim();
  const Eigen::Index k = static_cast<Eigen::Index>(steps) * m;

  Vector upper(k), lower(k);
  for (std::size_t s = 0; s < steps; ++s) {
    upper.segment(static_cast<Eigen::Index>(s) * m, m) = box.upper;
    lower.segment(static_cast<Eigen::Index>(s) * m, m) = box.lower;
  }
  Matrix Dt(k, 2 * k);
  Dt << Matrix::Identity(k, k), -Matrix::Identity(k, k);
  Vector d(2 * k);
  d << upper, -lower;

  FarkasResult out;
  if (!std::isfinite(c.b)) return out;
  const LpResult lp = solve_standard_lp(Dt, -c.f, d);
  if (lp.status != LpStatus::optimal) return out;
  out.dual_value = lp.objective;
  out.feasible = lp.objective <= c.b + tol;
  if (out.feasible) out.certificate = FarkasCertificate{lp.x};
  return out;
}

}  // namespace stlconf::feasibility
