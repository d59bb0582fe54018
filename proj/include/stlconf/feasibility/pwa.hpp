#pragma once

#include "stlconf/feasibility/lp.hpp"
#include "stlconf/feasibility/satisfaction.hpp"

#include <algorithm>
#include <queue>
#include <vector>

namespace stlconf::feasibility {

enum class CellLabel { feasible, infeasible, unknown };

inline const char* to_string(CellLabel l) {
  switch (l) {
    case CellLabel::feasible: return "feasible";
    case CellLabel::infeasible: return "infeasible";
    case CellLabel::unknown: return "unknown";
  }
  return "unknown";
}

struct ThetaCell {
  Vector lower;
  Vector upper;
  CellLabel label = CellLabel::unknown;

  Box box() const { return Box(lower, upper); }
  Vector center() const { return 0.5 * (lower + upper); }
  Vector radius() const { return 0.5 * (upper - lower); }
  double volume() const { return (upper - lower).prod(); }
};

/// Uniform grid of per_axis^d cells; the first coordinate varies fastest.
inline std::vector<ThetaCell> pwa_partition(const Box& region, std::size_t per_axis) {
  if (per_axis == 0) throw DomainError("pwa_partition: per_axis must be >= 1");
  if (region.empty) return {};
  const Eigen::Index d = region.dim();
  std::size_t total = 1;
  for (Eigen::Index i = 0; i < d; ++i) total *= per_axis;
  const Vector width = region.widths();
  const auto n = static_cast<double>(per_axis);

  std::vector<ThetaCell> cells;
  cells.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    ThetaCell c{Vector(d), Vector(d), CellLabel::unknown};
    std::size_t rest = idx;
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto k = static_cast<double>(rest % per_axis);
      rest /= per_axis;
      // Edges computed from the region bounds so neighbouring cells share faces exactly.
      c.lower(i) = k == 0.0 ? region.lower(i) : region.lower(i) + width(i) * k / n;
      c.upper(i) = k + 1.0 == n ? region.upper(i) : region.lower(i) + width(i) * (k + 1.0) / n;
    }
    cells.push_back(std::move(c));
  }
  return cells;
}

/// Affine enclosure of Γ over a cell, in θ coordinates:
///   Γ̂(θ) + lower_shift ≤ Γ(θ) ≤ Γ̂(θ) + upper_shift,  Γ̂(θ) = value + gradᵀ(θ - center)
/// Normally lower_shift = -eps and upper_shift = eps.
struct GammaLinearization {
  Vector center;
  double value = 0.0;
  Vector grad;              // ∂Γ̂/∂θ
  Vector grad_theta_tilde;  // ∂Γ/∂θ̃ at the center
  double d_delta = 0.0;     // ∂Γ/∂δ at the center
  double eps = 0.0;
  double lower_shift = 0.0;
  double upper_shift = 0.0;
  bool interval_fallback = false;

  double lower(const Vector& theta) const { return value + grad.dot(theta - center) + lower_shift; }
  double upper(const Vector& theta) const { return value + grad.dot(theta - center) + upper_shift; }
};

namespace detail {

/// σ over the cell: σ_hi is exact (σ is convex, so its max sits at a vertex);
/// σ_lo comes from the tangent plane at the center.
inline std::pair<double, double> sigma_range(const LeafKernel& k, const ThetaCell& cell) {
  const Vector c = cell.center();
  const Vector r = cell.radius();
  const double sc = std::sqrt(k.variance(c));
  double lo = 0.0;
  if (sc > 0.0) {
    const Vector g = k.jacobian().transpose() * (k.covariance() * k.theta_tilde(c));
    lo = std::max(0.0, sc - (g.cwiseAbs() / sc).dot(r));
  }
  double hi = sc;
  const Box box = cell.box();
  for (std::size_t v = 0; v < box.vertex_count(); ++v) hi = std::max(hi, std::sqrt(k.variance(box.vertex(v))));
  return {lo, hi};
}

}  // namespace detail

/// Linearize Γ at the cell center with a second-order remainder bound.
inline GammaLinearization pwa_linearize(const LeafKernel& k, const ThetaCell& cell) {
  const Eigen::Index d = k.dim();
  require_dim(cell.lower.size(), d, "cell");
  GammaLinearization lin;
  lin.center = cell.center();
  lin.grad = Vector::Zero(d);
  lin.grad_theta_tilde = Vector::Zero(k.base().size());
  const Vector r = cell.radius();
  const auto [sigma_lo, sigma_hi] = detail::sigma_range(k, cell);

  if (k.delta() <= 0.0 || k.delta() >= 1.0) {
    // Limit leaves: Γ is 0 where σ = 0 and -∞ elsewhere (δ = 0), or 0 (δ = 1).
    const bool certain = k.delta() >= 1.0;
    lin.lower_shift = certain || sigma_hi == 0.0 ? 0.0 : -kInfinity;
    lin.upper_shift = certain || sigma_lo == 0.0 ? 0.0 : -kInfinity;
    lin.interval_fallback = true;
    return lin;
  }

  const double q = k.factor();
  const Vector tt = k.theta_tilde(lin.center);
  const Vector s_tt = k.covariance() * tt;
  const Vector g = k.jacobian().transpose() * s_tt;  // ½ ∂σ²/∂θ at the center
  const Matrix Q = k.jacobian().transpose() * k.covariance() * k.jacobian();
  const Matrix Qabs = Q.cwiseAbs();
  const double sc = std::sqrt(std::max(0.0, tt.dot(s_tt)));
  const double var_center = sc * sc;

  if (k.form() == GammaForm::paper_literal) {
    lin.value = q * var_center;
    lin.grad = 2.0 * q * g;
    lin.grad_theta_tilde = 2.0 * q * s_tt;
    lin.d_delta = var_center * decomp::gamma_factor_derivative(k.delta(), k.form());
    lin.eps = std::abs(q) * r.dot(Qabs * r);
  } else {
    lin.d_delta = sc * decomp::gamma_factor_derivative(k.delta(), k.form());
    // Interval enclosure q·[σ_lo, σ_hi], always valid.
    const double interval_eps = 0.5 * std::abs(q) * (sigma_hi - sigma_lo);
    double taylor_eps = kInfinity;
    if (sigma_lo > 0.0) {
      // |∂²σ/∂θ_i∂θ_j| ≤ |Q_ij|/σ_lo + |g_i|max |g_j|max / σ_lo³ with g affine in θ.
      const Vector gmax = g.cwiseAbs() + Qabs * r;
      const double rq = r.dot(Qabs * r);
      const double rg = gmax.dot(r);
      taylor_eps = 0.5 * std::abs(q) * (rq / sigma_lo + rg * rg / (sigma_lo * sigma_lo * sigma_lo));
    }
    if (taylor_eps <= interval_eps) {
      lin.value = q * sc;
      lin.grad = q / sc * g;
      lin.grad_theta_tilde = q / sc * s_tt;
      lin.eps = taylor_eps;
    } else {
      lin.value = 0.5 * q * (sigma_lo + sigma_hi);
      lin.eps = interval_eps;
      lin.interval_fallback = true;
      if (sc > 0.0) lin.grad_theta_tilde = q / sc * s_tt;
    }
  }
  lin.lower_shift = -lin.eps;
  lin.upper_shift = lin.eps;
  return lin;
}

namespace detail {

/// Robust margin at θ with Γ replaced by one side of the enclosure.
inline double bounded_margin(const LeafKernel& k, const GammaLinearization& lin, const InputBox& box,
                             const Vector& theta, bool conservative) {
  AffineInputConstraint c;
  c.time = k.time();
  c.f = k.f_base() + k.f_jacobian() * theta;
  c.b = k.mean_const() + k.mean_grad().dot(theta) + (conservative ? lin.lower(theta) : lin.upper(theta));
  return worst_case_margin(c, box);
}

/// max over the cell of the optimistic margin, a concave piecewise-affine
/// function of θ, as an epigraph LP.
inline double max_optimistic_margin(const LeafKernel& k, const GammaLinearization& lin,
                                    const InputBox& box, const ThetaCell& cell) {
  if (lin.upper_shift == -kInfinity) return -kInfinity;
  const Eigen::Index d = k.dim();
  const Eigen::Index K = k.f_base().size();
  const Eigen::Index m = box.dim();
  const Vector c = cell.center();
  const double constant = k.mean_const() + lin.value - lin.grad.dot(c) + lin.upper_shift;
  const Vector lin_theta = k.mean_grad() + lin.grad;
  if (K == 0 || d == 0) {
    // No input dependence: the margin is affine in θ and peaks at a vertex.
    double best = -kInfinity;
    const Box b = cell.box();
    for (std::size_t v = 0; v < b.vertex_count(); ++v) best = std::max(best, constant + lin_theta.dot(b.vertex(v)));
    return best;
  }

  // Variables [θ (d), z (K)]: maximize lin_thetaᵀθ + Σz, z_k ≤ f_k(θ)·l_k, z_k ≤ f_k(θ)·u_k.
  Matrix G = Matrix::Zero(2 * K, d + K);
  Vector h(2 * K);
  Vector lo(d + K), hi(d + K);
  lo.head(d) = cell.lower;
  hi.head(d) = cell.upper;
  const Vector r = cell.radius();
  for (Eigen::Index i = 0; i < K; ++i) {
    const double l = box.lower(i % m);
    const double u = box.upper(i % m);
    const auto row = k.f_jacobian().row(i);
    G.block(2 * i, 0, 1, d) = -l * row;
    G(2 * i, d + i) = 1.0;
    h(2 * i) = l * k.f_base()(i);
    G.block(2 * i + 1, 0, 1, d) = -u * row;
    G(2 * i + 1, d + i) = 1.0;
    h(2 * i + 1) = u * k.f_base()(i);
    const double fmax = std::abs(k.f_base()(i) + row.dot(c)) + row.cwiseAbs().dot(r);
    const double zmax = fmax * std::max(std::abs(l), std::abs(u)) + 1.0;
    lo(d + i) = -zmax;
    hi(d + i) = zmax;
  }
  Vector obj(d + K);
  obj.head(d) = lin_theta;
  obj.tail(K).setOnes();
  const LpResult lp = maximize_over_box(obj, G, h, lo, hi);
  if (lp.status != LpStatus::optimal) {
    throw NumericError("pwa: optimistic-margin LP did not reach an optimum");
  }
  return constant + lp.objective;
}

}  // namespace detail

/// feasible:   the conservative margin of every leaf is ≥ 0 at every vertex
///             (it is concave in θ, so vertices suffice);
/// infeasible: the optimistic margin of some leaf is < 0 on the whole cell;
/// unknown otherwise.
inline CellLabel pwa_classify(const ThetaCell& cell, const VerificationProblem& problem) {
  if (problem.unsatisfiable()) return CellLabel::infeasible;
  const Box box = cell.box();
  std::vector<GammaLinearization> lins;
  lins.reserve(problem.kernels().size());
  bool feasible = true;
  for (const auto& k : problem.kernels()) {
    lins.push_back(pwa_linearize(k, cell));
    for (std::size_t v = 0; v < box.vertex_count() && feasible; ++v) {
      feasible = detail::bounded_margin(k, lins.back(), problem.input_box(), box.vertex(v), true) >=
                 -kFeasibilityTolerance;
    }
  }
  if (feasible) return CellLabel::feasible;
  for (std::size_t i = 0; i < lins.size(); ++i) {
    if (detail::max_optimistic_margin(problem.kernels()[i], lins[i], problem.input_box(), cell) <
        -kFeasibilityTolerance) {
      return CellLabel::infeasible;
    }
  }
  return CellLabel::unknown;
}

/// Only the infeasibility half of pwa_classify.
inline bool certified_infeasible(const ThetaCell& cell, const VerificationProblem& problem) {
  if (problem.unsatisfiable()) return true;
  for (const auto& k : problem.kernels()) {
    if (detail::max_optimistic_margin(k, pwa_linearize(k, cell), problem.input_box(), cell) <
        -kFeasibilityTolerance) {
      return true;
    }
  }
  return false;
}

struct RegionResult {
  Box box;
  bool tightened = false;
  std::size_t cells_examined = 0;
};

/// Axis-aligned box containing every θ ∈ Θ that could satisfy the decomposed
/// constraints. For each coordinate bound, a best-first bisection discards
/// cells certified infeasible until the leading cell is narrower than
/// `tolerance` along that coordinate. The result is flagged empty when no
/// cell survives.
inline RegionResult restrict_region(const VerificationProblem& problem, const Box& theta_box,
                                    double tolerance = 1e-2, std::size_t max_cells = 20000) {
  RegionResult out{theta_box, false, 0};
  if (theta_box.empty) return out;
  const Eigen::Index d = theta_box.dim();
  require_dim(d, problem.model().d(), "theta box");
  const Vector scale = theta_box.widths().cwiseMax(1e-300);

  Vector lower = theta_box.lower, upper = theta_box.upper;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (int side = 0; side < 2; ++side) {
      // Priority: cell bound along i, smallest first (lower side) or largest first (upper side).
      auto key = [&](const ThetaCell& c) { return side == 0 ? c.lower(i) : -c.upper(i); };
      auto cmp = [&](const ThetaCell& a, const ThetaCell& b) { return key(a) > key(b); };
      std::priority_queue<ThetaCell, std::vector<ThetaCell>, decltype(cmp)> queue(cmp);
      queue.push(ThetaCell{theta_box.lower, theta_box.upper, CellLabel::unknown});
      std::size_t examined = 0;
      bool found = false;
      while (!queue.empty()) {
        ThetaCell cell = queue.top();
        if (examined >= max_cells) {
          found = true;  // leading cell still bounds every survivor
          break;
        }
        queue.pop();
        ++examined;
        if (certified_infeasible(cell, problem)) continue;
        if (cell.upper(i) - cell.lower(i) <= tolerance) {
          queue.push(std::move(cell));
          found = true;
          break;
        }
        Eigen::Index split = 0;
        ((cell.upper - cell.lower).cwiseQuotient(scale)).maxCoeff(&split);
        const double mid = 0.5 * (cell.lower(split) + cell.upper(split));
        ThetaCell a = cell, b = cell;
        a.upper(split) = mid;
        b.lower(split) = mid;
        queue.push(std::move(a));
        queue.push(std::move(b));
      }
      out.cells_examined += examined;
      if (!found) {
        out.box = Box::empty_box(d);
        out.tightened = true;
        return out;
      }
      if (side == 0) {
        lower(i) = queue.top().lower(i);
      } else {
        upper(i) = queue.top().upper(i);
      }
    }
  }
  out.tightened = (lower - theta_box.lower).cwiseAbs().maxCoeff() > 0.0 ||
                  (upper - theta_box.upper).cwiseAbs().maxCoeff() > 0.0;
  out.box = Box(lower, upper);
  return out;
}

}  // namespace stlconf::feasibility
