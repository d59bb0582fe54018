#pragma once

#include "stlconf/core.hpp"

#include <vector>

namespace stlconf::feasibility {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Vector x;
  double objective = kInfinity;
};

namespace detail {

/// Dense simplex tableau. Row r < rows holds a constraint; the last row is the
/// objective (reduced costs, with -objective value in the last column).
class Tableau {
 public:
  Tableau(Eigen::Index rows, Eigen::Index cols) : t_(Matrix::Zero(rows + 1, cols + 1)), basis_(rows) {}

  Matrix& data() { return t_; }
  std::vector<Eigen::Index>& basis() { return basis_; }
  Eigen::Index rows() const { return t_.rows() - 1; }
  Eigen::Index cols() const { return t_.cols() - 1; }

  void pivot(Eigen::Index r, Eigen::Index c) {
    const double pivot = t_(r, c);
    t_.row(r) /= pivot;
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      const double factor = t_(i, c);
      if (i != r && factor != 0.0) t_.row(i) -= factor * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = c;
  }

  /// Bland's rule; only columns with allowed[c] may enter. Returns false if unbounded.
  bool optimize(const std::vector<bool>& allowed, double tol) {
    const Eigen::Index obj = rows();
    for (;;) {
      Eigen::Index enter = -1;
      for (Eigen::Index c = 0; c < cols(); ++c) {
        if (allowed[static_cast<std::size_t>(c)] && t_(obj, c) < -tol) {
          enter = c;
          break;
        }
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      double best = kInfinity;
      for (Eigen::Index r = 0; r < rows(); ++r) {
        if (t_(r, enter) <= tol) continue;
        const double ratio = t_(r, cols()) / t_(r, enter);
        if (ratio < best - tol ||
            (ratio <= best + tol && leave >= 0 &&
             basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)])) {
          best = std::min(best, ratio);
          leave = r;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }

 private:
  Matrix t_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace detail

/// minimize cᵀx subject to A x = b, x ≥ 0, by two-phase simplex with Bland's rule.
/// Intended for the small dense systems of this library (tens of variables).
inline LpResult solve_standard_lp(const Matrix& A, const Vector& b, const Vector& c, double tol = 1e-10) {
  require_dim(b.size(), A.rows(), "LP right-hand side");
  require_dim(c.size(), A.cols(), "LP cost");
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  LpResult result;

  if (m == 0) {
    // Only x ≥ 0: bounded iff c ≥ 0, optimum at x = 0.
    if ((c.array() < -tol).any()) {
      result.status = LpStatus::unbounded;
      return result;
    }
    result.status = LpStatus::optimal;
    result.x = Vector::Zero(n);
    result.objective = 0.0;
    return result;
  }

  // Phase 1: artificial variable per row, rows flipped to b ≥ 0.
  detail::Tableau tab(m, n + m);
  Matrix& t = tab.data();
  for (Eigen::Index r = 0; r < m; ++r) {
    const double sign = b(r) < 0.0 ? -1.0 : 1.0;
    t.row(r).head(n) = sign * A.row(r);
    t(r, n + r) = 1.0;
    t(r, n + m) = sign * b(r);
    tab.basis()[static_cast<std::size_t>(r)] = n + r;
  }
  for (Eigen::Index r = 0; r < m; ++r) t.row(m) -= t.row(r);
  for (Eigen::Index r = 0; r < m; ++r) t(m, n + r) = 0.0;

  std::vector<bool> allowed(static_cast<std::size_t>(n + m), true);
  tab.optimize(allowed, tol);
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  if (-t(m, n + m) > 1e-9 * scale) {
    result.status = LpStatus::infeasible;
    return result;
  }

  // Drive remaining artificials out of the basis; rows that cannot pivot are redundant.
  std::vector<bool> redundant(static_cast<std::size_t>(m), false);
  for (Eigen::Index r = 0; r < m; ++r) {
    if (tab.basis()[static_cast<std::size_t>(r)] < n) continue;
    Eigen::Index col = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(t(r, j)) > 1e-9) {
        col = j;
        break;
      }
    }
    if (col >= 0) {
      tab.pivot(r, col);
    } else {
      redundant[static_cast<std::size_t>(r)] = true;
    }
  }

  // Phase 2 on the original cost; artificials may no longer enter.
  t.row(m).setZero();
  t.row(m).head(n) = c.transpose();
  for (Eigen::Index r = 0; r < m; ++r) {
    if (redundant[static_cast<std::size_t>(r)]) continue;
    const Eigen::Index j = tab.basis()[static_cast<std::size_t>(r)];
    const double factor = t(m, j);
    if (factor != 0.0) t.row(m) -= factor * t.row(r);
  }
  for (Eigen::Index j = n; j < n + m; ++j) allowed[static_cast<std::size_t>(j)] = false;
  if (!tab.optimize(allowed, tol)) {
    result.status = LpStatus::unbounded;
    return result;
  }

  result.status = LpStatus::optimal;
  result.x = Vector::Zero(n);
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::Index j = tab.basis()[static_cast<std::size_t>(r)];
    if (j < n) result.x(j) = std::max(0.0, t(r, n + m));
  }
  result.objective = c.dot(result.x);
  return result;
}

/// maximize cᵀx subject to G x ≤ h, lo ≤ x ≤ hi (all bounds finite).
inline LpResult maximize_over_box(const Vector& c, const Matrix& G, const Vector& h, const Vector& lo,
                                  const Vector& hi, double tol = 1e-10) {
  const Eigen::Index n = c.size();
  require_dim(G.cols(), n, "LP constraint columns");
  require_dim(h.size(), G.rows(), "LP constraint rows");
  const Eigen::Index k = G.rows();
  // x = lo + s, 0 ≤ s ≤ hi - lo; variables [s, slack_G, slack_box].
  Matrix A = Matrix::Zero(k + n, n + k + n);
  Vector b(k + n);
  A.topLeftCorner(k, n) = G;
  A.block(0, n, k, k).setIdentity();
  b.head(k) = h - G * lo;
  A.bottomLeftCorner(n, n).setIdentity();
  A.block(k, n + k, n, n).setIdentity();
  b.tail(n) = hi - lo;
  Vector cost = Vector::Zero(n + k + n);
  cost.head(n) = -c;
  LpResult r = solve_standard_lp(A, b, cost, tol);
  if (r.status != LpStatus::optimal) return r;
  const Vector x = lo + r.x.head(n);
  r.x = x;
  r.objective = c.dot(r.x);
  return r;
}

}  // namespace stlconf::feasibility
