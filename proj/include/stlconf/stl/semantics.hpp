#pragma once

#include "stlconf/stl/formula.hpp"

#include <algorithm>
#include <limits>

namespace stlconf::stl {

/// Whether the left operand of Until must also hold at the instant the right
/// operand is witnessed.
///  - closed:    φ U[a,b] ψ needs φ on [t, t'] (the Boolean semantics as written).
///  - half_open: φ needed on [t, t') only, which is what the min_{j∈[0,i)} robustness
///               formula and the Λ_j event split assume.
/// Boolean and quantitative evaluation must use the same convention for the
/// robustness sign to certify satisfaction.
enum class UntilConvention { closed, half_open };

template <class Atom>
concept EvaluableAtom = requires(const Atom& a, const Vector& x) {
  { a.value(x) } -> std::convertible_to<double>;
};

namespace detail {

inline void require_length(const Trajectory& xi, std::size_t needed) {
  if (xi.size() < needed) {
    throw DomainError("trajectory too short: need " + std::to_string(needed) + " states, have " +
                      std::to_string(xi.size()));
  }
}

template <class Atom>
bool sat(const Trajectory& xi, const BasicFormula<Atom>& f, std::size_t t, UntilConvention uc) {
  auto until = [&](const BasicFormula<Atom>* lhs, const BasicFormula<Atom>& rhs, Interval iv) {
    for (std::size_t tp = t + iv.a; tp <= t + iv.b; ++tp) {
      if (!sat(xi, rhs, tp, uc)) continue;
      const std::size_t last = uc == UntilConvention::closed ? tp + 1 : tp;
      bool ok = true;
      if (lhs != nullptr) {
        for (std::size_t k = t; k < last && ok; ++k) ok = sat(xi, *lhs, k, uc);
      }
      if (ok) return true;
    }
    return false;
  };
  return f.visit(Overloaded{
      [](const node::True&) { return true; },
      [&](const node::Pred<Atom>& n) { return n.atom.value(xi[t]) >= 0.0; },
      [&](const node::Not<Atom>& n) { return !sat(xi, n.arg, t, uc); },
      [&](const node::And<Atom>& n) { return sat(xi, n.lhs, t, uc) && sat(xi, n.rhs, t, uc); },
      [&](const node::Or<Atom>& n) { return sat(xi, n.lhs, t, uc) || sat(xi, n.rhs, t, uc); },
      [&](const node::Until<Atom>& n) { return until(&n.lhs, n.rhs, n.interval); },
      [&](const node::Eventually<Atom>& n) { return until(nullptr, n.arg, n.interval); },
      [&](const node::Always<Atom>& n) {
        for (std::size_t k = t + n.interval.a; k <= t + n.interval.b; ++k) {
          if (!sat(xi, n.arg, k, uc)) return false;
        }
        return true;
      },
  });
}

template <class Atom>
double rob(const Trajectory& xi, const BasicFormula<Atom>& f, std::size_t t, UntilConvention uc) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto until = [&](const BasicFormula<Atom>* lhs, const BasicFormula<Atom>& rhs, Interval iv) {
    double best = -inf;
    double prefix = inf;  // min of ρ^lhs over [t, t+i)
    for (std::size_t i = 0; i <= iv.b; ++i) {
      const double left = lhs ? rob(xi, *lhs, t + i, uc) : inf;
      if (i >= iv.a) {
        double window = prefix;
        if (uc == UntilConvention::closed) window = std::min(window, left);
        best = std::max(best, std::min(rob(xi, rhs, t + i, uc), window));
      }
      prefix = std::min(prefix, left);
    }
    return best;
  };
  return f.visit(Overloaded{
      [](const node::True&) { return inf; },
      [&](const node::Pred<Atom>& n) { return n.atom.value(xi[t]); },
      [&](const node::Not<Atom>& n) { return -rob(xi, n.arg, t, uc); },
      [&](const node::And<Atom>& n) { return std::min(rob(xi, n.lhs, t, uc), rob(xi, n.rhs, t, uc)); },
      [&](const node::Or<Atom>& n) { return std::max(rob(xi, n.lhs, t, uc), rob(xi, n.rhs, t, uc)); },
      [&](const node::Until<Atom>& n) { return until(&n.lhs, n.rhs, n.interval); },
      [&](const node::Eventually<Atom>& n) { return until(nullptr, n.arg, n.interval); },
      [&](const node::Always<Atom>& n) {
        double worst = inf;
        for (std::size_t k = t + n.interval.a; k <= t + n.interval.b; ++k) {
          worst = std::min(worst, rob(xi, n.arg, k, uc));
        }
        return worst;
      },
  });
}

}  // namespace detail

/// Boolean satisfaction (ξ, t) ⊨ f.
template <EvaluableAtom Atom>
bool satisfies(const Trajectory& xi, const BasicFormula<Atom>& f, std::size_t t = 0,
               UntilConvention uc = UntilConvention::closed) {
  detail::require_length(xi, t + horizon(f) + 1);
  return detail::sat(xi, f, t, uc);
}

/// Quantitative robustness ρ^f(ξ, t); +∞ for T.
template <EvaluableAtom Atom>
double robustness(const Trajectory& xi, const BasicFormula<Atom>& f, std::size_t t = 0,
                  UntilConvention uc = UntilConvention::closed) {
  detail::require_length(xi, t + horizon(f) + 1);
  return detail::rob(xi, f, t, uc);
}

}  // namespace stlconf::stl
