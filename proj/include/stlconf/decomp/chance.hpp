#pragma once

#include "stlconf/stl/formula.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stlconf::decomp {

enum class Direction { at_least, at_most };

inline const char* to_string(Direction d) { return d == Direction::at_least ? "at_least" : "at_most"; }

/// Leaf obligation Pr(α(x(time)) ≥ 0) {≥, ≤} threshold.
///
/// Thresholds normally lie in (0, 1). A zero conjunction weight produces the
/// limit cases at_least 1 / at_most 0 ("almost surely"), which only
/// noise-free predicates can meet.
template <class Atom>
struct ChanceConstraint {
  std::string name;
  Atom atom;
  std::size_t time = 0;
  Direction direction = Direction::at_least;
  double threshold = 0.5;
  double share = 1.0;  // weight applied at the split that produced this leaf
  std::string path;    // decomposition-node path, see WeightScheme
};

/// Conjunctive group of leaves. Every Λ_j event of an Until opens its own
/// group; leaves outside any Until sit in the root group.
template <class Atom>
struct LeafGroup {
  std::string label;
  std::string path;
  double requirement = 1.0;  // lower bound on the probability of the group's event
  std::vector<ChanceConstraint<Atom>> leaves;
};

/// All groups must hold. `unsatisfiable` is set when a positive probability
/// was demanded of a constant-false subformula.
template <class Atom>
struct DecompositionResult {
  double delta = 0.0;
  std::size_t t0 = 0;
  std::vector<LeafGroup<Atom>> groups;
  bool unsatisfiable = false;

  std::size_t leaf_count() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.leaves.size();
    return n;
  }

  template <class Fn>
  void for_each_leaf(Fn&& fn) const {
    for (const auto& g : groups) {
      for (const auto& leaf : g.leaves) fn(leaf);
    }
  }
};

enum class WeightMode { uniform, specified };

/// Per-node split weights.
///
/// Node paths: the root is "r"; child i of node P is "P.i". Children are, in
/// order, the flattened conjuncts of a conjunction, the flattened disjuncts of
/// a disjunction, the instants a..b of an Always, and the events Λ_{t+a}..Λ_{t+b}
/// of an Until or Eventually. Nodes without an entry use uniform weights.
struct WeightScheme {
  WeightMode mode = WeightMode::uniform;
  std::map<std::string, std::vector<double>> weights;

  static WeightScheme uniform() { return {}; }

  std::vector<double> for_node(const std::string& path, std::size_t children) const {
    if (mode == WeightMode::specified) {
      if (auto it = weights.find(path); it != weights.end()) {
        const auto& w = it->second;
        if (w.size() != children) {
          throw DomainError("weights at node '" + path + "': expected " + std::to_string(children) +
                            " entries, got " + std::to_string(w.size()));
        }
        double sum = 0.0;
        for (double v : w) {
          if (!(v >= 0.0 && v <= 1.0)) {
            throw DomainError("weights at node '" + path + "' must lie in [0, 1]");
          }
          sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
          throw DomainError("weights at node '" + path + "' sum to " + std::to_string(sum) +
                            ", expected 1");
        }
        return w;
      }
    }
    return std::vector<double>(children, 1.0 / static_cast<double>(children));
  }
};

/// Formula anchored at an absolute time step.
template <class Atom>
struct TimedFormula {
  stl::BasicFormula<Atom> formula;
  std::size_t time = 0;
};

/// Event Λ_j of ψ1 U[a,b] ψ2 evaluated at t: ψ2 first holds at j.
template <class Atom>
struct UntilEvent {
  std::size_t time = 0;
  std::vector<TimedFormula<Atom>> conjuncts;
};

/// Λ_j = ⋀_{k=t}^{t+a-1} ψ1@k ∧ ⋀_{k=t+a}^{j-1} (ψ1 ∧ ¬ψ2)@k ∧ ψ2@j for
/// j = t+a..t+b. The events are pairwise disjoint and their union is the
/// Until event (with ψ1 required before, not at, the witness instant).
template <class Atom>
std::vector<UntilEvent<Atom>> until_events(const stl::BasicFormula<Atom>& lhs,
                                           const stl::BasicFormula<Atom>& rhs, std::size_t a,
                                           std::size_t b, std::size_t t) {
  using F = stl::BasicFormula<Atom>;
  if (a > b) throw DomainError("until_events: a > b");
  if (stl::is_temporal(lhs) || stl::is_temporal(rhs)) {
    throw DomainError("until_events: nested temporal operators inside Until operands are not supported");
  }
  const F guard = F::conjunction(lhs, F::negation(rhs));
  std::vector<UntilEvent<Atom>> events;
  for (std::size_t j = t + a; j <= t + b; ++j) {
    UntilEvent<Atom> ev{j, {}};
    for (std::size_t k = t; k < t + a; ++k) ev.conjuncts.push_back({lhs, k});
    for (std::size_t k = t + a; k < j; ++k) ev.conjuncts.push_back({guard, k});
    ev.conjuncts.push_back({rhs, j});
    events.push_back(std::move(ev));
  }
  return events;
}

namespace detail {

/// Formula under an implicit negation flag: negations are pushed inward on
/// the fly, so the recursion only ever sees negation-normal form.
template <class Atom>
struct Literal {
  stl::BasicFormula<Atom> f;
  bool negated = false;
  std::size_t time = 0;
};

enum class Shape { truth, falsity, atom, conjunction, disjunction, until, eventually, always };

template <class Atom>
Shape shape_of(const Literal<Atom>& l) {
  using namespace stl::node;
  const bool neg = l.negated;
  return l.f.visit(stl::Overloaded{
      [&](const True&) { return neg ? Shape::falsity : Shape::truth; },
      [&](const Pred<Atom>&) { return Shape::atom; },
      [&](const Not<Atom>& n) { return shape_of(Literal<Atom>{n.arg, !neg, l.time}); },
      [&](const And<Atom>&) { return neg ? Shape::disjunction : Shape::conjunction; },
      [&](const Or<Atom>&) { return neg ? Shape::conjunction : Shape::disjunction; },
      [&](const Until<Atom>&) {
        if (neg) throw DomainError("decompose: negated Until is not supported");
        return Shape::until;
      },
      [&](const Eventually<Atom>&) { return neg ? Shape::always : Shape::eventually; },
      [&](const Always<Atom>&) { return neg ? Shape::eventually : Shape::always; },
  });
}

/// Strip top-level negations.
template <class Atom>
Literal<Atom> normalize(Literal<Atom> l) {
  while (l.f.template is<stl::node::Not<Atom>>()) {
    l = Literal<Atom>{l.f.template as<stl::node::Not<Atom>>().arg, !l.negated, l.time};
  }
  return l;
}

/// Operands of a binary connective with the negation flag pushed through.
template <class Atom>
std::pair<Literal<Atom>, Literal<Atom>> operands(const Literal<Atom>& l) {
  using namespace stl::node;
  if (l.f.template is<And<Atom>>()) {
    const auto& n = l.f.template as<And<Atom>>();
    return {{n.lhs, l.negated, l.time}, {n.rhs, l.negated, l.time}};
  }
  const auto& n = l.f.template as<Or<Atom>>();
  return {{n.lhs, l.negated, l.time}, {n.rhs, l.negated, l.time}};
}

template <class Atom>
class Decomposer {
 public:
  Decomposer(const WeightScheme& weights, DecompositionResult<Atom>& out)
      : weights_(weights), out_(out) {}

  void run(const Literal<Atom>& root, double requirement) {
    out_.groups.push_back({"root", "r", requirement, {}});
    visit(root, requirement, "r", 0);
  }

 private:
  /// Expand nested connectives of `target` shape into a flat child list.
  /// Returns false if an absorbing constant (F in ∧, T in ∨) was met.
  bool flatten(const Literal<Atom>& l, Shape target, std::vector<Literal<Atom>>& items) {
    const Literal<Atom> n = normalize(l);
    const Shape s = shape_of(n);
    if (s == target) {
      auto [lhs, rhs] = operands(n);
      return flatten(lhs, target, items) && flatten(rhs, target, items);
    }
    if (target == Shape::conjunction && s == Shape::truth) return true;
    if (target == Shape::disjunction && s == Shape::falsity) return true;
    if (target == Shape::conjunction && s == Shape::falsity) return false;
    if (target == Shape::disjunction && s == Shape::truth) return false;
    items.push_back(n);
    return true;
  }

  /// Case II: conjunct i may fail with probability at most w_i·(1 - p).
  void conjunction(const std::vector<Literal<Atom>>& items, double p, const std::string& path,
                   std::size_t group) {
    if (items.empty()) return;
    const auto w = weights_.for_node(path, items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      visit(items[i], 1.0 - w[i] * (1.0 - p), path + "." + std::to_string(i), group);
    }
  }

  void visit(const Literal<Atom>& raw, double p, const std::string& path, std::size_t group) {
    if (p <= 0.0) return;
    const Literal<Atom> l = normalize(raw);
    switch (shape_of(l)) {
      case Shape::truth:
        return;
      case Shape::falsity:
        out_.unsatisfiable = true;
        return;
      case Shape::atom: {
        const auto& pred = l.f.template as<stl::node::Pred<Atom>>();
        ChanceConstraint<Atom> leaf{pred.name, pred.atom, l.time, Direction::at_least, p, 1.0, path};
        if (l.negated) {
          // Case I: Pr(¬μ) ≥ p  ⟺  Pr(μ) ≤ 1 - p.
          leaf.direction = Direction::at_most;
          leaf.threshold = 1.0 - p;
        }
        out_.groups[group].leaves.push_back(std::move(leaf));
        return;
      }
      case Shape::conjunction: {
        std::vector<Literal<Atom>> items;
        if (!flatten(l, Shape::conjunction, items)) {
          out_.unsatisfiable = true;
          return;
        }
        conjunction(items, p, path, group);
        return;
      }
      case Shape::disjunction: {
        std::vector<Literal<Atom>> items;
        if (!flatten(l, Shape::disjunction, items)) return;  // contains T
        if (items.empty()) {
          out_.unsatisfiable = true;
          return;
        }
        // Weighted disjunction: disjunct i must hold with probability w_i·p.
        // Shares add up to p, which is sufficient when the disjuncts are
        // mutually exclusive (e.g. the two sides of an interval).
        const auto w = weights_.for_node(path, items.size());
        for (std::size_t i = 0; i < items.size(); ++i) {
          visit(items[i], w[i] * p, path + "." + std::to_string(i), group);
        }
        return;
      }
      case Shape::always: {
        const auto [arg, iv] = temporal_operand(l);
        std::vector<Literal<Atom>> items;
        for (std::size_t k = l.time + iv.a; k <= l.time + iv.b; ++k) items.push_back({arg, l.negated, k});
        conjunction(items, p, path, group);
        return;
      }
      case Shape::eventually: {
        const auto [arg, iv] = temporal_operand(l);
        auto target = l.negated ? stl::BasicFormula<Atom>::negation(arg) : arg;
        events(stl::BasicFormula<Atom>::truth(), target, iv, l.time, p, path);
        return;
      }
      case Shape::until: {
        const auto& n = l.f.template as<stl::node::Until<Atom>>();
        events(n.lhs, n.rhs, n.interval, l.time, p, path);
        return;
      }
    }
  }

  std::pair<stl::BasicFormula<Atom>, stl::Interval> temporal_operand(const Literal<Atom>& l) {
    using namespace stl::node;
    if (l.f.template is<Eventually<Atom>>()) {
      const auto& n = l.f.template as<Eventually<Atom>>();
      return {n.arg, n.interval};
    }
    const auto& n = l.f.template as<Always<Atom>>();
    return {n.arg, n.interval};
  }

  /// Case III: the Λ_j are disjoint, so Pr(ψ1 U ψ2) = Σ_j Pr(Λ_j) ≥ Σ_j γ_j·p.
  void events(const stl::BasicFormula<Atom>& lhs, const stl::BasicFormula<Atom>& rhs,
              stl::Interval iv, std::size_t t, double p, const std::string& path) {
    const auto evs = until_events(lhs, rhs, iv.a, iv.b, t);
    const auto gamma = weights_.for_node(path, evs.size());
    for (std::size_t e = 0; e < evs.size(); ++e) {
      const double share = gamma[e] * p;
      if (share <= 0.0) continue;
      const std::string epath = path + "." + std::to_string(e);
      out_.groups.push_back(
          {"Lambda_" + std::to_string(evs[e].time) + " @" + path, epath, share, {}});
      const std::size_t group = out_.groups.size() - 1;
      std::vector<Literal<Atom>> items;
      bool ok = true;
      for (const auto& c : evs[e].conjuncts) {
        ok = flatten(Literal<Atom>{c.formula, false, c.time}, Shape::conjunction, items) && ok;
      }
      if (!ok) {
        out_.unsatisfiable = true;
        continue;
      }
      conjunction(items, share, epath, group);
    }
  }

  const WeightScheme& weights_;
  DecompositionResult<Atom>& out_;
};

}  // namespace detail

/// Replace Pr((ξ, t0) ⊨ f) ≥ 1 - δ by leaf chance constraints on predicates.
/// Satisfying every leaf is sufficient for the original constraint.
template <class Atom>
DecompositionResult<Atom> decompose(const stl::BasicFormula<Atom>& f, double delta,
                                    const WeightScheme& weights = {}, std::size_t t0 = 0) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("decompose: delta must lie in (0, 1)");
  DecompositionResult<Atom> out;
  out.delta = delta;
  out.t0 = t0;
  detail::Decomposer<Atom>(weights, out).run({f, false, t0}, 1.0 - delta);
  // Drop empty groups left behind by trivially true subformulas.
  std::erase_if(out.groups, [](const auto& g) { return g.leaves.empty() && g.path != "r"; });
  return out;
}

}  // namespace stlconf::decomp
