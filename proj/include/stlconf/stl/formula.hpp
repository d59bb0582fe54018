#pragma once

#include "stlconf/core.hpp"

#include <algorithm>
#include <memory>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace stlconf::stl {

/// Affine state predicate: holds iff offset + gradientᵀx ≥ 0.
struct LinearPredicate {
  double offset = 0.0;
  Vector gradient;

  double value(const Vector& x) const {
    require_dim(x.size(), gradient.size(), "LinearPredicate state");
    return offset + gradient.dot(x);
  }
  LinearPredicate negated() const { return {-offset, -gradient}; }
};

/// Discrete-time interval [a, b] in steps.
struct Interval {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t length() const { return b - a + 1; }
};

template <class Atom>
class BasicFormula;

namespace node {
struct True {};
template <class Atom>
struct Pred {
  std::string name;
  Atom atom;
};
template <class Atom>
struct Not {
  BasicFormula<Atom> arg;
};
template <class Atom>
struct And {
  BasicFormula<Atom> lhs, rhs;
};
template <class Atom>
struct Or {
  BasicFormula<Atom> lhs, rhs;
};
template <class Atom>
struct Until {
  BasicFormula<Atom> lhs, rhs;
  Interval interval;
};
template <class Atom>
struct Eventually {
  BasicFormula<Atom> arg;
  Interval interval;
};
template <class Atom>
struct Always {
  BasicFormula<Atom> arg;
  Interval interval;
};
}  // namespace node

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

/// Immutable STL formula tree. Subtrees are shared, so copies are cheap.
///
/// Derived operators are stored as written; evaluation gives them their
/// standard meaning (Or as ¬(¬φ∧¬ψ), Eventually as T U φ, Always as ¬◇¬φ).
template <class Atom>
class BasicFormula {
 public:
  using AtomType = Atom;
  using Node = std::variant<node::True, node::Pred<Atom>, node::Not<Atom>, node::And<Atom>,
                            node::Or<Atom>, node::Until<Atom>, node::Eventually<Atom>,
                            node::Always<Atom>>;

  static BasicFormula truth() { return BasicFormula(node::True{}); }
  static BasicFormula pred(std::string name, Atom atom) {
    return BasicFormula(node::Pred<Atom>{std::move(name), std::move(atom)});
  }
  static BasicFormula negation(BasicFormula f) { return BasicFormula(node::Not<Atom>{std::move(f)}); }
  static BasicFormula conjunction(BasicFormula l, BasicFormula r) {
    return BasicFormula(node::And<Atom>{std::move(l), std::move(r)});
  }
  static BasicFormula disjunction(BasicFormula l, BasicFormula r) {
    return BasicFormula(node::Or<Atom>{std::move(l), std::move(r)});
  }
  static BasicFormula until(BasicFormula l, BasicFormula r, std::size_t a, std::size_t b) {
    check_interval(a, b);
    return BasicFormula(node::Until<Atom>{std::move(l), std::move(r), {a, b}});
  }
  static BasicFormula eventually(BasicFormula f, std::size_t a, std::size_t b) {
    check_interval(a, b);
    return BasicFormula(node::Eventually<Atom>{std::move(f), {a, b}});
  }
  static BasicFormula always(BasicFormula f, std::size_t a, std::size_t b) {
    check_interval(a, b);
    return BasicFormula(node::Always<Atom>{std::move(f), {a, b}});
  }

  const Node& node() const { return *node_; }

  template <class T>
  bool is() const {
    return std::holds_alternative<T>(*node_);
  }
  template <class T>
  const T& as() const {
    return std::get<T>(*node_);
  }

  template <class Visitor>
  decltype(auto) visit(Visitor&& v) const {
    return std::visit(std::forward<Visitor>(v), *node_);
  }

 private:
  explicit BasicFormula(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}

  static void check_interval(std::size_t a, std::size_t b) {
    if (a > b) {
      throw DomainError("temporal interval [" + std::to_string(a) + "," + std::to_string(b) +
                        "] has a > b");
    }
  }

  std::shared_ptr<const Node> node_;
};

using StlFormula = BasicFormula<LinearPredicate>;

/// Number of steps after t needed to decide the formula at t.
template <class Atom>
std::size_t horizon(const BasicFormula<Atom>& f) {
  return f.visit(Overloaded{
      [](const node::True&) -> std::size_t { return 0; },
      [](const node::Pred<Atom>&) -> std::size_t { return 0; },
      [](const node::Not<Atom>& n) { return horizon(n.arg); },
      [](const node::And<Atom>& n) { return std::max(horizon(n.lhs), horizon(n.rhs)); },
      [](const node::Or<Atom>& n) { return std::max(horizon(n.lhs), horizon(n.rhs)); },
      [](const node::Until<Atom>& n) {
        return n.interval.b + std::max(horizon(n.lhs), horizon(n.rhs));
      },
      [](const node::Eventually<Atom>& n) { return n.interval.b + horizon(n.arg); },
      [](const node::Always<Atom>& n) { return n.interval.b + horizon(n.arg); },
  });
}

/// True iff the formula contains Until, Eventually or Always.
template <class Atom>
bool is_temporal(const BasicFormula<Atom>& f) {
  return f.visit(Overloaded{
      [](const node::True&) { return false; },
      [](const node::Pred<Atom>&) { return false; },
      [](const node::Not<Atom>& n) { return is_temporal(n.arg); },
      [](const node::And<Atom>& n) { return is_temporal(n.lhs) || is_temporal(n.rhs); },
      [](const node::Or<Atom>& n) { return is_temporal(n.lhs) || is_temporal(n.rhs); },
      [](const node::Until<Atom>&) { return true; },
      [](const node::Eventually<Atom>&) { return true; },
      [](const node::Always<Atom>&) { return true; },
  });
}

/// Rebuild the tree with every atom mapped through `fn(name, atom)`.
template <class Atom, class Fn>
auto transform_atoms(const BasicFormula<Atom>& f, const Fn& fn)
    -> BasicFormula<std::invoke_result_t<Fn, const std::string&, const Atom&>> {
  using Out = BasicFormula<std::invoke_result_t<Fn, const std::string&, const Atom&>>;
  return f.visit(Overloaded{
      [](const node::True&) { return Out::truth(); },
      [&](const node::Pred<Atom>& n) { return Out::pred(n.name, fn(n.name, n.atom)); },
      [&](const node::Not<Atom>& n) { return Out::negation(transform_atoms(n.arg, fn)); },
      [&](const node::And<Atom>& n) {
        return Out::conjunction(transform_atoms(n.lhs, fn), transform_atoms(n.rhs, fn));
      },
      [&](const node::Or<Atom>& n) {
        return Out::disjunction(transform_atoms(n.lhs, fn), transform_atoms(n.rhs, fn));
      },
      [&](const node::Until<Atom>& n) {
        return Out::until(transform_atoms(n.lhs, fn), transform_atoms(n.rhs, fn), n.interval.a,
                          n.interval.b);
      },
      [&](const node::Eventually<Atom>& n) {
        return Out::eventually(transform_atoms(n.arg, fn), n.interval.a, n.interval.b);
      },
      [&](const node::Always<Atom>& n) {
        return Out::always(transform_atoms(n.arg, fn), n.interval.a, n.interval.b);
      },
  });
}

/// Canonical text form, accepted back by parse_stl.
template <class Atom>
std::string to_string(const BasicFormula<Atom>& f) {
  auto iv = [](const Interval& i) {
    return "[" + std::to_string(i.a) + "," + std::to_string(i.b) + "]";
  };
  return f.visit(Overloaded{
      [](const node::True&) -> std::string { return "T"; },
      [](const node::Pred<Atom>& n) { return n.name; },
      [](const node::Not<Atom>& n) { return "!" + to_string(n.arg); },
      [](const node::And<Atom>& n) { return "(" + to_string(n.lhs) + " & " + to_string(n.rhs) + ")"; },
      [](const node::Or<Atom>& n) { return "(" + to_string(n.lhs) + " | " + to_string(n.rhs) + ")"; },
      [&](const node::Until<Atom>& n) {
        return "(" + to_string(n.lhs) + " U" + iv(n.interval) + " " + to_string(n.rhs) + ")";
      },
      [&](const node::Eventually<Atom>& n) { return "F" + iv(n.interval) + " " + to_string(n.arg); },
      [&](const node::Always<Atom>& n) { return "G" + iv(n.interval) + " " + to_string(n.arg); },
  });
}

/// Finite discrete-time state sequence x(0), x(1), ...
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<Vector> states) : states_(std::move(states)) {
    if (states_.empty()) throw DomainError("Trajectory must be non-empty");
    for (const auto& x : states_) require_dim(x.size(), states_.front().size(), "Trajectory state");
  }

  std::size_t size() const { return states_.size(); }
  Eigen::Index dim() const { return states_.empty() ? 0 : states_.front().size(); }
  const Vector& operator[](std::size_t t) const { return states_[t]; }
  const std::vector<Vector>& states() const { return states_; }

  Trajectory prefix(std::size_t count) const {
    return Trajectory(std::vector<Vector>(states_.begin(),
                                          states_.begin() + static_cast<std::ptrdiff_t>(count)));
  }

 private:
  std::vector<Vector> states_;
};

}  // namespace stlconf::stl
