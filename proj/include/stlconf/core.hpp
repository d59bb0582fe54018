#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stlconf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Margin below which a "≥ 0" comparison is considered violated.
inline constexpr double kFeasibilityTolerance = 1e-9;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed formula text. `offset` is the byte position of the offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error("parse error at offset " + std::to_string(offset) + ": " + message),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Factorization failures, underflow of every likelihood term, and similar.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration. `path` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

inline void require_dim(Eigen::Index actual, Eigen::Index expected, const char* what) {
  if (actual != expected) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                         ", got " + std::to_string(actual));
  }
}

/// Axis-aligned box in R^d. An empty box carries `empty = true`; its bounds are
/// then only informative.
struct Box {
  Vector lower;
  Vector upper;
  bool empty = false;

  Box() = default;
  Box(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
    require_dim(upper.size(), lower.size(), "Box upper bound");
    if ((lower.array() > upper.array()).any()) throw DomainError("Box: lower > upper");
  }

  static Box empty_box(Eigen::Index d) {
    Box b(Vector::Zero(d), Vector::Zero(d));
    b.empty = true;
    return b;
  }

  Eigen::Index dim() const { return lower.size(); }
  Vector center() const { return 0.5 * (lower + upper); }
  Vector widths() const { return upper - lower; }
  double volume() const { return empty ? 0.0 : widths().prod(); }

  bool contains(const Vector& x, double tol = 0.0) const {
    if (empty) return false;
    return ((x.array() >= lower.array() - tol) && (x.array() <= upper.array() + tol)).all();
  }

  bool contains(const Box& other, double tol = 0.0) const {
    if (other.empty) return true;
    if (empty) return false;
    return ((other.lower.array() >= lower.array() - tol) &&
            (other.upper.array() <= upper.array() + tol))
        .all();
  }

  /// Vertex `k` in binary order: bit i selects upper bound of coordinate i.
  Vector vertex(std::size_t k) const {
    Vector v = lower;
    for (Eigen::Index i = 0; i < dim(); ++i) {
      if ((k >> i) & 1U) v(i) = upper(i);
    }
    return v;
  }
  std::size_t vertex_count() const { return std::size_t{1} << dim(); }
};

/// A^k for small dense matrices; powers[k] = A^k for k = 0..max_power.
inline std::vector<Matrix> matrix_powers(const Matrix& a, std::size_t max_power) {
  std::vector<Matrix> powers;
  powers.reserve(max_power + 1);
  powers.push_back(Matrix::Identity(a.rows(), a.cols()));
  for (std::size_t k = 1; k <= max_power; ++k) powers.push_back(a * powers.back());
  return powers;
}

}  // namespace stlconf
