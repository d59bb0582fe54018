#pragma once

#include "stlconf/core.hpp"

#include <array>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace stlconf {

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// xoshiro256** (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& s : state_) s = splitmix64(sm);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> state_{};
};

/// Seeded random stream. Identical (seed, stream) pairs yield identical
/// sequences on every platform: uniforms use the top 53 bits and normals use
/// Box-Muller, so nothing depends on std:: distribution internals.
class RngStream {
 public:
  static constexpr std::string_view kAlgorithm = "xoshiro256**/splitmix64";

  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream), engine_(mix(seed, stream)) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// Independent child stream identified by a name and an index.
  RngStream substream(std::string_view name, std::uint64_t index = 0) const {
    std::uint64_t sm = stream_ ^ fnv1a64(name);
    const std::uint64_t a = splitmix64(sm);
    sm = a ^ index;
    return RngStream(seed_, splitmix64(sm));
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  Vector uniform_in(const Box& box) {
    Vector x(box.dim());
    for (Eigen::Index i = 0; i < box.dim(); ++i) x(i) = uniform(box.lower(i), box.upper(i));
    return x;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

  /// Sample N(0, F Fᵀ) given a square-root factor F.
  Vector normal_with_factor(const Matrix& factor) {
    Vector z(factor.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal();
    return factor * z;
  }

 private:
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t sm = seed;
    const std::uint64_t a = splitmix64(sm);
    sm = a ^ (stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
    return splitmix64(sm);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  Xoshiro256 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Square-root factor F with F Fᵀ = cov. Singular PSD matrices are fine;
/// tiny negative eigenvalues from round-off are clamped to zero.
inline Matrix covariance_factor(const Matrix& cov) {
  if (cov.rows() == 0) return cov;
  if (cov.isZero(0.0)) return Matrix::Zero(cov.rows(), cov.cols());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (cov + cov.transpose()));
  Vector vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * vals.asDiagonal();
}

}  // namespace stlconf
