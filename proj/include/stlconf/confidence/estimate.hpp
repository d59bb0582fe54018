#pragma once

#include "stlconf/bayes/inference.hpp"
#include "stlconf/feasibility/pwa.hpp"
#include "stlconf/parallel.hpp"
#include "stlconf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace stlconf::confidence {

enum class Method { monte_carlo, pwa };

inline const char* to_string(Method m) { return m == Method::monte_carlo ? "monte_carlo" : "pwa"; }

struct CellMass {
  feasibility::ThetaCell cell;
  double mass = 0.0;
  double variance = 0.0;
};

/// Q_N = (V/N) Σ K(θ_i) with K = f·p(θ|D), plus Chebyshev's bound
/// Pr(|Q_N - E Q_N| ≤ ε) ≥ 1 - Var[Q_N]/ε².
struct ConfidenceEstimate {
  Method method = Method::monte_carlo;
  double value = 0.0;               // raw estimate, may leave [0, 1] by sampling noise
  std::size_t samples = 0;
  double variance_estimate = 0.0;   // Var[Q_N] = V² var(K) / N
  double sample_variance = 0.0;     // per-sample var(K), Monte Carlo only
  double chebyshev_epsilon = 0.005;
  double chebyshev_probability = 0.0;
  double region_volume = 0.0;
  double satisfied_fraction = 0.0;  // share of samples with f = 1 (Monte Carlo only)
  // PWA only: mass of unknown cells widens the estimate to [value, value + unknown_mass].
  double unknown_mass = 0.0;
  std::vector<CellMass> cells;

  double standard_error() const { return std::sqrt(variance_estimate); }
  double clamped() const { return std::clamp(value, 0.0, 1.0); }
  double upper_bracket() const { return value + unknown_mass; }
};

inline double chebyshev_probability(double variance, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("chebyshev: epsilon must be > 0");
  return std::max(0.0, 1.0 - variance / (epsilon * epsilon));
}

/// Smallest N with V²·var_K / (ε² N) ≤ 1 - confidence_floor.
inline std::size_t chebyshev_sample_size(double epsilon, double confidence_floor, double var_K, double V) {
  if (!(epsilon > 0.0)) throw DomainError("chebyshev_sample_size: epsilon must be > 0");
  if (!(confidence_floor > 0.0 && confidence_floor < 1.0)) {
    throw DomainError("chebyshev_sample_size: confidence_floor must lie in (0, 1)");
  }
  if (!(var_K >= 0.0)) throw DomainError("chebyshev_sample_size: var_K must be >= 0");
  const double n = V * V * var_K / (epsilon * epsilon * (1.0 - confidence_floor));
  // Absorb round-off so exact ratios do not step up by one.
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(n * (1.0 - 1e-12))));
}

namespace detail {

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t hits = 0;
};

inline void finish(ConfidenceEstimate& e, const Moments& m, std::size_t n, double V) {
  const auto N = static_cast<double>(n);
  const double mean = m.sum / N;
  e.value = V * mean;
  e.sample_variance = n > 1 ? std::max(0.0, (m.sum_sq - N * mean * mean) / (N - 1.0)) : 0.0;
  e.variance_estimate = V * V * e.sample_variance / N;
  e.chebyshev_probability = chebyshev_probability(e.variance_estimate, e.chebyshev_epsilon);
}

}  // namespace detail

constexpr std::size_t kChunk = 1024;

/// Monte Carlo confidence over `region`. `sat` maps θ to {0, 1}; the density
/// is only evaluated where sat is 1. Per-chunk substreams and ordered
/// reduction make the result independent of the thread count.
template <class Sat>
ConfidenceEstimate mc_confidence(const bayes::PosteriorDensity& post, const Sat& sat, const Box& region,
                                 std::size_t N, const RngStream& rng, double chebyshev_epsilon = 0.005,
                                 std::size_t threads = 0) {
  if (N == 0) throw DomainError("mc_confidence: N must be >= 1");
  ConfidenceEstimate e;
  e.method = Method::monte_carlo;
  e.samples = N;
  e.chebyshev_epsilon = chebyshev_epsilon;
  e.region_volume = region.volume();
  if (region.empty) {
    e.chebyshev_probability = 1.0;
    return e;
  }

  const std::size_t chunks = (N + kChunk - 1) / kChunk;
  std::vector<detail::Moments> parts(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    RngStream r = rng.substream("mc_confidence", c);
    detail::Moments m;
    const std::size_t end = std::min(N, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      const Vector theta = r.uniform_in(region);
      if (!sat(theta)) continue;
      ++m.hits;
      const double k = post.support().contains(theta) ? post.density(theta) : 0.0;
      m.sum += k;
      m.sum_sq += k * k;
    }
    parts[c] = m;
  });
  detail::Moments total;
  for (const auto& m : parts) {
    total.sum += m.sum;
    total.sum_sq += m.sum_sq;
    total.hits += m.hits;
  }
  detail::finish(e, total, N, e.region_volume);
  e.satisfied_fraction = static_cast<double>(total.hits) / static_cast<double>(N);
  return e;
}

/// Posterior mass of feasible-labelled cells, each integrated by its own
/// Monte Carlo run. Unknown cells are integrated too and reported as
/// unknown_mass, never added to the point estimate.
inline ConfidenceEstimate pwa_confidence(const bayes::PosteriorDensity& post,
                                         const std::vector<feasibility::ThetaCell>& cells,
                                         std::size_t per_cell_samples, const RngStream& rng,
                                         double chebyshev_epsilon = 0.005, std::size_t threads = 0) {
  if (per_cell_samples == 0) throw DomainError("pwa_confidence: per_cell_samples must be >= 1");
  ConfidenceEstimate e;
  e.method = Method::pwa;
  e.chebyshev_epsilon = chebyshev_epsilon;
  e.cells.resize(cells.size());
  parallel_for(cells.size(), threads, [&](std::size_t c) {
    const auto& cell = cells[c];
    CellMass cm{cell, 0.0, 0.0};
    if (cell.label != feasibility::CellLabel::infeasible && cell.volume() > 0.0) {
      RngStream r = rng.substream("pwa_cell", c);
      const Box box = cell.box();
      const auto n = static_cast<double>(per_cell_samples);
      double s1 = 0.0, s2 = 0.0;
      for (std::size_t i = 0; i < per_cell_samples; ++i) {
        const Vector theta = r.uniform_in(box);
        const double k = post.support().contains(theta) ? post.density(theta) : 0.0;
        s1 += k;
        s2 += k * k;
      }
      const double mean = s1 / n;
      const double var = per_cell_samples > 1 ? std::max(0.0, (s2 - n * mean * mean) / (n - 1.0)) : 0.0;
      const double V = cell.volume();
      cm.mass = V * mean;
      cm.variance = V * V * var / n;
    }
    e.cells[c] = std::move(cm);
  });
  for (const auto& cm : e.cells) {
    e.region_volume += cm.cell.volume();
    if (cm.cell.label == feasibility::CellLabel::feasible) {
      e.value += cm.mass;
      e.variance_estimate += cm.variance;
      e.samples += per_cell_samples;
    } else if (cm.cell.label == feasibility::CellLabel::unknown) {
      e.unknown_mass += cm.mass;
    }
  }
  if (e.samples == 0) e.samples = 1;
  e.chebyshev_probability = chebyshev_probability(e.variance_estimate, e.chebyshev_epsilon);
  return e;
}

}  // namespace stlconf::confidence
