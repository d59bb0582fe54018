#pragma once

#include "stlconf/core.hpp"

#include <cmath>
#include <numbers>

namespace stlconf::decomp {

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Φ(x), accurate in both tails.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Standard normal quantile Φ⁻¹(p) for p ∈ (0, 1).
///
/// Acklam's rational approximation (relative error ~1e-9) followed by one
/// Halley step against erfc, which brings it to within a few ulps.
inline double gaussian_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("gaussian_quantile: argument must lie in (0, 1)");

  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley refinement; the residual is taken from whichever tail keeps precision.
  // Both branches compute Φ(x) - p.
  const double e = x < 0.0 ? normal_cdf(x) - p : (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

/// q(x) = (1/π) ∫_{-x}^{x} e^{-t²} dt = erf(x)/√π, the normalization used by
/// the literal variance-times-quantile margin. Its range is (-1/√π, 1/√π).
inline double literal_q(double x) { return std::erf(x) / std::sqrt(std::numbers::pi); }

/// Inverse of literal_q. Defined for |y| < 1/√π.
inline double literal_q_inverse(double y) {
  const double target = y * std::sqrt(std::numbers::pi);  // erf(x) = target
  if (!(std::abs(target) < 1.0)) {
    throw DomainError("literal_q_inverse: argument must satisfy |y| < 1/sqrt(pi)");
  }
  if (target == 0.0) return 0.0;
  // erf⁻¹(z) = Φ⁻¹((1+z)/2)/√2 as a starting point, then Newton on erf.
  double x = gaussian_quantile(0.5 * (1.0 + target)) / std::numbers::sqrt2;
  for (int it = 0; it < 4; ++it) {
    const double err = std::erf(x) - target;
    x -= err / (2.0 / std::sqrt(std::numbers::pi) * std::exp(-x * x));
  }
  return x;
}

}  // namespace stlconf::decomp
