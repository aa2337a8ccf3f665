#pragma once

#include <cmath>
#include <numbers>

namespace hwq {

// Standard normal helpers. Phi is evaluated through the C library erfc,
// which is accurate to a few ulp over the whole real line; the reference
// table in tests/ was produced by tools/oracles/normal_cdf_reference.py.

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// 1 - Phi(x) without cancellation for large x.
inline double normal_ccdf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Inverse of Phi; accurate to ~1e-15 (boost implementation).
double normal_quantile(double p);

}  // namespace hwq
