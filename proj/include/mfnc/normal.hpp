#pragma once

#include <cmath>

#include <boost/math/special_functions/erf.hpp>

namespace mfnc {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Phi^{-1}(p) for p in (0, 1).
inline double normal_quantile(double p) {
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

/// Quantile from whichever tail mass is smaller, to keep precision when the
/// lower-tail probability is close to 1.
inline double normal_quantile_tails(double lower, double upper) {
  return lower <= upper ? normal_quantile(lower) : -normal_quantile(upper);
}

}  // namespace mfnc
