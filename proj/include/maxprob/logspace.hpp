#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace maxprob {

// Canonical log-space representation of zero mass.
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Max-shifted log(sum(exp(x))). Returns kNegInf for an empty input or when
// every entry is kNegInf; returns +inf if any entry is +inf.
inline double logsumexp(std::span<const double> x) {
  double hi = kNegInf;
  for (double v : x) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

}  // namespace maxprob
