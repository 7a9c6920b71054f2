#pragma once

// Hand-rolled generators for property tests.

#include <cmath>
#include <vector>

#include "maxprob/distspace.hpp"
#include "maxprob/rng.hpp"

namespace gen {

// Flat Dirichlet draw; with zero_rate > 0 some entries are zeroed, keeping at
// least one positive.
inline std::vector<double> simplex(maxprob::Rng& rng, std::size_t n, double zero_rate = 0.0) {
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& x : w) {
    x = -std::log(1.0 - rng.uniform());
    if (zero_rate > 0.0 && rng.uniform() < zero_rate) x = 0.0;
    total += x;
  }
  if (total == 0.0) {
    w[rng.index(n)] = 1.0;
    total = 1.0;
  }
  for (auto& x : w) x /= total;
  return w;
}

inline maxprob::FiniteDistribution dist(maxprob::Rng& rng, std::size_t n, double zero_rate = 0.0) {
  const auto p = simplex(rng, n, zero_rate);
  return maxprob::make_distribution(maxprob::OutcomeRange::indexed(n), p);
}

inline std::vector<double> vec(maxprob::Rng& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return v;
}

}  // namespace gen
