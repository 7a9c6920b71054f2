#pragma once

// Upper bounds on the probability of an event that is observed only through
// its conditional distribution on a finite random variable V.
//
//   P(sigma) <= inf_v P(v) / P(v | sigma)
//
// plus the smooth lower family P_alpha, the alpha-skeleton transform, and a
// brute-force oracle over explicit sample spaces.

#include <cstddef>
#include <optional>
#include <span>

#include "maxprob/distspace.hpp"

namespace maxprob {

struct BoundResult {
  double log_max_probability;  // in [-inf, 0]
  std::size_t argmin_outcome;  // lowest index achieving the infimum
};

// Exact bound. Outcomes with zero conditional mass impose no constraint and
// are skipped; an outcome with conditional mass but zero prior mass forces
// the bound to zero.
BoundResult max_probability(const FiniteDistribution& prior,
                            const FiniteDistribution& conditional);

// log P_alpha = -(1/alpha) * logsumexp_{v in supp(conditional)}
//               -alpha * (log P(v) - log P(v | sigma)).
// Never exceeds the exact bound and converges to it as alpha grows.
double softmax_probability(const FiniteDistribution& prior,
                           const FiniteDistribution& conditional, double alpha);

// P(v)^alpha / sum P(v')^alpha. alpha = 0 gives the uniform distribution on
// the support; alpha < 0 requires full support.
FiniteDistribution alpha_skeleton(const FiniteDistribution& dist, double alpha);

struct MonotonicityCheck {
  double log_bound_fine;
  double log_bound_coarse;
  bool holds;
};

// Evaluates the bound on the fine variable and on its coarsening. Refining
// the observer can only tighten the bound, so `holds` is expected true.
MonotonicityCheck check_extension_monotonicity(const FiniteDistribution& prior_fine,
                                               const FiniteDistribution& conditional_fine,
                                               const Refinement& r);

inline constexpr std::size_t kMaxOracleAtoms = 20;

// Enumerates every event (subset of atoms) of an explicit sample space and
// returns the largest probability among events whose induced conditional on
// V matches `conditional` within 1e-9 per outcome. nullopt if none match.
// variable_map[a] is the outcome index of atom a in conditional.range().
std::optional<double> exhaustive_bound_oracle(std::span<const double> atom_probs,
                                              std::span<const std::size_t> variable_map,
                                              const FiniteDistribution& conditional);

// Distribution of V induced by the atom probabilities.
FiniteDistribution induced_distribution(std::span<const double> atom_probs,
                                        std::span<const std::size_t> variable_map,
                                        const OutcomeRange& range);

}  // namespace maxprob
