#include "maxprob/mpbound.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "maxprob/error.hpp"
#include "maxprob/logspace.hpp"

namespace maxprob {

namespace {

constexpr double kMonotonicitySlack = 1e-12;
constexpr double kOracleMatchTol = 1e-9;

void require_positive_alpha(double alpha) {
  if (!(alpha > 0.0) || std::isnan(alpha))
    throw Error(ErrorCode::NonPositiveAlpha, "alpha must be > 0");
}

}  // namespace

BoundResult max_probability(const FiniteDistribution& prior,
                            const FiniteDistribution& conditional) {
  require_same_range(prior, conditional);
  BoundResult best{0.0, 0};
  bool found = false;
  for (std::size_t v = 0; v < conditional.size(); ++v) {
    if (!conditional.supported(v)) continue;
    const double term = prior.log_prob(v) - conditional.log_prob(v);
    if (!found || term < best.log_max_probability) {
      best = {term, v};
      found = true;
    }
  }
  return best;
}

double softmax_probability(const FiniteDistribution& prior,
                           const FiniteDistribution& conditional, double alpha) {
  require_same_range(prior, conditional);
  require_positive_alpha(alpha);
  std::vector<double> terms;
  terms.reserve(conditional.size());
  for (std::size_t v = 0; v < conditional.size(); ++v) {
    if (!conditional.supported(v)) continue;
    if (!prior.supported(v)) return kNegInf;
    terms.push_back(-alpha * (prior.log_prob(v) - conditional.log_prob(v)));
  }
  return -logsumexp(terms) / alpha;
}

FiniteDistribution alpha_skeleton(const FiniteDistribution& dist, double alpha) {
  if (std::isnan(alpha)) throw Error(ErrorCode::InvalidArgument, "alpha is NaN");
  if (alpha == 1.0) return dist;
  std::vector<double> logw(dist.size());
  for (std::size_t v = 0; v < dist.size(); ++v) {
    if (!dist.supported(v)) {
      if (alpha < 0.0)
        throw Error(ErrorCode::NegativeAlphaOnZeroMass,
                    "negative alpha needs a distribution with full support");
      logw[v] = kNegInf;
    } else {
      logw[v] = alpha * dist.log_prob(v);
    }
  }
  return FiniteDistribution::from_log_weights(dist.range(), logw);
}

MonotonicityCheck check_extension_monotonicity(const FiniteDistribution& prior_fine,
                                               const FiniteDistribution& conditional_fine,
                                               const Refinement& r) {
  require_same_range(prior_fine, conditional_fine);
  const double fine = max_probability(prior_fine, conditional_fine).log_max_probability;
  const double coarse =
      max_probability(coarsen(prior_fine, r), coarsen(conditional_fine, r)).log_max_probability;
  return {fine, coarse, fine <= coarse + kMonotonicitySlack};
}

FiniteDistribution induced_distribution(std::span<const double> atom_probs,
                                        std::span<const std::size_t> variable_map,
                                        const OutcomeRange& range) {
  if (atom_probs.size() != variable_map.size())
    throw Error(ErrorCode::DimensionMismatch, "atom probabilities and variable map differ in size");
  std::vector<double> mass(range.size(), 0.0);
  for (std::size_t a = 0; a < atom_probs.size(); ++a) {
    if (variable_map[a] >= range.size())
      throw Error(ErrorCode::LabelOutOfRange, "variable map points outside the range");
    mass[variable_map[a]] += atom_probs[a];
  }
  return make_distribution(range, mass);
}

std::optional<double> exhaustive_bound_oracle(std::span<const double> atom_probs,
                                              std::span<const std::size_t> variable_map,
                                              const FiniteDistribution& conditional) {
  const std::size_t n = atom_probs.size();
  if (n > kMaxOracleAtoms)
    throw Error(ErrorCode::SpaceTooLarge,
                "sample space of " + std::to_string(n) + " atoms is too large to enumerate");
  // Validates the atom distribution and the map.
  (void)induced_distribution(atom_probs, variable_map, conditional.range());

  const std::vector<double> target = conditional.probs();
  std::vector<double> mass(target.size());
  std::optional<double> best;
  const std::uint64_t subsets = std::uint64_t{1} << n;
  for (std::uint64_t mask = 1; mask < subsets; ++mask) {
    std::fill(mass.begin(), mass.end(), 0.0);
    double total = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      if (mask & (std::uint64_t{1} << a)) {
        mass[variable_map[a]] += atom_probs[a];
        total += atom_probs[a];
      }
    }
    if (total <= 0.0) continue;
    bool match = true;
    for (std::size_t v = 0; v < target.size() && match; ++v)
      match = std::abs(mass[v] / total - target[v]) <= kOracleMatchTol;
    if (match && (!best || total > *best)) best = total;
  }
  return best;
}

}  // namespace maxprob
