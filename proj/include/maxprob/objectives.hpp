#pragma once

// Objective functions comparing a model event M with an oracle event M*,
// both known only through their conditionals on V, and their gradients with
// respect to the model's log-probabilities.
//
// Gradients are taken with respect to unnormalized log-probabilities of the
// model, i.e. they already include the normalization term. Every gradient is
// therefore the difference of two probability vectors and sums to zero;
// under softmax-logits it equals the parameter gradient directly.
//
// Reported values omit theta-independent constants that the framework never
// pins down (P(M*), P(M, M*)); their names are listed in
// ObjectiveValue::dropped_constant_terms. Both intersection variants carry
// the additive constant +(1/alpha) * log|R(V)|, which turns the soft model
// probability under a uniform prior into -(1/alpha) log sum_v P(v|M)^alpha.

#include <optional>
#include <string>
#include <vector>

#include "maxprob/distspace.hpp"

namespace maxprob {

enum class ObjectiveKind { Likelihood, Intersection };
enum class Assumption { CondIndependent, OracleSubset };

struct ObjectiveConfig {
  ObjectiveKind kind = ObjectiveKind::Likelihood;
  Assumption assumption = Assumption::CondIndependent;
  double alpha = 1.0;
  FiniteDistribution prior;

  // Throws NonPositiveAlpha.
  void validate() const;
};

struct ObjectiveValue {
  double value = 0.0;
  std::vector<std::string> dropped_constant_terms;
};

struct GradientVector {
  std::vector<double> d_logp;
  std::optional<std::vector<double>> d_theta;
};

// d_logp == positive - negative, entrywise. Both terms are probability
// vectors, which is what makes the gradient Monte-Carlo estimable.
struct GradientTerms {
  FiniteDistribution positive;
  FiniteDistribution negative;

  GradientVector difference() const;
};

// P(v | M, M*) proportional to P(v|M) P(v|M*) / P(v), assuming M and M* are
// independent given V. Outcomes with zero prior mass are excluded.
FiniteDistribution posterior_given_both(const FiniteDistribution& model,
                                        const FiniteDistribution& oracle,
                                        const FiniteDistribution& prior);

// Normalized (P(v|M) / P(v))^alpha; equals alpha_skeleton(model, alpha) for
// a uniform prior.
FiniteDistribution prior_weighted_skeleton(const FiniteDistribution& model,
                                           const FiniteDistribution& prior, double alpha);

ObjectiveValue likelihood_value(const FiniteDistribution& model,
                                const FiniteDistribution& oracle,
                                const FiniteDistribution& prior);
GradientVector likelihood_gradient(const FiniteDistribution& model,
                                   const FiniteDistribution& oracle,
                                   const FiniteDistribution& prior);

ObjectiveValue intersection_value(const FiniteDistribution& model,
                                  const FiniteDistribution& oracle,
                                  const FiniteDistribution& prior, double alpha);
GradientVector intersection_gradient(const FiniteDistribution& model,
                                     const FiniteDistribution& oracle,
                                     const FiniteDistribution& prior, double alpha);

// Oracle-subset assumption (M* inside M): soft MP bound of M* with the model
// conditional in the role of the prior,
//   -(1/alpha) logsumexp_{v in supp(M*)} -alpha (log P(v|M) - log P(v|M*)).
ObjectiveValue subset_likelihood_value(const FiniteDistribution& model,
                                       const FiniteDistribution& oracle, double alpha);
GradientVector subset_likelihood_gradient(const FiniteDistribution& model,
                                          const FiniteDistribution& oracle, double alpha);

ObjectiveValue subset_intersection_value(const FiniteDistribution& model,
                                         const FiniteDistribution& oracle,
                                         const FiniteDistribution& prior, double alpha);
GradientVector subset_intersection_gradient(const FiniteDistribution& model,
                                            const FiniteDistribution& oracle,
                                            const FiniteDistribution& prior, double alpha);

// Model mass outside the set of outcomes maximizing P(v|M*) / P(v). Zero
// exactly when the model sits on a global maximizer of the likelihood.
double likelihood_concentration_residual(const FiniteDistribution& model,
                                         const FiniteDistribution& oracle,
                                         const FiniteDistribution& prior);

// Dispatch on ObjectiveConfig.
ObjectiveValue evaluate(const ObjectiveConfig& cfg, const FiniteDistribution& model,
                        const FiniteDistribution& oracle);
GradientTerms gradient_terms(const ObjectiveConfig& cfg, const FiniteDistribution& model,
                             const FiniteDistribution& oracle);
GradientVector gradient(const ObjectiveConfig& cfg, const FiniteDistribution& model,
                        const FiniteDistribution& oracle);

std::string to_string(ObjectiveKind kind);
std::string to_string(Assumption assumption);
ObjectiveKind parse_objective_kind(const std::string& s);
Assumption parse_assumption(const std::string& s);

}  // namespace maxprob
