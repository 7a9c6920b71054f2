#pragma once

// Finite outcome ranges, log-space distributions over them, refinements
// between random variables, and parameterized event models.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace maxprob {

// Ordered, non-empty list of distinct outcome labels. The order is part of
// the type: every probability vector in the library indexes by it.
class OutcomeRange {
 public:
  explicit OutcomeRange(std::vector<std::string> labels);

  // Labels "0", "1", ..., "n-1".
  static OutcomeRange indexed(std::size_t n);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::optional<std::size_t> index_of(std::string_view label) const;

  bool operator==(const OutcomeRange&) const = default;

 private:
  std::vector<std::string> labels_;
};

class Refinement;

// Probability vector over an OutcomeRange, stored as natural-log
// probabilities. Zero mass is always exactly kNegInf.
class FiniteDistribution {
 public:
  // Validates and normalizes linear-space masses. Sums within 1e-9 of one
  // are renormalized silently; anything further off is rejected.
  static FiniteDistribution from_probs(OutcomeRange range,
                                       std::span<const double> probs);

  // Normalizes arbitrary log-weights (entries may be kNegInf, at least one
  // must be finite). Used by transforms that produce unnormalized masses.
  static FiniteDistribution from_log_weights(OutcomeRange range,
                                             std::span<const double> log_weights);

  static FiniteDistribution uniform(OutcomeRange range);
  static FiniteDistribution degenerate(OutcomeRange range, std::size_t index);

  const OutcomeRange& range() const noexcept { return range_; }
  std::size_t size() const noexcept { return logp_.size(); }
  std::span<const double> logp() const noexcept { return logp_; }
  double log_prob(std::size_t i) const { return logp_.at(i); }
  double prob(std::size_t i) const;
  bool supported(std::size_t i) const;
  std::vector<double> probs() const;

 private:
  FiniteDistribution(OutcomeRange range, std::vector<double> logp)
      : range_(std::move(range)), logp_(std::move(logp)) {}
  friend FiniteDistribution coarsen(const FiniteDistribution&, const Refinement&);

  OutcomeRange range_;
  std::vector<double> logp_;
};

FiniteDistribution make_distribution(OutcomeRange range,
                                     std::span<const double> probs);

// Throws RangeMismatch unless both distributions index the same range.
void require_same_range(const FiniteDistribution& a, const FiniteDistribution& b);

// Surjective map from the outcomes of a fine variable W onto the outcomes of
// a coarse variable V. Every preimage of W then lies inside exactly one
// preimage of V, which is what "W extends V" means.
class Refinement {
 public:
  Refinement(OutcomeRange fine, OutcomeRange coarse,
             std::vector<std::size_t> projection);

  static Refinement identity(const OutcomeRange& range);

  const OutcomeRange& fine_range() const noexcept { return fine_; }
  const OutcomeRange& coarse_range() const noexcept { return coarse_; }
  std::size_t project(std::size_t fine_index) const { return projection_.at(fine_index); }
  std::span<const std::size_t> projection() const noexcept { return projection_; }

 private:
  OutcomeRange fine_;
  OutcomeRange coarse_;
  std::vector<std::size_t> projection_;
};

// Marginalizes a distribution on the fine range onto the coarse range.
FiniteDistribution coarsen(const FiniteDistribution& dist, const Refinement& r);

// Dense row-major matrix of d log P(v_i) / d theta_j.
struct Jacobian {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

enum class ParamKind { SigmoidBernoulli, SoftmaxLogits };

// Deterministic map from a parameter vector to a conditional distribution.
// For SigmoidBernoulli the range has two outcomes and the second one is the
// "success" outcome: P(range[1]) = 1 / (1 + exp(-theta)).
class Parameterization {
 public:
  static Parameterization sigmoid_bernoulli(OutcomeRange range);
  static Parameterization softmax_logits(OutcomeRange range);

  ParamKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  const OutcomeRange& range() const noexcept { return range_; }

  FiniteDistribution apply(std::span<const double> theta) const;
  Jacobian jacobian(std::span<const double> theta) const;

  // Chain rule: returns J^T * d_logp, the gradient with respect to theta.
  std::vector<double> pullback(std::span<const double> theta,
                               std::span<const double> d_logp) const;

 private:
  Parameterization(ParamKind kind, std::size_t dim, OutcomeRange range)
      : kind_(kind), dim_(dim), range_(std::move(range)) {}

  void check_theta(std::span<const double> theta) const;

  ParamKind kind_;
  std::size_t dim_;
  OutcomeRange range_;
};

FiniteDistribution apply_parameterization(const Parameterization& p,
                                          std::span<const double> theta);
Jacobian parameterization_jacobian(const Parameterization& p,
                                   std::span<const double> theta);

// An event known only through its conditional distribution P(V | event).
// When parameterized, the conditional is always p.apply(params); updates
// return a new model.
class EventModel {
 public:
  explicit EventModel(FiniteDistribution conditional)
      : conditional_(std::move(conditional)) {}
  EventModel(Parameterization p, std::vector<double> params);

  const FiniteDistribution& conditional() const noexcept { return conditional_; }
  const std::optional<std::vector<double>>& params() const noexcept { return params_; }
  const std::optional<Parameterization>& parameterization() const noexcept {
    return parameterization_;
  }

  EventModel with_params(std::vector<double> params) const;

 private:
  FiniteDistribution conditional_;
  std::optional<std::vector<double>> params_;
  std::optional<Parameterization> parameterization_;
};

}  // namespace maxprob
