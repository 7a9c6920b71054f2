#include "maxprob/distspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "maxprob/error.hpp"
#include "maxprob/logspace.hpp"

namespace maxprob {

namespace {

constexpr double kRenormTol = 1e-9;

double log_sigmoid(double x) {
  // log(1 / (1 + e^{-x})) without overflow for large |x|.
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

}  // namespace

OutcomeRange::OutcomeRange(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
  if (labels_.empty()) throw Error(ErrorCode::EmptyRange, "outcome range is empty");
  std::unordered_set<std::string> seen;
  for (const auto& l : labels_) {
    if (!seen.insert(l).second)
      throw Error(ErrorCode::DuplicateLabel, "duplicate outcome label '" + l + "'");
  }
}

OutcomeRange OutcomeRange::indexed(std::size_t n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  return OutcomeRange(std::move(labels));
}

std::optional<std::size_t> OutcomeRange::index_of(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

FiniteDistribution FiniteDistribution::from_probs(OutcomeRange range,
                                                  std::span<const double> probs) {
  if (probs.size() != range.size())
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(range.size()) + " probabilities, got " +
                    std::to_string(probs.size()));
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p)) throw Error(ErrorCode::NonFiniteParameter, "non-finite probability");
    if (p < 0.0) throw Error(ErrorCode::NegativeMass, "negative probability mass");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRenormTol)
    throw Error(ErrorCode::SumOutOfTolerance,
                "probabilities sum to " + std::to_string(sum));
  std::vector<double> logp(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    logp[i] = probs[i] == 0.0 ? kNegInf : std::log(probs[i] / sum);
  return FiniteDistribution(std::move(range), std::move(logp));
}

FiniteDistribution FiniteDistribution::from_log_weights(OutcomeRange range,
                                                        std::span<const double> log_weights) {
  if (log_weights.size() != range.size())
    throw Error(ErrorCode::DimensionMismatch, "log-weight vector does not match range");
  for (double w : log_weights) {
    if (std::isnan(w) || w == std::numeric_limits<double>::infinity())
      throw Error(ErrorCode::NonFiniteEncountered, "log-weight is NaN or +inf");
  }
  const double norm = logsumexp(log_weights);
  if (norm == kNegInf)
    throw Error(ErrorCode::InvalidArgument, "all log-weights are -inf");
  std::vector<double> logp(log_weights.size());
  for (std::size_t i = 0; i < logp.size(); ++i)
    logp[i] = log_weights[i] == kNegInf ? kNegInf : log_weights[i] - norm;
  return FiniteDistribution(std::move(range), std::move(logp));
}

FiniteDistribution FiniteDistribution::uniform(OutcomeRange range) {
  const double lp = -std::log(static_cast<double>(range.size()));
  std::vector<double> logp(range.size(), lp);
  return FiniteDistribution(std::move(range), std::move(logp));
}

FiniteDistribution FiniteDistribution::degenerate(OutcomeRange range, std::size_t index) {
  if (index >= range.size()) throw Error(ErrorCode::LabelOutOfRange, "outcome index out of range");
  std::vector<double> logp(range.size(), kNegInf);
  logp[index] = 0.0;
  return FiniteDistribution(std::move(range), std::move(logp));
}

double FiniteDistribution::prob(std::size_t i) const {
  const double lp = logp_.at(i);
  return lp == kNegInf ? 0.0 : std::exp(lp);
}

bool FiniteDistribution::supported(std::size_t i) const { return logp_.at(i) != kNegInf; }

std::vector<double> FiniteDistribution::probs() const {
  std::vector<double> out(logp_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = prob(i);
  return out;
}

FiniteDistribution make_distribution(OutcomeRange range, std::span<const double> probs) {
  return FiniteDistribution::from_probs(std::move(range), probs);
}

void require_same_range(const FiniteDistribution& a, const FiniteDistribution& b) {
  if (!(a.range() == b.range()))
    throw Error(ErrorCode::RangeMismatch, "distributions are defined on different ranges");
}

Refinement::Refinement(OutcomeRange fine, OutcomeRange coarse,
                       std::vector<std::size_t> projection)
    : fine_(std::move(fine)), coarse_(std::move(coarse)), projection_(std::move(projection)) {
  if (projection_.size() != fine_.size())
    throw Error(ErrorCode::DimensionMismatch, "projection must map every fine outcome");
  std::vector<bool> hit(coarse_.size(), false);
  for (std::size_t c : projection_) {
    if (c >= coarse_.size())
      throw Error(ErrorCode::LabelOutOfRange, "projection target outside coarse range");
    hit[c] = true;
  }
  if (std::find(hit.begin(), hit.end(), false) != hit.end())
    throw Error(ErrorCode::NotSurjective, "projection does not cover the coarse range");
}

Refinement Refinement::identity(const OutcomeRange& range) {
  std::vector<std::size_t> proj(range.size());
  for (std::size_t i = 0; i < proj.size(); ++i) proj[i] = i;
  return Refinement(range, range, std::move(proj));
}

FiniteDistribution coarsen(const FiniteDistribution& dist, const Refinement& r) {
  if (!(dist.range() == r.fine_range()))
    throw Error(ErrorCode::RangeMismatch, "distribution is not on the refinement's fine range");
  std::vector<std::vector<double>> buckets(r.coarse_range().size());
  for (std::size_t i = 0; i < dist.size(); ++i) buckets[r.project(i)].push_back(dist.log_prob(i));
  std::vector<double> logw(buckets.size());
  for (std::size_t c = 0; c < buckets.size(); ++c) logw[c] = logsumexp(buckets[c]);
  // A bijective projection only relabels; keep the masses bit-for-bit.
  if (r.coarse_range().size() == r.fine_range().size())
    return FiniteDistribution(r.coarse_range(), std::move(logw));
  return FiniteDistribution::from_log_weights(r.coarse_range(), logw);
}

Parameterization Parameterization::sigmoid_bernoulli(OutcomeRange range) {
  if (range.size() != 2)
    throw Error(ErrorCode::DimensionMismatch, "sigmoid-bernoulli needs a two-outcome range");
  return Parameterization(ParamKind::SigmoidBernoulli, 1, std::move(range));
}

Parameterization Parameterization::softmax_logits(OutcomeRange range) {
  const std::size_t d = range.size();
  return Parameterization(ParamKind::SoftmaxLogits, d, std::move(range));
}

void Parameterization::check_theta(std::span<const double> theta) const {
  if (theta.size() != dim_)
    throw Error(ErrorCode::DimensionMismatch,
                "parameter vector has dimension " + std::to_string(theta.size()) +
                    ", expected " + std::to_string(dim_));
  for (double t : theta)
    if (!std::isfinite(t)) throw Error(ErrorCode::NonFiniteParameter, "non-finite parameter");
}

FiniteDistribution Parameterization::apply(std::span<const double> theta) const {
  check_theta(theta);
  if (kind_ == ParamKind::SigmoidBernoulli) {
    const double logw[2] = {log_sigmoid(-theta[0]), log_sigmoid(theta[0])};
    return FiniteDistribution::from_log_weights(range_, logw);
  }
  return FiniteDistribution::from_log_weights(range_, theta);
}

Jacobian Parameterization::jacobian(std::span<const double> theta) const {
  const FiniteDistribution d = apply(theta);
  Jacobian j{range_.size(), dim_, std::vector<double>(range_.size() * dim_)};
  if (kind_ == ParamKind::SigmoidBernoulli) {
    const double p1 = d.prob(1);
    j.data[0] = -p1;
    j.data[1] = 1.0 - p1;
    return j;
  }
  for (std::size_t i = 0; i < j.rows; ++i)
    for (std::size_t k = 0; k < j.cols; ++k)
      j.data[i * j.cols + k] = (i == k ? 1.0 : 0.0) - d.prob(k);
  return j;
}

std::vector<double> Parameterization::pullback(std::span<const double> theta,
                                               std::span<const double> d_logp) const {
  if (d_logp.size() != range_.size())
    throw Error(ErrorCode::DimensionMismatch, "gradient does not match outcome range");
  const Jacobian j = jacobian(theta);
  std::vector<double> out(j.cols, 0.0);
  for (std::size_t i = 0; i < j.rows; ++i)
    for (std::size_t k = 0; k < j.cols; ++k) out[k] += j(i, k) * d_logp[i];
  return out;
}

FiniteDistribution apply_parameterization(const Parameterization& p,
                                          std::span<const double> theta) {
  return p.apply(theta);
}

Jacobian parameterization_jacobian(const Parameterization& p, std::span<const double> theta) {
  return p.jacobian(theta);
}

EventModel::EventModel(Parameterization p, std::vector<double> params)
    : conditional_(p.apply(params)),
      params_(std::move(params)),
      parameterization_(std::move(p)) {}

EventModel EventModel::with_params(std::vector<double> params) const {
  if (!parameterization_)
    throw Error(ErrorCode::InvalidArgument, "event model has no parameterization");
  return EventModel(*parameterization_, std::move(params));
}

}  // namespace maxprob
