#include "maxprob/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "maxprob/error.hpp"
#include "maxprob/logspace.hpp"
#include "maxprob/mpbound.hpp"

namespace maxprob {

namespace {

constexpr double kArgmaxTieTol = 1e-12;

void require_positive_alpha(double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::NonPositiveAlpha, "alpha must be > 0");
}

void require_shared_range(const FiniteDistribution& model, const FiniteDistribution& oracle,
                          const FiniteDistribution& prior) {
  require_same_range(model, oracle);
  require_same_range(model, prior);
}

// log P(v|M) + log P(v|M*) - log P(v), with zero-prior outcomes excluded.
std::vector<double> joint_log_weights(const FiniteDistribution& model,
                                      const FiniteDistribution& oracle,
                                      const FiniteDistribution& prior) {
  std::vector<double> w(model.size(), kNegInf);
  for (std::size_t v = 0; v < w.size(); ++v) {
    if (!model.supported(v) || !oracle.supported(v) || !prior.supported(v)) continue;
    w[v] = model.log_prob(v) + oracle.log_prob(v) - prior.log_prob(v);
  }
  return w;
}

bool is_uniform(const FiniteDistribution& d) {
  const auto lp = d.logp();
  return std::all_of(lp.begin(), lp.end(), [&](double x) { return x == lp.front(); });
}

void require_oracle_inside_model(const FiniteDistribution& model,
                                 const FiniteDistribution& oracle) {
  require_same_range(model, oracle);
  for (std::size_t v = 0; v < model.size(); ++v)
    if (oracle.supported(v) && !model.supported(v))
      throw Error(ErrorCode::OracleSupportEscapesModel,
                  "oracle puts mass on '" + model.range().label(v) + "' where the model has none");
}

// Soft-min weights of the subset likelihood, i.e. d/dlogP(v|M) of its value.
FiniteDistribution subset_weights(const FiniteDistribution& model,
                                  const FiniteDistribution& oracle, double alpha) {
  std::vector<double> w(model.size(), kNegInf);
  for (std::size_t v = 0; v < w.size(); ++v)
    if (oracle.supported(v)) w[v] = -alpha * (model.log_prob(v) - oracle.log_prob(v));
  return FiniteDistribution::from_log_weights(model.range(), w);
}

double intersection_constant(std::size_t n, double alpha) {
  return std::log(static_cast<double>(n)) / alpha;
}

}  // namespace

void ObjectiveConfig::validate() const { require_positive_alpha(alpha); }

GradientVector GradientTerms::difference() const {
  require_same_range(positive, negative);
  GradientVector g;
  g.d_logp.resize(positive.size());
  for (std::size_t v = 0; v < positive.size(); ++v)
    g.d_logp[v] = positive.prob(v) - negative.prob(v);
  return g;
}

FiniteDistribution posterior_given_both(const FiniteDistribution& model,
                                        const FiniteDistribution& oracle,
                                        const FiniteDistribution& prior) {
  require_shared_range(model, oracle, prior);
  const std::vector<double> w = joint_log_weights(model, oracle, prior);
  if (std::all_of(w.begin(), w.end(), [](double x) { return x == kNegInf; }))
    throw Error(ErrorCode::EmptyIntersectionSupport,
                "model and oracle share no outcome with prior mass");
  return FiniteDistribution::from_log_weights(model.range(), w);
}

FiniteDistribution prior_weighted_skeleton(const FiniteDistribution& model,
                                           const FiniteDistribution& prior, double alpha) {
  require_same_range(model, prior);
  require_positive_alpha(alpha);
  if (is_uniform(prior)) return alpha_skeleton(model, alpha);
  std::vector<double> w(model.size(), kNegInf);
  for (std::size_t v = 0; v < w.size(); ++v) {
    if (!model.supported(v)) continue;
    if (!prior.supported(v))
      throw Error(ErrorCode::NonFiniteEncountered,
                  "model puts mass on '" + model.range().label(v) + "' which has zero prior mass");
    w[v] = alpha * (model.log_prob(v) - prior.log_prob(v));
  }
  return FiniteDistribution::from_log_weights(model.range(), w);
}

ObjectiveValue likelihood_value(const FiniteDistribution& model,
                                const FiniteDistribution& oracle,
                                const FiniteDistribution& prior) {
  require_shared_range(model, oracle, prior);
  return {logsumexp(joint_log_weights(model, oracle, prior)), {"log P(M*)"}};
}

GradientVector likelihood_gradient(const FiniteDistribution& model,
                                   const FiniteDistribution& oracle,
                                   const FiniteDistribution& prior) {
  return GradientTerms{posterior_given_both(model, oracle, prior), model}.difference();
}

ObjectiveValue intersection_value(const FiniteDistribution& model,
                                  const FiniteDistribution& oracle,
                                  const FiniteDistribution& prior, double alpha) {
  require_positive_alpha(alpha);
  ObjectiveValue out = likelihood_value(model, oracle, prior);
  out.value += softmax_probability(prior, model, alpha) + intersection_constant(model.size(), alpha);
  return out;
}

GradientVector intersection_gradient(const FiniteDistribution& model,
                                     const FiniteDistribution& oracle,
                                     const FiniteDistribution& prior, double alpha) {
  require_positive_alpha(alpha);
  return GradientTerms{posterior_given_both(model, oracle, prior),
                       prior_weighted_skeleton(model, prior, alpha)}
      .difference();
}

ObjectiveValue subset_likelihood_value(const FiniteDistribution& model,
                                       const FiniteDistribution& oracle, double alpha) {
  require_positive_alpha(alpha);
  require_oracle_inside_model(model, oracle);
  std::vector<double> terms;
  for (std::size_t v = 0; v < model.size(); ++v)
    if (oracle.supported(v)) terms.push_back(-alpha * (model.log_prob(v) - oracle.log_prob(v)));
  return {-logsumexp(terms) / alpha, {}};
}

GradientVector subset_likelihood_gradient(const FiniteDistribution& model,
                                          const FiniteDistribution& oracle, double alpha) {
  require_positive_alpha(alpha);
  require_oracle_inside_model(model, oracle);
  return GradientTerms{subset_weights(model, oracle, alpha), model}.difference();
}

ObjectiveValue subset_intersection_value(const FiniteDistribution& model,
                                         const FiniteDistribution& oracle,
                                         const FiniteDistribution& prior, double alpha) {
  require_same_range(model, prior);
  ObjectiveValue out = subset_likelihood_value(model, oracle, alpha);
  out.value += softmax_probability(prior, model, alpha) + intersection_constant(model.size(), alpha);
  return out;
}

GradientVector subset_intersection_gradient(const FiniteDistribution& model,
                                            const FiniteDistribution& oracle,
                                            const FiniteDistribution& prior, double alpha) {
  require_positive_alpha(alpha);
  require_oracle_inside_model(model, oracle);
  require_same_range(model, prior);
  return GradientTerms{subset_weights(model, oracle, alpha),
                       prior_weighted_skeleton(model, prior, alpha)}
      .difference();
}

double likelihood_concentration_residual(const FiniteDistribution& model,
                                         const FiniteDistribution& oracle,
                                         const FiniteDistribution& prior) {
  require_shared_range(model, oracle, prior);
  std::vector<double> log_ratio(model.size(), kNegInf);
  for (std::size_t v = 0; v < model.size(); ++v) {
    if (!oracle.supported(v)) continue;
    log_ratio[v] = prior.supported(v) ? oracle.log_prob(v) - prior.log_prob(v)
                                      : std::numeric_limits<double>::infinity();
  }
  const double best = *std::max_element(log_ratio.begin(), log_ratio.end());
  double residual = 0.0;
  for (std::size_t v = 0; v < model.size(); ++v) {
    const bool maximal = std::isinf(best) ? log_ratio[v] == best
                                          : log_ratio[v] >= best - kArgmaxTieTol;
    if (!maximal) residual += model.prob(v);
  }
  return residual;
}

ObjectiveValue evaluate(const ObjectiveConfig& cfg, const FiniteDistribution& model,
                        const FiniteDistribution& oracle) {
  cfg.validate();
  if (cfg.assumption == Assumption::CondIndependent) {
    return cfg.kind == ObjectiveKind::Likelihood
               ? likelihood_value(model, oracle, cfg.prior)
               : intersection_value(model, oracle, cfg.prior, cfg.alpha);
  }
  return cfg.kind == ObjectiveKind::Likelihood
             ? subset_likelihood_value(model, oracle, cfg.alpha)
             : subset_intersection_value(model, oracle, cfg.prior, cfg.alpha);
}

GradientTerms gradient_terms(const ObjectiveConfig& cfg, const FiniteDistribution& model,
                             const FiniteDistribution& oracle) {
  cfg.validate();
  const bool intersection = cfg.kind == ObjectiveKind::Intersection;
  if (cfg.assumption == Assumption::CondIndependent) {
    return {posterior_given_both(model, oracle, cfg.prior),
            intersection ? prior_weighted_skeleton(model, cfg.prior, cfg.alpha) : model};
  }
  require_oracle_inside_model(model, oracle);
  return {subset_weights(model, oracle, cfg.alpha),
          intersection ? prior_weighted_skeleton(model, cfg.prior, cfg.alpha) : model};
}

GradientVector gradient(const ObjectiveConfig& cfg, const FiniteDistribution& model,
                        const FiniteDistribution& oracle) {
  return gradient_terms(cfg, model, oracle).difference();
}

std::string to_string(ObjectiveKind kind) {
  return kind == ObjectiveKind::Likelihood ? "likelihood" : "intersection";
}

std::string to_string(Assumption assumption) {
  return assumption == Assumption::CondIndependent ? "cond-independent" : "oracle-subset";
}

ObjectiveKind parse_objective_kind(const std::string& s) {
  if (s == "likelihood") return ObjectiveKind::Likelihood;
  if (s == "intersection") return ObjectiveKind::Intersection;
  throw Error(ErrorCode::InvalidArgument, "unknown objective '" + s + "'");
}

Assumption parse_assumption(const std::string& s) {
  if (s == "cond-independent" || s == "independent") return Assumption::CondIndependent;
  if (s == "oracle-subset" || s == "subset") return Assumption::OracleSubset;
  throw Error(ErrorCode::InvalidArgument, "unknown assumption '" + s + "'");
}

}  // namespace maxprob
