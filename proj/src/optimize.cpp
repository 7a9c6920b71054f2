#include "maxprob/optimize.hpp"

#include <algorithm>
#include <cmath>

#include "maxprob/error.hpp"
#include "maxprob/rng.hpp"

namespace maxprob {

namespace {

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void AscentConfig::validate() const {
  if (!(step_size > 0.0)) throw Error(ErrorCode::InvalidArgument, "step size must be > 0");
  if (max_iters < 1) throw Error(ErrorCode::InvalidArgument, "max_iters must be >= 1");
  if (!(grad_tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "grad_tol must be >= 0");
}

std::string to_string(AscentStatus s) {
  switch (s) {
    case AscentStatus::Converged: return "converged";
    case AscentStatus::MaxIters: return "max_iters";
    case AscentStatus::Diverged: return "diverged";
  }
  return "unknown";
}

ParamObjective::ParamObjective(ObjectiveConfig cfg, FiniteDistribution oracle,
                               Parameterization p)
    : cfg_(std::move(cfg)), oracle_(std::move(oracle)), param_(std::move(p)) {
  cfg_.validate();
  require_same_range(cfg_.prior, oracle_);
  if (!(param_.range() == oracle_.range()))
    throw Error(ErrorCode::RangeMismatch, "parameterization and oracle use different ranges");
}

double ParamObjective::value(std::span<const double> theta) const {
  return evaluate(cfg_, model(theta), oracle_).value;
}

GradientVector ParamObjective::gradient(std::span<const double> theta) const {
  GradientVector g = maxprob::gradient(cfg_, model(theta), oracle_);
  g.d_theta = param_.pullback(theta, g.d_logp);
  return g;
}

AscentTrace ascend(const ObjectiveConfig& objective, const FiniteDistribution& oracle,
                   const Parameterization& p, std::vector<double> theta0,
                   const AscentConfig& cfg) {
  cfg.validate();
  const ParamObjective f(objective, oracle, p);
  std::vector<double> theta = std::move(theta0);
  AscentTrace trace;
  trace.status = AscentStatus::MaxIters;

  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    const double value = f.value(theta);
    if (std::isnan(value)) {
      trace.records.push_back({theta, value, std::nan("")});
      trace.status = AscentStatus::Diverged;
      break;
    }
    const GradientVector g = f.gradient(theta);
    const std::vector<double>& d_theta = *g.d_theta;
    if (!all_finite(d_theta))
      throw Error(ErrorCode::NonFiniteEncountered,
                  "gradient became non-finite at iteration " + std::to_string(it));
    const double norm = inf_norm(d_theta);
    if (!trace.records.empty()) {
      const double prev = trace.records.back().value;
      if (value < prev - 1e-12 * (1.0 + std::abs(prev))) trace.monotone = false;
    }
    trace.records.push_back({theta, value, norm});
    if (norm <= cfg.grad_tol) {
      trace.status = AscentStatus::Converged;
      break;
    }
    for (std::size_t k = 0; k < theta.size(); ++k) theta[k] += cfg.step_size * d_theta[k];
    if (inf_norm(theta) > kDivergenceThreshold) {
      trace.status = AscentStatus::Diverged;
      break;
    }
  }
  return trace;
}

std::size_t inverse_cdf_sample(const FiniteDistribution& dist, double u) {
  double cdf = 0.0;
  std::size_t last_supported = 0;
  for (std::size_t v = 0; v < dist.size(); ++v) {
    if (!dist.supported(v)) continue;
    last_supported = v;
    cdf += dist.prob(v);
    if (u < cdf) return v;
  }
  // Rounding left the total just under one.
  return last_supported;
}

GradientVector mc_gradient(const ObjectiveConfig& objective, const FiniteDistribution& oracle,
                           const Parameterization& p, std::span<const double> theta,
                           std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw Error(ErrorCode::InvalidArgument, "n_samples must be >= 1");
  const FiniteDistribution model = p.apply(theta);
  const GradientTerms terms = gradient_terms(objective, model, oracle);

  Rng rng(seed);
  std::vector<std::size_t> pos_counts(model.size(), 0), neg_counts(model.size(), 0);
  for (std::size_t i = 0; i < n_samples; ++i) ++pos_counts[inverse_cdf_sample(terms.positive, rng.uniform())];
  for (std::size_t i = 0; i < n_samples; ++i) ++neg_counts[inverse_cdf_sample(terms.negative, rng.uniform())];

  GradientVector g;
  g.d_logp.resize(model.size());
  const double n = static_cast<double>(n_samples);
  for (std::size_t v = 0; v < model.size(); ++v)
    g.d_logp[v] = static_cast<double>(pos_counts[v]) / n - static_cast<double>(neg_counts[v]) / n;
  g.d_theta = p.pullback(theta, g.d_logp);
  return g;
}

FiniteDifferenceReport finite_difference_check(const ParamObjective& objective,
                                               std::span<const double> theta, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "finite-difference step must be > 0");
  FiniteDifferenceReport report;
  report.analytic = *objective.gradient(theta).d_theta;
  std::vector<double> probe(theta.begin(), theta.end());
  report.numeric.resize(probe.size());
  for (std::size_t k = 0; k < probe.size(); ++k) {
    const double saved = probe[k];
    probe[k] = saved + h;
    const double up = objective.value(probe);
    probe[k] = saved - h;
    const double down = objective.value(probe);
    probe[k] = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw Error(ErrorCode::NonFiniteEncountered, "objective is not finite near theta");
    report.numeric[k] = (up - down) / (2.0 * h);
  }
  for (std::size_t k = 0; k < probe.size(); ++k) {
    const double an = report.analytic[k];
    const double fd = report.numeric[k];
    const double abs_err = std::abs(fd - an);
    report.max_abs_error = std::max(report.max_abs_error, abs_err);
    report.max_rel_error = std::max(
        report.max_rel_error, abs_err / std::max({1e-12, std::abs(an), std::abs(fd)}));
  }
  return report;
}

GridArgmax grid_argmax(const ThetaFunction& f, const std::vector<std::vector<double>>& grid) {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "grid is empty");
  GridArgmax best{grid.front(), f(grid.front()), 0};
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v > best.value || (std::isnan(best.value) && !std::isnan(v))) best = {grid[i], v, i};
  }
  return best;
}

std::vector<double> linear_grid(double min, double max, double step) {
  if (!(step > 0.0) || !(max > min))
    throw Error(ErrorCode::InvalidArgument, "grid needs step > 0 and max > min");
  const auto count = static_cast<std::size_t>(std::floor((max - min) / step + 0.5)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = min + static_cast<double>(i) * step;
  return out;
}

}  // namespace maxprob
