#pragma once

// Fixed-step gradient ascent over parameterized models, Monte-Carlo gradient
// estimation, finite-difference checking and brute-force grid search.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "maxprob/distspace.hpp"
#include "maxprob/objectives.hpp"

namespace maxprob {

struct AscentConfig {
  double step_size = 0.1;
  std::size_t max_iters = 10000;
  double grad_tol = 1e-8;  // infinity norm of d_theta
  std::uint64_t seed = 0;

  void validate() const;
};

enum class AscentStatus { Converged, MaxIters, Diverged };
std::string to_string(AscentStatus s);

struct AscentRecord {
  std::vector<double> theta;
  double value;
  double grad_norm;
};

struct AscentTrace {
  std::vector<AscentRecord> records;
  AscentStatus status = AscentStatus::MaxIters;
  // False if any step lowered the objective.
  bool monotone = true;

  const AscentRecord& last() const { return records.back(); }
};

// An objective seen as a function of the model parameters.
class ParamObjective {
 public:
  ParamObjective(ObjectiveConfig cfg, FiniteDistribution oracle, Parameterization p);

  const ObjectiveConfig& config() const noexcept { return cfg_; }
  const FiniteDistribution& oracle() const noexcept { return oracle_; }
  const Parameterization& parameterization() const noexcept { return param_; }

  FiniteDistribution model(std::span<const double> theta) const { return param_.apply(theta); }
  double value(std::span<const double> theta) const;
  // d_logp plus d_theta through the parameterization Jacobian.
  GradientVector gradient(std::span<const double> theta) const;

 private:
  ObjectiveConfig cfg_;
  FiniteDistribution oracle_;
  Parameterization param_;
};

// theta <- theta + step * d_theta until the gradient infinity norm drops to
// grad_tol, max_iters gradient evaluations have been made, or the run
// diverges (|theta|_inf > 1e6 or a NaN objective). One record per gradient
// evaluation; the first record is theta0.
AscentTrace ascend(const ObjectiveConfig& objective, const FiniteDistribution& oracle,
                   const Parameterization& p, std::vector<double> theta0,
                   const AscentConfig& cfg);

inline constexpr double kDivergenceThreshold = 1e6;

// Draws n outcomes from the positive gradient term and then n from the
// negative term by inverse-CDF over the outcome order, using one generator
// seeded with `seed`. The estimate is the difference of the two empirical
// frequency vectors, mapped through the Jacobian into d_theta.
GradientVector mc_gradient(const ObjectiveConfig& objective, const FiniteDistribution& oracle,
                           const Parameterization& p, std::span<const double> theta,
                           std::size_t n_samples, std::uint64_t seed);

// Index of the first outcome whose cumulative probability exceeds u.
std::size_t inverse_cdf_sample(const FiniteDistribution& dist, double u);

struct FiniteDifferenceReport {
  std::vector<double> analytic;
  std::vector<double> numeric;
  double max_rel_error = 0.0;  // |fd - an| / max(1e-12, |an|, |fd|)
  double max_abs_error = 0.0;
};

FiniteDifferenceReport finite_difference_check(const ParamObjective& objective,
                                               std::span<const double> theta, double h = 1e-5);

struct GridArgmax {
  std::vector<double> theta;
  double value;
  std::size_t index;
};

using ThetaFunction = std::function<double(std::span<const double>)>;

// Exhaustive evaluation; ties resolve to the earliest grid point.
GridArgmax grid_argmax(const ThetaFunction& f, const std::vector<std::vector<double>>& grid);

// min, min+step, ... up to max (inclusive within half a step).
std::vector<double> linear_grid(double min, double max, double step);

}  // namespace maxprob
