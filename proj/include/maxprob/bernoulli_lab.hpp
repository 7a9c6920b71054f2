#pragma once

// Objective surfaces for a Bernoulli variable with sigmoid-parameterized
// model and oracle: sweep theta over a grid for fixed theta*, locate the
// maximizer, and classify the shape of each curve.

#include <optional>
#include <string>
#include <vector>

#include "maxprob/distspace.hpp"
#include "maxprob/json_io.hpp"
#include "maxprob/objectives.hpp"

namespace maxprob {

struct SweepSpec {
  double theta_star = 0.0;
  double theta_min = -8.0;
  double theta_max = 8.0;
  double theta_step = 0.01;
  std::vector<double> alphas{1.0, 2.0, 4.0, 16.0, 256.0};
  Assumption assumption = Assumption::CondIndependent;
  std::vector<ObjectiveKind> objectives{ObjectiveKind::Likelihood, ObjectiveKind::Intersection};
  // Uniform over {0, 1} when unset.
  std::optional<FiniteDistribution> prior;

  void validate() const;
};

enum class CurveShape { UniqueInteriorMax, BoundaryMax, Plateau };
std::string to_string(CurveShape s);

struct SweepCurve {
  ObjectiveKind objective;
  double alpha;
  std::vector<double> values;  // one per grid point
  std::size_t argmax_index;
  double argmax_theta;
  double max_value;
  // max - min of the values over the middle half of the grid.
  double flatness;
};

struct SweepReport {
  SweepSpec spec;
  std::vector<double> thetas;
  std::vector<SweepCurve> curves;  // objectives-major, then alphas

  const SweepCurve& curve(ObjectiveKind objective, double alpha) const;
};

// The two-outcome range {"0", "1"} used by every sweep.
OutcomeRange bernoulli_range();

SweepReport run_sweep(const SweepSpec& spec);

inline constexpr double kPlateauTol = 1e-9;
inline constexpr std::size_t kPlateauRun = 5;

struct ShapeDiagnostic {
  ObjectiveKind objective;
  double alpha;
  CurveShape shape;
  // Grid span of points within kPlateauTol of the maximum.
  double near_max_lo;
  double near_max_hi;
};

// Plateau: at least kPlateauRun consecutive points within kPlateauTol of the
// maximum. Otherwise boundary-max if the maximum sits on a grid end, else
// unique-interior-max when both neighbours are strictly lower.
std::vector<ShapeDiagnostic> uniqueness_diagnostic(const SweepReport& report);

// CSV with header objective,assumption,alpha,theta,value.
std::string sweep_csv(const SweepReport& report);
// Argmax, flatness and shape per curve.
Json sweep_summary_json(const SweepReport& report);

}  // namespace maxprob
