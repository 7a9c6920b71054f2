#include "maxprob/bernoulli_lab.hpp"

#include <algorithm>
#include <cmath>

#include "maxprob/error.hpp"
#include "maxprob/optimize.hpp"

namespace maxprob {

void SweepSpec::validate() const {
  if (!std::isfinite(theta_star)) throw Error(ErrorCode::NonFiniteParameter, "theta* must be finite");
  if (!(theta_step > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid step must be > 0");
  if (!(theta_max > theta_min)) throw Error(ErrorCode::InvalidArgument, "grid is degenerate");
  if (alphas.empty()) throw Error(ErrorCode::InvalidArgument, "no alpha values given");
  for (double a : alphas)
    if (!(a > 0.0)) throw Error(ErrorCode::NonPositiveAlpha, "alpha must be > 0");
  if (objectives.empty()) throw Error(ErrorCode::InvalidArgument, "no objectives given");
  if (prior && !(prior->range() == bernoulli_range()))
    throw Error(ErrorCode::RangeMismatch, "prior must be on the range {0, 1}");
}

std::string to_string(CurveShape s) {
  switch (s) {
    case CurveShape::UniqueInteriorMax: return "unique-interior-max";
    case CurveShape::BoundaryMax: return "boundary-max";
    case CurveShape::Plateau: return "plateau";
  }
  return "unknown";
}

const SweepCurve& SweepReport::curve(ObjectiveKind objective, double alpha) const {
  for (const auto& c : curves)
    if (c.objective == objective && c.alpha == alpha) return c;
  throw Error(ErrorCode::InvalidArgument, "sweep has no such curve");
}

OutcomeRange bernoulli_range() { return OutcomeRange({"0", "1"}); }

SweepReport run_sweep(const SweepSpec& spec) {
  spec.validate();
  const OutcomeRange range = bernoulli_range();
  const Parameterization sigmoid = Parameterization::sigmoid_bernoulli(range);
  const double theta_star[1] = {spec.theta_star};
  const FiniteDistribution oracle = sigmoid.apply(theta_star);
  const FiniteDistribution prior = spec.prior.value_or(FiniteDistribution::uniform(range));

  SweepReport report{spec, linear_grid(spec.theta_min, spec.theta_max, spec.theta_step), {}};
  const std::size_t n = report.thetas.size();
  for (ObjectiveKind kind : spec.objectives) {
    for (double alpha : spec.alphas) {
      const ObjectiveConfig cfg{kind, spec.assumption, alpha, prior};
      SweepCurve c{kind, alpha, std::vector<double>(n), 0, 0.0, 0.0, 0.0};
      for (std::size_t i = 0; i < n; ++i) {
        const double theta[1] = {report.thetas[i]};
        c.values[i] = evaluate(cfg, sigmoid.apply(theta), oracle).value;
      }
      c.argmax_index = static_cast<std::size_t>(
          std::max_element(c.values.begin(), c.values.end()) - c.values.begin());
      c.argmax_theta = report.thetas[c.argmax_index];
      c.max_value = c.values[c.argmax_index];
      const auto mid_lo = c.values.begin() + static_cast<std::ptrdiff_t>(n / 4);
      const auto mid_hi = c.values.begin() + static_cast<std::ptrdiff_t>(n - n / 4);
      const auto [lo, hi] = std::minmax_element(mid_lo, mid_hi);
      c.flatness = *hi - *lo;
      report.curves.push_back(std::move(c));
    }
  }
  return report;
}

std::vector<ShapeDiagnostic> uniqueness_diagnostic(const SweepReport& report) {
  std::vector<ShapeDiagnostic> out;
  for (const auto& c : report.curves) {
    const std::size_t n = c.values.size();
    std::size_t longest = 0, run = 0;
    std::size_t first_near = n, last_near = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (c.values[i] >= c.max_value - kPlateauTol) {
        ++run;
        longest = std::max(longest, run);
        first_near = std::min(first_near, i);
        last_near = i;
      } else {
        run = 0;
      }
    }
    CurveShape shape;
    const std::size_t k = c.argmax_index;
    if (longest >= kPlateauRun) {
      shape = CurveShape::Plateau;
    } else if (k == 0 || k + 1 == n) {
      shape = CurveShape::BoundaryMax;
    } else if (c.values[k - 1] < c.max_value && c.values[k + 1] < c.max_value) {
      shape = CurveShape::UniqueInteriorMax;
    } else {
      shape = CurveShape::Plateau;
    }
    out.push_back({c.objective, c.alpha, shape, report.thetas[first_near],
                   report.thetas[last_near]});
  }
  return out;
}

std::string sweep_csv(const SweepReport& report) {
  std::string out = "objective,assumption,alpha,theta,value\n";
  const std::string assumption = to_string(report.spec.assumption);
  for (const auto& c : report.curves) {
    const std::string prefix = to_string(c.objective) + "," + assumption + "," + format_real(c.alpha) + ",";
    for (std::size_t i = 0; i < c.values.size(); ++i) {
      out += prefix;
      out += format_real(report.thetas[i]);
      out += ',';
      out += std::isfinite(c.values[i]) ? format_real(c.values[i]) : (c.values[i] < 0 ? "-inf" : "nan");
      out += '\n';
    }
  }
  return out;
}

Json sweep_summary_json(const SweepReport& report) {
  const auto shapes = uniqueness_diagnostic(report);
  Json curves = Json::array();
  for (std::size_t i = 0; i < report.curves.size(); ++i) {
    const auto& c = report.curves[i];
    curves.push_back(Json{{"objective", to_string(c.objective)},
                          {"alpha", c.alpha},
                          {"argmax_theta", c.argmax_theta},
                          {"max_value", c.max_value},
                          {"flatness", c.flatness},
                          {"shape", to_string(shapes[i].shape)},
                          {"near_max_theta", Json::array({shapes[i].near_max_lo, shapes[i].near_max_hi})}});
  }
  const auto& s = report.spec;
  Json alphas = Json::array();
  for (double a : s.alphas) alphas.push_back(a);
  return Json{{"theta_star", s.theta_star},
              {"assumption", to_string(s.assumption)},
              {"grid", Json{{"min", s.theta_min}, {"max", s.theta_max}, {"step", s.theta_step},
                            {"points", report.thetas.size()}}},
              {"alphas", alphas},
              {"curves", curves}};
}

}  // namespace maxprob
