#include <doctest.h>

#include <cmath>

#include "maxprob/bernoulli_lab.hpp"
#include "maxprob/error.hpp"

using namespace maxprob;

namespace {

const double kLn9 = std::log(9.0);

SweepSpec spec_for(double theta_star, Assumption a = Assumption::CondIndependent) {
  SweepSpec s;
  s.theta_star = theta_star;
  s.assumption = a;
  return s;
}

ShapeDiagnostic shape_of(const SweepReport& r, ObjectiveKind k, double alpha) {
  for (const auto& d : uniqueness_diagnostic(r))
    if (d.objective == k && d.alpha == alpha) return d;
  FAIL("missing curve");
  return {};
}

}  // namespace

TEST_CASE("sweep layout") {
  const auto r = run_sweep(spec_for(kLn9));
  CHECK(r.thetas.size() == 1601);
  CHECK(r.curves.size() == 10);
  for (const auto& c : r.curves) {
    CHECK(c.values.size() == r.thetas.size());
    for (double v : c.values) CHECK(c.max_value >= v);
  }
  CHECK(r.curves[0].objective == ObjectiveKind::Likelihood);
  CHECK(r.curves[5].objective == ObjectiveKind::Intersection);
  CHECK(r.curves[6].alpha == 2.0);
}

TEST_CASE("independent sweep at theta* = ln 9") {
  const auto r = run_sweep(spec_for(kLn9));
  const auto& i2 = r.curve(ObjectiveKind::Intersection, 2.0);
  CHECK(std::abs(i2.argmax_theta - kLn9) <= 0.01);
  CHECK(shape_of(r, ObjectiveKind::Intersection, 2.0).shape == CurveShape::UniqueInteriorMax);

  const auto& like = r.curve(ObjectiveKind::Likelihood, 1.0);
  CHECK(like.argmax_index == r.thetas.size() - 1);
  CHECK(shape_of(r, ObjectiveKind::Likelihood, 1.0).shape == CurveShape::BoundaryMax);

  double prev = INFINITY;
  for (double a : {2.0, 4.0, 16.0, 256.0}) {
    const double t = std::abs(r.curve(ObjectiveKind::Intersection, a).argmax_theta);
    CHECK(t <= prev);
    prev = t;
  }
  CHECK(r.curve(ObjectiveKind::Intersection, 256.0).argmax_theta < 0.1);
}

TEST_CASE("alpha 1 intersection is the likelihood shifted by a constant") {
  SweepSpec s = spec_for(kLn9);
  s.alphas = {1.0};
  const auto r = run_sweep(s);
  const auto& a = r.curve(ObjectiveKind::Likelihood, 1.0);
  const auto& b = r.curve(ObjectiveKind::Intersection, 1.0);
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < r.thetas.size(); ++i) {
    lo = std::min(lo, b.values[i] - a.values[i]);
    hi = std::max(hi, b.values[i] - a.values[i]);
  }
  CHECK(hi - lo <= 1e-9);
}

TEST_CASE("symmetric oracle puts the intersection maximum at zero") {
  SweepSpec s = spec_for(0.0);
  s.alphas = {2.0, 4.0, 16.0, 256.0};
  s.objectives = {ObjectiveKind::Intersection};
  const auto r = run_sweep(s);
  for (const auto& c : r.curves) CHECK(std::abs(c.argmax_theta) <= 1e-9);
}

TEST_CASE("subset sweep") {
  const auto r = run_sweep(spec_for(kLn9, Assumption::OracleSubset));
  for (const auto& c : r.curves) {
    for (std::size_t i = 1; i + 1 < c.values.size(); ++i)
      CHECK(c.values[i + 1] - 2 * c.values[i] + c.values[i - 1] <= 1e-9);
  }
  const auto flat = shape_of(r, ObjectiveKind::Intersection, 256.0);
  CHECK(flat.shape == CurveShape::Plateau);
  CHECK(flat.near_max_lo >= -0.01);
  CHECK(flat.near_max_hi <= kLn9 + 0.01);
  CHECK(flat.near_max_hi - flat.near_max_lo > 0.5);
}

TEST_CASE("sweep output is reproducible") {
  SweepSpec s = spec_for(1.3);
  s.theta_min = -2.0;
  s.theta_max = 2.0;
  s.theta_step = 0.5;
  s.alphas = {2.0};
  const auto a = sweep_csv(run_sweep(s));
  const auto b = sweep_csv(run_sweep(s));
  CHECK(a == b);
  CHECK(a.rfind("objective,assumption,alpha,theta,value\n", 0) == 0);
  CHECK(a.find("likelihood,cond-independent,2,-2,") != std::string::npos);
  const auto j = sweep_summary_json(run_sweep(s));
  CHECK(j["grid"]["points"] == 9);
  CHECK(j["curves"].size() == 2);
  CHECK(dump_json(j) == dump_json(sweep_summary_json(run_sweep(s))));
}

TEST_CASE("sweep spec validation") {
  auto code = [](const SweepSpec& s) {
    try {
      run_sweep(s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  SweepSpec s;
  s.theta_step = 0.0;
  CHECK(code(s) == ErrorCode::InvalidArgument);
  s = SweepSpec{};
  s.alphas = {2.0, -1.0};
  CHECK(code(s) == ErrorCode::NonPositiveAlpha);
  s = SweepSpec{};
  s.prior = FiniteDistribution::uniform(OutcomeRange::indexed(3));
  CHECK(code(s) == ErrorCode::RangeMismatch);
  s = SweepSpec{};
  s.theta_star = NAN;
  CHECK(code(s) == ErrorCode::NonFiniteParameter);
}
