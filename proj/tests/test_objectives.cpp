#include <doctest.h>

#include <cmath>
#include <numeric>

#include "gen.hpp"
#include "maxprob/error.hpp"
#include "maxprob/logspace.hpp"
#include "maxprob/mpbound.hpp"
#include "maxprob/objectives.hpp"

using namespace maxprob;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected maxprob::Error");
  return ErrorCode::InvalidArgument;
}

FiniteDistribution two(double a, double b) {
  const double p[] = {a, b};
  return make_distribution(OutcomeRange::indexed(2), p);
}

// Reference objectives in linear space, written straight from the formulas.
// Long double keeps central differences accurate on near-zero entries.
struct Ref {
  std::vector<long double> m, o, p;
  long double alpha;

  long double likelihood() const {
    long double s = 0.0L;
    for (std::size_t v = 0; v < m.size(); ++v)
      if (p[v] > 0) s += o[v] * m[v] / p[v];
    return std::log(s);
  }
  long double soft_model() const {
    long double s = 0.0L;
    for (std::size_t v = 0; v < m.size(); ++v)
      if (m[v] > 0) s += std::pow(m[v] / p[v], alpha);
    return -std::log(s) / alpha;
  }
  long double subset_likelihood() const {
    long double s = 0.0L;
    for (std::size_t v = 0; v < m.size(); ++v)
      if (o[v] > 0) s += std::pow(o[v] / m[v], alpha);
    return -std::log(s) / alpha;
  }
  long double value(ObjectiveKind k, Assumption a) const {
    const long double lnn = std::log(static_cast<long double>(m.size())) / alpha;
    const long double base = a == Assumption::CondIndependent ? likelihood() : subset_likelihood();
    return k == ObjectiveKind::Likelihood ? base : base + soft_model() + lnn;
  }
};

std::vector<long double> softmax(const std::vector<long double>& z) {
  const long double hi = *std::max_element(z.begin(), z.end());
  std::vector<long double> e(z.size());
  long double s = 0.0L;
  for (std::size_t i = 0; i < z.size(); ++i) s += (e[i] = std::exp(z[i] - hi));
  for (auto& x : e) x /= s;
  return e;
}

}  // namespace

TEST_CASE("posterior examples") {
  const auto u = FiniteDistribution::uniform(OutcomeRange::indexed(2));
  const auto m = two(0.9, 0.1);
  const auto post = posterior_given_both(m, m, u);
  CHECK(post.prob(0) == doctest::Approx(0.81 / 0.82).epsilon(1e-14));
  CHECK(post.prob(1) == doctest::Approx(0.01 / 0.82).epsilon(1e-14));

  Rng rng(31);
  const auto prior = gen::dist(rng, 5);
  const auto oracle = gen::dist(rng, 5, 0.3);
  const auto same = posterior_given_both(prior, oracle, prior);
  for (std::size_t v = 0; v < 5; ++v) CHECK(same.prob(v) == doctest::Approx(oracle.prob(v)).epsilon(1e-13));

  const auto deg = FiniteDistribution::degenerate(OutcomeRange::indexed(5), 3);
  const auto pd = posterior_given_both(gen::dist(rng, 5), deg, prior);
  CHECK(pd.prob(3) == 1.0);

  CHECK(code_of([&] { posterior_given_both(two(1, 0), two(0, 1), u); }) ==
        ErrorCode::EmptyIntersectionSupport);
  CHECK(code_of([&] { posterior_given_both(two(1, 0), prior, u); }) == ErrorCode::RangeMismatch);
}

TEST_CASE("likelihood examples") {
  const auto u = FiniteDistribution::uniform(OutcomeRange::indexed(2));
  CHECK(likelihood_value(u, u, u).value == doctest::Approx(0.0));
  const auto v = likelihood_value(two(0.9, 0.1), two(1, 0), u);
  CHECK(v.value == doctest::Approx(std::log(1.8)).epsilon(1e-15));
  CHECK(v.dropped_constant_terms == std::vector<std::string>{"log P(M*)"});
  CHECK(likelihood_value(two(1, 0), two(0, 1), u).value == kNegInf);

  const auto g = likelihood_gradient(two(0.5, 0.5), two(1, 0), u);
  CHECK(g.d_logp[0] == 0.5);
  CHECK(g.d_logp[1] == -0.5);

  // Model equal to the posterior it induces: a degenerate model on the
  // oracle's only outcome.
  const auto fixed = likelihood_gradient(two(1, 0), two(1, 0), u);
  CHECK(fixed.d_logp[0] == 0.0);
  CHECK(fixed.d_logp[1] == 0.0);
}

TEST_CASE("intersection examples") {
  const auto u = FiniteDistribution::uniform(OutcomeRange::indexed(2));
  const auto m = two(0.9, 0.1);
  const auto o = two(1.0, 0.0);
  const double got = intersection_value(m, o, u, 2.0).value;
  // Hand value: log(2 * 0.9) - (1/2) log(0.81 + 0.01) - (1/2) log 2.
  const double hand = std::log(1.8) - 0.5 * std::log(0.82) - 0.5 * std::log(2.0);
  CHECK(got == doctest::Approx(hand).epsilon(1e-14));

  for (std::size_t n : {1u, 3u, 7u}) {
    const auto un = FiniteDistribution::uniform(OutcomeRange::indexed(n));
    for (double a : {0.5, 2.0, 9.0}) CHECK(std::abs(intersection_value(un, un, un, a).value) <= 1e-14);
  }

  CHECK(code_of([&] { intersection_value(m, o, u, 0.0); }) == ErrorCode::NonPositiveAlpha);
  CHECK(code_of([&] { intersection_gradient(m, o, u, -2.0); }) == ErrorCode::NonPositiveAlpha);
  CHECK(code_of([&] { intersection_gradient(two(0, 1), o, u, 2.0); }) ==
        ErrorCode::EmptyIntersectionSupport);
}

TEST_CASE("intersection gradient at alpha 1 is the likelihood gradient") {
  Rng rng(32);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.index(8);
    const auto u = FiniteDistribution::uniform(OutcomeRange::indexed(n));
    const auto m = gen::dist(rng, n);
    const auto o = gen::dist(rng, n, 0.3);
    const auto a = intersection_gradient(m, o, u, 1.0);
    const auto b = likelihood_gradient(m, o, u);
    for (std::size_t v = 0; v < n; ++v) CHECK(a.d_logp[v] == b.d_logp[v]);
  }
}

TEST_CASE("intersection gradient vanishes when posterior equals the skeleton") {
  Rng rng(33);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.index(8);
    const auto u = FiniteDistribution::uniform(OutcomeRange::indexed(n));
    const auto o = gen::dist(rng, n);
    // Uniform prior, model == oracle: posterior and 2-skeleton are both o^2.
    const auto g = intersection_gradient(o, o, u, 2.0);
    for (double x : g.d_logp) CHECK(std::abs(x) <= 1e-12);
  }
}

TEST_CASE("property: intersection minus likelihood at alpha 1 is constant") {
  Rng rng(34);
  for (std::size_t n : {2u, 3u, 6u}) {
    const auto u = FiniteDistribution::uniform(OutcomeRange::indexed(n));
    const auto o = gen::dist(rng, n);
    double lo = INFINITY, hi = -INFINITY;
    for (int t = 0; t < 150; ++t) {
      const auto m = gen::dist(rng, n);
      const double d = intersection_value(m, o, u, 1.0).value - likelihood_value(m, o, u).value;
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    CHECK(hi - lo <= 1e-9);
  }
}

TEST_CASE("subset likelihood examples") {
  Rng rng(35);
  for (std::size_t n : {1u, 2u, 5u}) {
    const auto m = gen::dist(rng, n);
    for (double a : {0.5, 2.0, 10.0})
      CHECK(subset_likelihood_value(m, m, a).value ==
            doctest::Approx(-std::log(static_cast<double>(n)) / a).epsilon(1e-13));
  }
  const auto m = gen::dist(rng, 4);
  const auto deg = FiniteDistribution::degenerate(OutcomeRange::indexed(4), 2);
  CHECK(subset_likelihood_value(m, deg, 3.0).value == doctest::Approx(m.log_prob(2)).epsilon(1e-14));

  for (int t = 0; t < 100; ++t) {
    const auto mm = gen::dist(rng, 5);
    const auto oo = gen::dist(rng, 5, 0.3);
    double lo = INFINITY;
    for (std::size_t v = 0; v < 5; ++v)
      if (oo.supported(v)) lo = std::min(lo, mm.log_prob(v) - oo.log_prob(v));
    const double s = subset_likelihood_value(mm, oo, 1e4).value;
    CHECK(s <= lo + 1e-12);
    CHECK(lo - s <= 1e-3);
  }

  const double z[] = {0.5, 0.5, 0.0, 0.0};
  const auto mz = make_distribution(OutcomeRange::indexed(4), z);
  CHECK(code_of([&] { subset_likelihood_value(mz, m, 2.0); }) == ErrorCode::OracleSupportEscapesModel);
  CHECK(code_of([&] { subset_likelihood_gradient(mz, m, 2.0); }) == ErrorCode::OracleSupportEscapesModel);
  CHECK(subset_likelihood_value(m, m, 2.0).dropped_constant_terms.empty());
}

TEST_CASE("subset intersection examples") {
  for (std::size_t n : {1u, 2u, 4u}) {
    const auto u = FiniteDistribution::uniform(OutcomeRange::indexed(n));
    for (double a : {0.5, 2.0, 9.0})
      CHECK(subset_intersection_value(u, u, u, a).value ==
            doctest::Approx(-std::log(static_cast<double>(n)) / a).epsilon(1e-13));
  }
  const auto u = FiniteDistribution::uniform(OutcomeRange::indexed(2));
  const auto o = FiniteDistribution::degenerate(OutcomeRange::indexed(2), 0);
  for (double p : {0.1, 0.5, 0.9, 0.999}) {
    const double hand = std::log(p) - 0.5 * std::log(p * p + (1 - p) * (1 - p)) - 0.5 * std::log(2.0);
    CHECK(subset_intersection_value(two(p, 1 - p), o, u, 2.0).value == doctest::Approx(hand).epsilon(1e-13));
  }
}

TEST_CASE("concentration residual") {
  const auto u = FiniteDistribution::uniform(OutcomeRange::indexed(2));
  CHECK(likelihood_concentration_residual(two(1, 0), two(0.6, 0.4), u) == 0.0);
  CHECK(likelihood_concentration_residual(two(0.5, 0.5), two(0.6, 0.4), u) == doctest::Approx(0.5).epsilon(1e-15));
  Rng rng(36);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.index(6);
    const auto un = FiniteDistribution::uniform(OutcomeRange::indexed(n));
    CHECK(likelihood_concentration_residual(gen::dist(rng, n), un, un) == 0.0);
  }
}

TEST_CASE("property: gradient entries sum to zero") {
  Rng rng(37);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 2 + rng.index(10);
    ObjectiveConfig cfg{rng.uniform() < 0.5 ? ObjectiveKind::Likelihood : ObjectiveKind::Intersection,
                        rng.uniform() < 0.5 ? Assumption::CondIndependent : Assumption::OracleSubset,
                        rng.uniform(0.2, 20.0), gen::dist(rng, n)};
    const auto g = gradient(cfg, gen::dist(rng, n), gen::dist(rng, n, 0.3));
    CHECK(std::abs(std::accumulate(g.d_logp.begin(), g.d_logp.end(), 0.0)) <= 1e-12);
  }
}

TEST_CASE("property: analytic gradients match finite differences of reference values") {
  Rng rng(38);
  const double h = 1e-5;
  int checked = 0;
  for (auto kind : {ObjectiveKind::Likelihood, ObjectiveKind::Intersection}) {
    for (auto assumption : {Assumption::CondIndependent, Assumption::OracleSubset}) {
      for (int t = 0; t < 100; ++t) {
        const std::size_t n = 2 + rng.index(6);
        const auto z = gen::vec(rng, n, 2.0);
        const auto prior = rng.uniform() < 0.5 ? FiniteDistribution::uniform(OutcomeRange::indexed(n))
                                               : gen::dist(rng, n);
        const auto oracle = gen::dist(rng, n, 0.2);
        const double alpha = rng.uniform(0.5, 8.0);
        const ObjectiveConfig cfg{kind, assumption, alpha, prior};
        const auto model = Parameterization::softmax_logits(OutcomeRange::indexed(n)).apply(z);
        const auto g = gradient(cfg, model, oracle);

        const auto widen = [](const std::vector<double>& v) { return std::vector<long double>(v.begin(), v.end()); };
        Ref ref{{}, widen(oracle.probs()), widen(prior.probs()), alpha};
        const auto zl = widen(z);
        auto at = [&](std::vector<long double> zz) {
          ref.m = softmax(zz);
          return ref.value(kind, assumption);
        };
        ref.m = softmax(zl);
        CHECK(evaluate(cfg, model, oracle).value ==
              doctest::Approx(static_cast<double>(ref.value(kind, assumption))).epsilon(1e-11));
        for (std::size_t k = 0; k < n; ++k) {
          auto up = zl, down = zl;
          up[k] += h;
          down[k] -= h;
          const double fd = static_cast<double>((at(up) - at(down)) / (2 * h));
          const double err = std::abs(fd - g.d_logp[k]);
          INFO(to_string(kind) << " " << to_string(assumption) << " alpha=" << alpha);
          // Entries near zero carry ~1e-14 of rounding in both numbers.
          CHECK(err <= 1e-6 * std::max(std::abs(fd), std::abs(g.d_logp[k])) + 1e-12);
        }
        ++checked;
      }
    }
  }
  CHECK(checked == 400);
}

TEST_CASE("config validation and parsing") {
  const auto u = FiniteDistribution::uniform(OutcomeRange::indexed(2));
  CHECK(code_of([&] { ObjectiveConfig{ObjectiveKind::Intersection, Assumption::CondIndependent, 0.0, u}.validate(); }) ==
        ErrorCode::NonPositiveAlpha);
  CHECK(parse_objective_kind("intersection") == ObjectiveKind::Intersection);
  CHECK(parse_assumption("subset") == Assumption::OracleSubset);
  CHECK(parse_assumption("cond-independent") == Assumption::CondIndependent);
  CHECK(code_of([] { parse_assumption("joint"); }) == ErrorCode::InvalidArgument);
  CHECK(to_string(Assumption::OracleSubset) == "oracle-subset");
}
