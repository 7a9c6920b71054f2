#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "maxprob/error.hpp"
#include "maxprob/logspace.hpp"
#include "maxprob/mpbound.hpp"

using namespace maxprob;

namespace {

FiniteDistribution coin(double a, double b) {
  const double p[] = {a, b};
  return make_distribution(OutcomeRange({"H", "T"}), p);
}

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

// Independent soft-min: -(1/a) log sum exp(-a x) computed by direct summation
// in long double after subtracting the min.
double soft_min(const std::vector<double>& x, double a) {
  const double m = *std::min_element(x.begin(), x.end());
  long double s = 0.0L;
  for (double v : x) s += std::exp(-static_cast<long double>(a) * (v - m));
  return m - static_cast<double>(std::log(s) / a);
}

}  // namespace

TEST_CASE("coin flip bounds") {
  const auto prior = coin(0.5, 0.5);
  const auto b1 = max_probability(prior, coin(1.0, 0.0));
  CHECK(std::exp(b1.log_max_probability) == 0.5);
  CHECK(b1.argmin_outcome == 0);

  const auto b2 = max_probability(prior, coin(0.9, 0.1));
  CHECK(std::abs(std::exp(b2.log_max_probability) - 5.0 / 9.0) <= 1e-15 * (5.0 / 9.0));
  CHECK(b2.argmin_outcome == 0);

  const auto b3 = max_probability(prior, prior);
  CHECK(b3.log_max_probability == 0.0);
}

TEST_CASE("bound edge cases") {
  // Supported outcome with zero prior: the event cannot have positive mass.
  const auto b = max_probability(coin(1.0, 0.0), coin(0.5, 0.5));
  CHECK(b.log_max_probability == kNegInf);
  CHECK(b.argmin_outcome == 1);
  // Ties resolve to the lowest index.
  const double p[] = {0.25, 0.25, 0.5};
  const auto u = make_distribution(OutcomeRange::indexed(3), p);
  const double c[] = {0.5, 0.5, 0.0};
  CHECK(max_probability(u, make_distribution(OutcomeRange::indexed(3), c)).argmin_outcome == 0);

  CHECK(code_of([] { max_probability(coin(0.5, 0.5), FiniteDistribution::uniform(OutcomeRange::indexed(2))); }) ==
        ErrorCode::RangeMismatch);
}

TEST_CASE("softmax probability examples") {
  for (std::size_t n : {1u, 2u, 5u, 9u}) {
    const auto u = FiniteDistribution::uniform(OutcomeRange::indexed(n));
    for (double a : {0.5, 1.0, 3.0, 100.0})
      CHECK(softmax_probability(u, u, a) ==
            doctest::Approx(-std::log(static_cast<double>(n)) / a).epsilon(1e-13));
  }
  const double lp = softmax_probability(coin(0.5, 0.5), coin(0.9, 0.1), 1e4);
  CHECK(std::abs(lp - std::log(5.0 / 9.0)) <= 1e-3);
  CHECK(lp <= std::log(5.0 / 9.0));

  CHECK(code_of([] { softmax_probability(coin(0.5, 0.5), coin(0.5, 0.5), 0.0); }) ==
        ErrorCode::NonPositiveAlpha);
  CHECK(code_of([] { softmax_probability(coin(0.5, 0.5), coin(0.5, 0.5), -1.0); }) ==
        ErrorCode::NonPositiveAlpha);
  CHECK(softmax_probability(coin(1.0, 0.0), coin(0.5, 0.5), 2.0) == kNegInf);
}

TEST_CASE("property: soft bound below exact bound, non-decreasing in alpha") {
  Rng rng(21);
  const double alphas[] = {0.5, 1.0, 2.0, 4.0, 16.0, 256.0};
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.index(10);
    const auto prior = gen::dist(rng, n, 0.1);
    const auto cond = gen::dist(rng, n, 0.3);
    const double exact = max_probability(prior, cond).log_max_probability;
    CHECK(exact <= 1e-12);
    double prev = kNegInf;
    for (double a : alphas) {
      const double s = softmax_probability(prior, cond, a);
      CHECK(s <= exact + 1e-12);
      CHECK(s >= prev - 1e-12);
      prev = s;
    }
  }
}

TEST_CASE("property: log-sum-exp soft-min lemma") {
  Rng rng(22);
  for (int t = 0; t < 500; ++t) {
    const auto a = gen::vec(rng, 1 + rng.index(20), 10.0);
    const double m = *std::min_element(a.begin(), a.end());
    for (double alpha : {0.1, 1.0, 7.0, 1e4}) {
      std::vector<double> scaled(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) scaled[i] = -alpha * a[i];
      const double lhs = -logsumexp(scaled) / alpha;
      CHECK(lhs <= m + 1e-12);
      CHECK(lhs == doctest::Approx(soft_min(a, alpha)).epsilon(1e-12));
      if (alpha == 1e4) CHECK(m - lhs <= 1e-3);
    }
  }
}

TEST_CASE("alpha skeleton examples") {
  const auto d = coin(0.9, 0.1);
  const auto same = alpha_skeleton(d, 1.0);
  CHECK(same.log_prob(0) == d.log_prob(0));
  CHECK(same.log_prob(1) == d.log_prob(1));

  const auto sq = alpha_skeleton(d, 2.0);
  CHECK(sq.prob(0) == doctest::Approx(0.81 / 0.82).epsilon(1e-14));
  CHECK(sq.prob(1) == doctest::Approx(0.01 / 0.82).epsilon(1e-14));

  const double p[] = {0.6, 0.3, 0.1};
  const auto sharp = alpha_skeleton(make_distribution(OutcomeRange::indexed(3), p), 1e4);
  CHECK(sharp.prob(0) >= 1.0 - 1e-10);

  const double z[] = {0.5, 0.0, 0.5};
  const auto zd = make_distribution(OutcomeRange::indexed(3), z);
  const auto flat = alpha_skeleton(zd, 0.0);
  CHECK(flat.prob(0) == 0.5);
  CHECK(flat.prob(1) == 0.0);
  CHECK(code_of([&] { alpha_skeleton(zd, -1.0); }) == ErrorCode::NegativeAlphaOnZeroMass);
  CHECK(alpha_skeleton(d, -1.0).prob(1) == doctest::Approx(0.9).epsilon(1e-14));
}

TEST_CASE("property: skeleton composition and argmax") {
  Rng rng(23);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + rng.index(10);
    const auto d = gen::dist(rng, n, 0.2);
    const double a = rng.uniform(0.1, 4.0);
    const double b = rng.uniform(0.1, 4.0);
    const auto lhs = alpha_skeleton(alpha_skeleton(d, a), b);
    const auto rhs = alpha_skeleton(d, a * b);
    for (std::size_t v = 0; v < n; ++v) {
      if (!d.supported(v)) {
        CHECK(lhs.log_prob(v) == kNegInf);
        CHECK(rhs.log_prob(v) == kNegInf);
      } else {
        CHECK(std::abs(lhs.log_prob(v) - rhs.log_prob(v)) <= 1e-12 * std::max(1.0, std::abs(rhs.log_prob(v))));
      }
    }
    const double alpha = 1.0 + rng.uniform(1e-3, 20.0);
    const auto s = alpha_skeleton(d, alpha);
    const auto lp = d.logp();
    const auto ls = s.logp();
    CHECK(std::max_element(lp.begin(), lp.end()) - lp.begin() ==
          std::max_element(ls.begin(), ls.end()) - ls.begin());
  }
}

TEST_CASE("extension monotonicity") {
  Rng rng(24);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t nf = 2 + rng.index(10);
    const std::size_t nc = 1 + rng.index(nf);
    std::vector<std::size_t> proj(nf);
    for (std::size_t i = 0; i < nf; ++i) proj[i] = i < nc ? i : rng.index(nc);
    const Refinement r(OutcomeRange::indexed(nf), OutcomeRange::indexed(nc), proj);
    const auto m = check_extension_monotonicity(gen::dist(rng, nf, 0.1), gen::dist(rng, nf, 0.3), r);
    CHECK(m.holds);
  }

  const auto prior = gen::dist(rng, 5);
  const auto cond = gen::dist(rng, 5, 0.3);
  const auto id = check_extension_monotonicity(prior, cond, Refinement::identity(prior.range()));
  CHECK(id.log_bound_fine == id.log_bound_coarse);
}

TEST_CASE("concatenated variable tightens the bound") {
  Rng rng(25);
  for (int t = 0; t < 300; ++t) {
    const std::size_t nv = 1 + rng.index(4);
    const std::size_t nz = 1 + rng.index(4);
    const auto pv = gen::simplex(rng, nv);
    const auto pz = gen::simplex(rng, nz);
    std::vector<double> joint(nv * nz);
    std::vector<std::size_t> proj(nv * nz);
    for (std::size_t v = 0; v < nv; ++v)
      for (std::size_t z = 0; z < nz; ++z) {
        joint[v * nz + z] = pv[v] * pz[z];
        proj[v * nz + z] = v;
      }
    const OutcomeRange h = OutcomeRange::indexed(nv * nz);
    const Refinement r(h, OutcomeRange::indexed(nv), proj);
    const auto m = check_extension_monotonicity(make_distribution(h, joint), gen::dist(rng, nv * nz, 0.2), r);
    CHECK(m.holds);
  }
}

TEST_CASE("exhaustive oracle examples") {
  const double two[] = {0.5, 0.5};
  const std::size_t id[] = {0, 1};
  const auto r = exhaustive_bound_oracle(two, id, coin(1.0, 0.0));
  REQUIRE(r.has_value());
  CHECK(*r == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::exp(max_probability(coin(0.5, 0.5), coin(1.0, 0.0)).log_max_probability) == *r);

  const double four[] = {0.25, 0.25, 0.25, 0.25};
  const std::size_t pairs[] = {0, 0, 1, 1};
  const double c[] = {1.0, 0.0};
  const auto r2 = exhaustive_bound_oracle(four, pairs, make_distribution(OutcomeRange({"a", "b"}), c));
  REQUIRE(r2.has_value());
  CHECK(*r2 == doctest::Approx(0.5).epsilon(1e-15));

  // No event over two equal atoms has conditional (0.9, 0.1).
  CHECK_FALSE(exhaustive_bound_oracle(two, id, coin(0.9, 0.1)).has_value());

  std::vector<double> big(21, 1.0 / 21);
  std::vector<std::size_t> bigmap(21, 0);
  CHECK(code_of([&] { exhaustive_bound_oracle(big, bigmap, FiniteDistribution::uniform(OutcomeRange::indexed(1))); }) ==
        ErrorCode::SpaceTooLarge);
}

TEST_CASE("property: exhaustive oracle never exceeds the bound") {
  Rng rng(26);
  for (int t = 0; t < 200; ++t) {
    const std::size_t atoms = 2 + rng.index(9);
    const std::size_t nv = 1 + rng.index(std::min<std::size_t>(atoms, 4));
    const auto p = gen::simplex(rng, atoms);
    std::vector<std::size_t> map(atoms);
    for (std::size_t a = 0; a < atoms; ++a) map[a] = a < nv ? a : rng.index(nv);
    const OutcomeRange range = OutcomeRange::indexed(nv);
    const auto prior = induced_distribution(p, map, range);

    // Conditional of a random event, so at least that event matches.
    std::vector<double> mass(nv, 0.0);
    for (std::size_t a = 0; a < atoms; ++a)
      if (rng.uniform() < 0.5 || a == 0) mass[map[a]] += p[a];
    double total = 0.0;
    for (double m : mass) total += m;
    for (double& m : mass) m /= total;
    const auto cond = make_distribution(range, mass);
    const auto oracle = exhaustive_bound_oracle(p, map, cond);
    REQUIRE(oracle.has_value());
    const double bound = std::exp(max_probability(prior, cond).log_max_probability);
    CHECK(*oracle <= bound * (1.0 + 1e-9));

    const std::size_t v = rng.index(nv);
    const auto deg = FiniteDistribution::degenerate(range, v);
    const auto od = exhaustive_bound_oracle(p, map, deg);
    REQUIRE(od.has_value());
    CHECK(std::abs(*od - std::exp(max_probability(prior, deg).log_max_probability)) <= 1e-9);
  }
}
