#include "maxprob/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include <unistd.h>

#include "maxprob/bernoulli_lab.hpp"
#include "maxprob/cli.hpp"
#include "maxprob/error.hpp"
#include "maxprob/mpbound.hpp"
#include "maxprob/nn_toy.hpp"
#include "maxprob/objectives.hpp"
#include "maxprob/optimize.hpp"
#include "maxprob/rng.hpp"

namespace maxprob {

namespace {

using Clock = std::chrono::steady_clock;
using Artifacts = std::map<std::string, std::string>;

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

std::vector<double> simplex(Rng& rng, std::size_t n, double zero_rate = 0.0) {
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& x : w) {
    x = -std::log(1.0 - rng.uniform());
    if (zero_rate > 0.0 && rng.uniform() < zero_rate) x = 0.0;
    total += x;
  }
  if (total == 0.0) {
    w[rng.index(n)] = 1.0;
    total = 1.0;
  }
  for (auto& x : w) x /= total;
  return w;
}

FiniteDistribution random_dist(Rng& rng, std::size_t n, double zero_rate = 0.0) {
  return make_distribution(OutcomeRange::indexed(n), simplex(rng, n, zero_rate));
}

struct Outcome {
  bool passed;
  std::string detail;
  // Overrides the runner's wall clock when only part of the work is timed.
  std::optional<double> seconds = std::nullopt;
};

// ---------------------------------------------------------------------------

Outcome coin_flip(std::uint64_t) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("maxprob-check-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto write = [&](const char* name, const char* body) {
    std::ofstream(dir / name) << body;
    return (dir / name).string();
  };
  const std::string prior = write("prior.json", R"({"range": ["H", "T"], "probs": [0.5, 0.5]})");
  const std::string c1 = write("c1.json", R"({"range": ["H", "T"], "probs": [1, 0]})");
  const std::string c2 = write("c2.json", R"({"range": ["H", "T"], "probs": [0.9, 0.1]})");

  auto run = [&](const std::string& cond) {
    std::ostringstream out, err;
    const int code = dispatch({"bound", "--prior", prior, "--conditional", cond}, out, err);
    if (code != 0) throw Error(ErrorCode::InvalidArgument, "bound failed: " + err.str());
    return Json::parse(out.str()).at("value").get<double>();
  };
  const auto start = std::chrono::steady_clock::now();
  const double v1 = run(c1);
  const double v2 = run(c2);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  fs::remove_all(dir);
  const double e1 = std::abs(v1 - 0.5) / 0.5;
  const double e2 = std::abs(v2 - 5.0 / 9.0) / (5.0 / 9.0);
  return {e1 <= 1e-15 && e2 <= 1e-15,
          "P=" + format_real(v1) + ", " + format_real(v2) + "; rel err " + sci(std::max(e1, e2)), secs};
}

Outcome brute_force(std::uint64_t seed) {
  Rng rng(seed);
  std::size_t violations = 0, degenerate_checked = 0;
  double worst_gap = 0.0, worst_eq = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t atoms = 2 + rng.index(11);  // 2..12
    const std::size_t nv = 1 + rng.index(std::min<std::size_t>(atoms, 5));
    const auto p = simplex(rng, atoms);
    std::vector<std::size_t> map(atoms);
    for (std::size_t a = 0; a < atoms; ++a) map[a] = a < nv ? a : rng.index(nv);
    const OutcomeRange range = OutcomeRange::indexed(nv);
    const auto prior = induced_distribution(p, map, range);

    std::vector<double> mass(nv, 0.0);
    double total = 0.0;
    for (std::size_t a = 0; a < atoms; ++a)
      if (a == 0 || rng.uniform() < 0.5) {
        mass[map[a]] += p[a];
        total += p[a];
      }
    for (double& m : mass) m /= total;
    const auto cond = make_distribution(range, mass);
    const auto oracle = exhaustive_bound_oracle(p, map, cond);
    const double bound = std::exp(max_probability(prior, cond).log_max_probability);
    if (!oracle || *oracle > bound * (1.0 + 1e-12)) ++violations;
    if (oracle) worst_gap = std::max(worst_gap, *oracle - bound);

    for (std::size_t v = 0; v < nv; ++v) {
      const auto deg = FiniteDistribution::degenerate(range, v);
      const auto od = exhaustive_bound_oracle(p, map, deg);
      const double bd = std::exp(max_probability(prior, deg).log_max_probability);
      ++degenerate_checked;
      if (!od) {
        ++violations;
        continue;
      }
      worst_eq = std::max(worst_eq, std::abs(*od - bd));
    }
  }
  return {violations == 0 && worst_eq <= 1e-9,
          "200 spaces, " + std::to_string(degenerate_checked) + " degenerate; max(oracle-bound) " +
              sci(worst_gap) + ", degenerate |diff| " + sci(worst_eq)};
}

Outcome monotonicity(std::uint64_t seed) {
  Rng rng(seed);
  std::size_t failures = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t nf = 2 + rng.index(11);
    const std::size_t nc = 1 + rng.index(nf);
    std::vector<std::size_t> proj(nf);
    for (std::size_t i = 0; i < nf; ++i) proj[i] = i < nc ? i : rng.index(nc);
    const Refinement r(OutcomeRange::indexed(nf), OutcomeRange::indexed(nc), proj);
    const auto m = check_extension_monotonicity(random_dist(rng, nf, 0.1), random_dist(rng, nf, 0.3), r);
    if (!m.holds) ++failures;
  }
  return {failures == 0, "1000 triples, " + std::to_string(failures) + " violations"};
}

Outcome softmax_family(std::uint64_t seed) {
  Rng rng(seed);
  const double alphas[] = {0.5, 1.0, 2.0, 4.0, 16.0, 256.0};
  std::size_t above = 0, decreasing = 0;
  double worst_limit = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.index(10);
    const auto prior = random_dist(rng, n);
    const auto cond = random_dist(rng, n, 0.3);
    const double exact = max_probability(prior, cond).log_max_probability;
    double prev = -INFINITY;
    for (double a : alphas) {
      const double s = softmax_probability(prior, cond, a);
      if (s > exact + 1e-12) ++above;
      if (s < prev - 1e-12) ++decreasing;
      prev = s;
    }
    const double lim = softmax_probability(prior, cond, 1e4);
    worst_limit = std::max(worst_limit, std::abs(std::exp(lim) - std::exp(exact)) / std::exp(exact));
  }
  return {above == 0 && decreasing == 0 && worst_limit <= 1e-3,
          "above bound " + std::to_string(above) + ", decreasing " + std::to_string(decreasing) +
              ", alpha=1e4 rel gap " + sci(worst_limit)};
}

// Objective values recomputed in extended precision, straight from the
// linear-space formulas, as the finite-difference oracle.
long double reference_value(ObjectiveKind kind, Assumption assumption, long double alpha,
                            const std::vector<long double>& m, const std::vector<double>& o,
                            const std::vector<double>& p) {
  const std::size_t n = m.size();
  long double base = 0.0L;
  if (assumption == Assumption::CondIndependent) {
    long double s = 0.0L;
    for (std::size_t v = 0; v < n; ++v)
      if (p[v] > 0) s += o[v] * m[v] / p[v];
    base = std::log(s);
  } else {
    long double s = 0.0L;
    for (std::size_t v = 0; v < n; ++v)
      if (o[v] > 0) s += std::pow(o[v] / m[v], alpha);
    base = -std::log(s) / alpha;
  }
  if (kind == ObjectiveKind::Likelihood) return base;
  long double s = 0.0L;
  for (std::size_t v = 0; v < n; ++v) s += std::pow(m[v] / p[v], alpha);
  return base - std::log(s) / alpha + std::log(static_cast<long double>(n)) / alpha;
}

std::vector<long double> reference_model(ParamKind kind, const std::vector<long double>& theta,
                                         std::size_t n) {
  if (kind == ParamKind::SigmoidBernoulli) {
    const long double p1 = 1.0L / (1.0L + std::exp(-theta[0]));
    return {1.0L - p1, p1};
  }
  const long double hi = *std::max_element(theta.begin(), theta.end());
  std::vector<long double> e(n);
  long double s = 0.0L;
  for (std::size_t i = 0; i < n; ++i) s += (e[i] = std::exp(theta[i] - hi));
  for (auto& x : e) x /= s;
  return e;
}

Outcome gradients(std::uint64_t seed) {
  Rng rng(seed);
  const long double h = 1e-5L;
  double worst = 0.0, worst_large = 0.0, largest_failing = 0.0;
  std::string worst_case;
  std::size_t instances = 0, coords = 0, failing = 0;
  for (auto kind : {ObjectiveKind::Likelihood, ObjectiveKind::Intersection}) {
    for (auto assumption : {Assumption::CondIndependent, Assumption::OracleSubset}) {
      for (auto pk : {ParamKind::SigmoidBernoulli, ParamKind::SoftmaxLogits}) {
        for (int t = 0; t < 100; ++t) {
          const std::size_t n = pk == ParamKind::SigmoidBernoulli ? 2 : 2 + rng.index(7);
          const OutcomeRange range = OutcomeRange::indexed(n);
          const auto param = pk == ParamKind::SigmoidBernoulli ? Parameterization::sigmoid_bernoulli(range)
                                                               : Parameterization::softmax_logits(range);
          auto prior_w = simplex(rng, n);
          for (auto& x : prior_w) x = 0.5 * x + 0.5 / static_cast<double>(n);
          const auto prior = rng.uniform() < 0.5 ? FiniteDistribution::uniform(range)
                                                 : make_distribution(range, prior_w);
          const auto oracle = make_distribution(range, simplex(rng, n, 0.2));
          const double alpha = rng.uniform(0.5, 8.0);
          std::vector<double> theta(param.dim());
          for (auto& x : theta) x = rng.uniform(-2.0, 2.0);

          const ParamObjective f({kind, assumption, alpha, prior}, oracle, param);
          const auto an = *f.gradient(theta).d_theta;
          const auto o = oracle.probs();
          const auto p = prior.probs();
          std::vector<long double> th(theta.begin(), theta.end());
          for (std::size_t k = 0; k < th.size(); ++k) {
            const long double saved = th[k];
            th[k] = saved + h;
            const long double up = reference_value(kind, assumption, alpha, reference_model(pk, th, n), o, p);
            th[k] = saved - h;
            const long double down = reference_value(kind, assumption, alpha, reference_model(pk, th, n), o, p);
            th[k] = saved;
            const double fd = static_cast<double>((up - down) / (2.0L * h));
            const double err = std::abs(fd - an[k]) / std::max({1e-12, std::abs(an[k]), std::abs(fd)});
            ++coords;
            if (err > 1e-6) {
              ++failing;
              largest_failing = std::max(largest_failing, std::abs(an[k]));
            }
            // Reported only: coordinates large enough that rounding in either number is negligible.
            if (std::abs(an[k]) >= 1e-8) worst_large = std::max(worst_large, err);
            if (err > worst) {
              worst = err;
              worst_case = to_string(kind) + "/" + to_string(assumption) + "/" +
                           (pk == ParamKind::SigmoidBernoulli ? "sigmoid" : "softmax");
            }
          }
          ++instances;
        }
      }
    }
  }
  std::string detail = std::to_string(instances) + " instances, max rel err " + sci(worst) +
                       (worst_case.empty() ? "" : " (" + worst_case + ")");
  if (failing > 0) {
    detail += "; " + std::to_string(failing) + "/" + std::to_string(coords) +
              " coords over 1e-6, all with |grad| <= " + sci(largest_failing) + "; max rel err on |grad| >= 1e-8: " +
              sci(worst_large);
  }
  return {worst <= 1e-6, detail};
}

Outcome alpha_one(std::uint64_t) {
  SweepSpec s;
  s.theta_star = std::log(9.0);
  s.theta_min = -4.95;
  s.theta_max = 4.95;
  s.theta_step = 0.1;
  s.alphas = {1.0};
  const auto r = run_sweep(s);
  const auto& a = r.curve(ObjectiveKind::Likelihood, 1.0);
  const auto& b = r.curve(ObjectiveKind::Intersection, 1.0);
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < r.thetas.size(); ++i) {
    lo = std::min(lo, b.values[i] - a.values[i]);
    hi = std::max(hi, b.values[i] - a.values[i]);
  }
  return {r.thetas.size() == 100 && hi - lo <= 1e-9,
          std::to_string(r.thetas.size()) + " points, spread of difference " + sci(hi - lo)};
}

const OutcomeRange& bin() {
  static const OutcomeRange r({"0", "1"});
  return r;
}

Outcome oracle_recovery(std::uint64_t) {
  const double ln9 = std::log(9.0);
  const auto sig = Parameterization::sigmoid_bernoulli(bin());
  const double ts[] = {ln9};
  const auto oracle = sig.apply(ts);
  const ObjectiveConfig obj{ObjectiveKind::Intersection, Assumption::CondIndependent, 2.0,
                            FiniteDistribution::uniform(bin())};
  AscentConfig cfg;
  cfg.step_size = 1.0;
  const auto trace = ascend(obj, oracle, sig, {0.0}, cfg);
  const double theta = trace.last().theta[0];

  const ParamObjective f(obj, oracle, sig);
  std::vector<std::vector<double>> grid;
  for (double x : linear_grid(-6.0, 6.0, 0.001)) grid.push_back({x});
  const auto best = grid_argmax([&](std::span<const double> t) { return f.value(t); }, grid);
  const bool ok = trace.status == AscentStatus::Converged && std::abs(theta - ln9) <= 1e-4 &&
                  std::abs(best.theta[0] - theta) <= 0.001;
  return {ok, to_string(trace.status) + " after " + std::to_string(trace.records.size()) +
                  " evals, |theta-ln9| " + sci(std::abs(theta - ln9)) + ", grid argmax " +
                  format_real(best.theta[0])};
}

Outcome concentration(std::uint64_t) {
  const auto sig = Parameterization::sigmoid_bernoulli(bin());
  const double ts[] = {std::log(9.0)};
  const auto oracle = sig.apply(ts);
  const auto prior = FiniteDistribution::uniform(bin());
  const ObjectiveConfig obj{ObjectiveKind::Likelihood, Assumption::CondIndependent, 1.0, prior};
  AscentConfig cfg;
  cfg.step_size = 0.5;
  cfg.max_iters = 10000;
  const auto trace = ascend(obj, oracle, sig, {0.0}, cfg);
  double prev = INFINITY;
  std::size_t rises = 0;
  for (const auto& rec : trace.records) {
    const double r = likelihood_concentration_residual(sig.apply(rec.theta), oracle, prior);
    if (r > prev) ++rises;
    prev = r;
  }
  return {prev < 1e-3 && rises == 0,
          std::to_string(trace.records.size()) + " iterations, final residual " + sci(prev) +
              ", increases " + std::to_string(rises)};
}

Outcome hn_layer(std::uint64_t seed) {
  Rng rng(seed);
  std::size_t mismatches = 0;
  double ce_gap = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t k = 2 + rng.index(9);
    std::vector<double> z(k);
    for (auto& x : z) x = rng.uniform(-20.0, 20.0);
    if (hn_forward(z, 1.0) != softmax(z)) ++mismatches;

    const std::size_t b = 1 + rng.index(8);
    Matrix batch(b, k);
    for (auto& x : batch.data) x = rng.uniform(-5.0, 5.0);
    std::vector<std::size_t> y(b);
    for (auto& v : y) v = rng.index(k);
    long double ce = 0.0L;
    for (std::size_t r = 0; r < b; ++r) {
      long double s = 0.0L;
      for (std::size_t j = 0; j < k; ++j) s += std::exp(static_cast<long double>(batch(r, j)));
      ce += std::log(s) - batch(r, y[r]);
    }
    ce /= static_cast<long double>(b);
    ce_gap = std::max(ce_gap, std::abs(intersection_loss(batch, y, 1.0) - static_cast<double>(ce)));
  }
  const auto h = hn_forward(std::vector<double>{1.0, 0.0}, 2.0);
  const long double e = std::exp(1.0L);
  const double hand_gap = std::max(std::abs(h[0] - static_cast<double>(e / (e * e + 1))),
                                   std::abs(h[1] - static_cast<double>(1 / (e * e + 1))));
  return {mismatches == 0 && hand_gap <= 1e-12 && ce_gap <= 1e-12,
          "softmax mismatches " + std::to_string(mismatches) + ", hand value err " + sci(hand_gap) +
              ", CE gap " + sci(ce_gap)};
}

Outcome toy_gradients(std::uint64_t seed) {
  const auto data = ToyDataset::blobs(seed);
  const ToyNet net = ToyNet::init(3, seed + 1);
  const std::vector<std::size_t> batch = {0, 1, 2, 3, 4};
  double worst = 0.0;
  std::string where;
  for (const LossMode mode : {LossMode{LossMode::Kind::Intersection, 1.0, 0.0},
                              LossMode{LossMode::Kind::Intersection, 2.0, 0.0},
                              LossMode{LossMode::Kind::Intersection, 4.0, 0.0},
                              LossMode{LossMode::Kind::CrossEntropyL2, 1.0, 0.01}}) {
    for (const auto& c : gradient_check(net, data, batch, mode)) {
      if (c.rel_error >= worst) {
        worst = c.rel_error;
        where = to_string(mode.kind) + " " + c.name;
      }
    }
  }
  return {worst <= 1e-5, "24 tensors, max rel err " + sci(worst) + " (" + where + ")"};
}

std::string curves_csv_header() {
  return "run,epoch,train_loss,test_loss,train_acc,test_acc,reg_term\n";
}

void append_curves(std::string& csv, const std::string& run, const TrainReport& r) {
  for (const auto& e : r.epochs) {
    csv += run + "," + std::to_string(e.epoch) + "," + format_real(e.train_loss) + "," +
           format_real(e.test_loss) + "," + format_real(e.train_acc) + "," +
           format_real(e.test_acc) + "," + format_real(e.reg_term) + "\n";
  }
}

Outcome toy_training(std::uint64_t seed, Artifacts& artifacts) {
  std::string csv = curves_csv_header();
  std::size_t failures = 0;
  std::string detail;
  for (double alpha : {1.0, 2.0, 4.0}) {
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.loss = {LossMode::Kind::Intersection, alpha, 0.0};
    const auto r = train_toy(cfg);
    const std::string bytes = dump_json(to_json(r));
    const bool same = bytes == dump_json(to_json(train_toy(cfg)));
    const bool down = r.epochs.back().train_loss < r.epochs.front().train_loss &&
                      r.epochs.back().train_objective < r.epochs.front().train_objective;
    const double cap = std::log(3.0) * (alpha - 1.0) / alpha;
    bool bounded = true;
    for (const auto& e : r.epochs) bounded = bounded && e.reg_term >= -1e-12 && e.reg_term <= cap + 1e-12;
    if (!(same && down && bounded)) ++failures;
    const std::string name = "intersection_alpha" + format_real(alpha);
    artifacts["train_" + name + ".json"] = bytes + "\n";
    append_curves(csv, name, r);
    detail += (detail.empty() ? "" : "; ") + std::string("a=") + format_real(alpha) + " loss " +
              sci(r.epochs.front().train_loss) + "->" + sci(r.epochs.back().train_loss);
  }
  for (double lambda : {1e-4, 1e-3, 1e-2}) {
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.loss = {LossMode::Kind::CrossEntropyL2, 1.0, lambda};
    const auto r = train_toy(cfg);
    const std::string name = "ce_l2_lambda" + format_real(lambda);
    artifacts["train_" + name + ".json"] = dump_json(to_json(r)) + "\n";
    append_curves(csv, name, r);
  }
  artifacts["generalization.csv"] = csv;
  return {failures == 0, detail};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome(std::uint64_t, Artifacts&)> run;
};

std::vector<Criterion> criteria() {
  auto plain = [](Outcome (*f)(std::uint64_t)) {
    return [f](std::uint64_t s, Artifacts&) { return f(s); };
  };
  return {
      {1, "coin-flip bounds", 1e-3, plain(coin_flip)},
      {2, "bound vs exhaustive oracle", 30.0, plain(brute_force)},
      {3, "refinement monotonicity", 5.0, plain(monotonicity)},
      {4, "softmax probability family", 10.0, plain(softmax_family)},
      {5, "objective gradients vs finite differences", 30.0, plain(gradients)},
      {6, "alpha=1 equivalence", 1.0, plain(alpha_one)},
      {7, "alpha=2 oracle recovery", 10.0, plain(oracle_recovery)},
      {8, "likelihood concentration", 10.0, plain(concentration)},
      {9, "HN layer identities", 1.0, plain(hn_layer)},
      {10, "toy backprop vs finite differences", 60.0, plain(toy_gradients)},
      {11, "toy training behaviour", 120.0, toy_training},
  };
}

struct Run {
  std::vector<CriterionResult> results;
  Artifacts artifacts;
};

Run run_all(const AcceptanceOptions& opts) {
  Run run;
  for (const auto& c : criteria()) {
    const auto start = Clock::now();
    Outcome out;
    try {
      out = c.run(opts.seed + static_cast<std::uint64_t>(c.id), run.artifacts);
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = out.seconds.value_or(std::chrono::duration<double>(Clock::now() - start).count());
    if (secs > c.limit_seconds) {
      out.passed = false;
      out.detail += "; over the " + format_real(c.limit_seconds) + " s limit";
    }
    run.results.push_back({c.id, c.name, out.passed, out.detail});
  }
  return run;
}

void write_artifacts(const Artifacts& artifacts, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const auto& [name, body] : artifacts) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::FileNotFound, "cannot write artifact '" + name + "'");
    out << body;
  }
}

}  // namespace

std::vector<CriterionResult> run_criteria(const AcceptanceOptions& opts) {
  Run run = run_all(opts);
  if (opts.artifact_dir) write_artifacts(run.artifacts, *opts.artifact_dir);
  return run.results;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
  Run first = run_all(opts);
  const Run second = run_all(opts);
  const bool same_table = render_table(first.results) == render_table(second.results);
  const bool same_artifacts = first.artifacts == second.artifacts;
  std::size_t bytes = 0;
  for (const auto& [name, body] : first.artifacts) bytes += body.size();
  if (opts.artifact_dir) write_artifacts(first.artifacts, *opts.artifact_dir);
  first.results.push_back({12, "reproducibility", same_table && same_artifacts,
                           std::string("table ") + (same_table ? "identical" : "differs") + ", " +
                               std::to_string(first.artifacts.size()) + " artifacts (" +
                               std::to_string(bytes) + " bytes) " +
                               (same_artifacts ? "identical" : "differ")});
  return first.results;
}

std::string render_table(const std::vector<CriterionResult>& results) {
  std::string out;
  for (const auto& r : results) {
    char head[64];
    std::snprintf(head, sizeof head, "%-4s %2d  ", r.passed ? "PASS" : "FAIL", r.id);
    out += head;
    out += r.name;
    out += ": ";
    out += r.detail;
    out += '\n';
  }
  return out;
}

bool all_passed(const std::vector<CriterionResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.passed; });
}

}  // namespace maxprob
