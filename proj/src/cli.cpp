#include "maxprob/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "maxprob/acceptance.hpp"
#include "maxprob/bernoulli_lab.hpp"
#include "maxprob/error.hpp"
#include "maxprob/json_io.hpp"
#include "maxprob/mpbound.hpp"
#include "maxprob/nn_toy.hpp"
#include "maxprob/objectives.hpp"
#include "maxprob/optimize.hpp"

namespace maxprob {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Level { Error, Warn, Info, Debug };

struct Globals {
  std::uint64_t seed = 0;
  std::string out;
  std::string format;
  std::string log_level = "warn";
};

class Log {
 public:
  Log(const std::string& level, std::ostream& err) : err_(err) {
    if (level == "error") level_ = Level::Error;
    else if (level == "info") level_ = Level::Info;
    else if (level == "debug") level_ = Level::Debug;
  }
  void info(const std::string& msg) const { emit(Level::Info, "info", msg); }
  void debug(const std::string& msg) const { emit(Level::Debug, "debug", msg); }
  void warn(const std::string& msg) const { emit(Level::Warn, "warn", msg); }

 private:
  void emit(Level l, const char* tag, const std::string& msg) const {
    if (l <= level_) err_ << "[" << tag << "] " << msg << "\n";
  }
  std::ostream& err_;
  Level level_ = Level::Warn;
};

FiniteDistribution load_distribution(const std::string& path) {
  return distribution_from_json(read_json_file(path));
}

void require_single_stdin(std::initializer_list<const std::string*> paths) {
  int n = 0;
  for (const auto* p : paths)
    if (p && *p == "-") ++n;
  if (n > 1) throw UsageError("at most one input may be read from stdin");
}

FiniteDistribution prior_or_uniform(const std::string& path, const OutcomeRange& range) {
  if (path.empty()) return FiniteDistribution::uniform(range);
  return load_distribution(path);
}

std::string format_or(const Globals& g, const std::string& fallback,
                      std::initializer_list<const char*> allowed) {
  const std::string f = g.format.empty() ? fallback : g.format;
  for (const char* a : allowed)
    if (f == a) return f;
  throw UsageError("--format " + f + " is not supported by this subcommand");
}

void emit(const Globals& g, std::ostream& out, const std::string& body) {
  if (g.out.empty()) {
    out << body;
    return;
  }
  std::ofstream file(g.out, std::ios::binary);
  if (!file) throw Error(ErrorCode::FileNotFound, "cannot write '" + g.out + "'");
  file << body;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, end - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string("cannot parse ") + what + " '" + text + "'");
    }
    start = end + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------

struct BoundArgs {
  std::string prior, conditional = "-";
  bool uniform_prior = false;
  double alpha = 0.0;
};

void add_bound_inputs(CLI::App* sub, BoundArgs& a) {
  auto* p = sub->add_option("--prior", a.prior, "prior distribution JSON ('-' for stdin)");
  auto* u = sub->add_flag("--uniform-prior", a.uniform_prior, "use the uniform prior on the conditional's range");
  p->excludes(u);
  sub->add_option("--conditional", a.conditional, "conditional distribution JSON ('-' for stdin)")
      ->capture_default_str();
}

std::pair<FiniteDistribution, FiniteDistribution> bound_inputs(const BoundArgs& a) {
  if (a.prior.empty() && !a.uniform_prior) throw UsageError("one of --prior or --uniform-prior is required");
  require_single_stdin({&a.prior, &a.conditional});
  FiniteDistribution cond = load_distribution(a.conditional);
  FiniteDistribution prior = a.uniform_prior ? FiniteDistribution::uniform(cond.range())
                                             : load_distribution(a.prior);
  return {std::move(prior), std::move(cond)};
}

std::string run_bound(const BoundArgs& a, const Globals& g) {
  format_or(g, "json", {"json"});
  const auto [prior, cond] = bound_inputs(a);
  const BoundResult b = max_probability(prior, cond);
  const Json j{{"log_value", b.log_max_probability},
               {"value", std::exp(b.log_max_probability)},
               {"argmin", cond.range().label(b.argmin_outcome)}};
  return dump_json(j) + "\n";
}

std::string run_soft_bound(const BoundArgs& a, const Globals& g) {
  format_or(g, "json", {"json"});
  const auto [prior, cond] = bound_inputs(a);
  const double lp = softmax_probability(prior, cond, a.alpha);
  const BoundResult b = max_probability(prior, cond);
  const Json j{{"log_value", lp},
               {"value", std::exp(lp)},
               {"argmin", cond.range().label(b.argmin_outcome)},
               {"alpha", a.alpha}};
  return dump_json(j) + "\n";
}

struct SkeletonArgs {
  std::string dist = "-";
  double alpha = 1.0;
};

std::string run_skeleton(const SkeletonArgs& a, const Globals& g) {
  format_or(g, "json", {"json"});
  return dump_json(to_json(alpha_skeleton(load_distribution(a.dist), a.alpha))) + "\n";
}

struct ObjectiveArgs {
  std::string kind = "likelihood";
  std::string assumption = "cond-independent";
  double alpha = 1.0;
  std::string model, oracle, prior;
};

std::string run_objective(const ObjectiveArgs& a, const Globals& g) {
  format_or(g, "json", {"json"});
  require_single_stdin({&a.model, &a.oracle, &a.prior});
  const auto model = load_distribution(a.model);
  const auto oracle = load_distribution(a.oracle);
  const ObjectiveConfig cfg{parse_objective_kind(a.kind), parse_assumption(a.assumption), a.alpha,
                            prior_or_uniform(a.prior, model.range())};
  const ObjectiveValue v = evaluate(cfg, model, oracle);
  Json grad = Json::array();
  if (std::isfinite(v.value)) {
    for (double d : gradient(cfg, model, oracle).d_logp) grad.push_back(d);
  }
  Json dropped = Json::array();
  for (const auto& s : v.dropped_constant_terms) dropped.push_back(s);
  return dump_json(Json{{"value", v.value}, {"gradient_logp", grad}, {"dropped_constants", dropped}}) + "\n";
}

struct OptimizeArgs {
  std::string objective = "intersection";
  std::string assumption = "cond-independent";
  double alpha = 2.0;
  std::string param = "sigmoid";
  std::string theta0;
  std::string theta_star;
  std::string oracle, prior;
  double step = 0.1;
  std::size_t max_iters = 10000;
  double grad_tol = 1e-8;
};

std::string run_optimize(const OptimizeArgs& a, const Globals& g, const Log& log) {
  const std::string format = format_or(g, "csv", {"csv", "json"});
  if (a.oracle.empty() == a.theta_star.empty())
    throw UsageError("exactly one of --oracle or --theta-star is required");
  require_single_stdin({&a.oracle, &a.prior});

  std::optional<FiniteDistribution> oracle;
  OutcomeRange range = OutcomeRange::indexed(2);
  if (!a.oracle.empty()) {
    oracle = load_distribution(a.oracle);
    range = oracle->range();
  } else if (a.param == "softmax") {
    range = OutcomeRange::indexed(parse_list(a.theta_star, "--theta-star").size());
  } else {
    range = OutcomeRange({"0", "1"});
  }
  const Parameterization p = a.param == "sigmoid" ? Parameterization::sigmoid_bernoulli(range)
                                                  : Parameterization::softmax_logits(range);
  if (!oracle) oracle = p.apply(parse_list(a.theta_star, "--theta-star"));

  std::vector<double> theta0 =
      a.theta0.empty() ? std::vector<double>(p.dim(), 0.0) : parse_list(a.theta0, "--theta0");
  AscentConfig cfg;
  cfg.step_size = a.step;
  cfg.max_iters = a.max_iters;
  cfg.grad_tol = a.grad_tol;
  cfg.seed = g.seed;
  const ObjectiveConfig obj{parse_objective_kind(a.objective), parse_assumption(a.assumption), a.alpha,
                            prior_or_uniform(a.prior, range)};
  const AscentTrace trace = ascend(obj, *oracle, p, std::move(theta0), cfg);
  log.info("optimize: " + to_string(trace.status) + " after " + std::to_string(trace.records.size()) +
           " gradient evaluations");

  if (format == "json") {
    Json records = Json::array();
    for (const auto& r : trace.records) {
      Json th = Json::array();
      for (double t : r.theta) th.push_back(t);
      records.push_back(Json{{"theta", th}, {"value", r.value}, {"gradnorm", r.grad_norm}});
    }
    Json final_theta = Json::array();
    for (double t : trace.last().theta) final_theta.push_back(t);
    return dump_json(Json{{"status", to_string(trace.status)},
                          {"monotone", trace.monotone},
                          {"iterations", trace.records.size()},
                          {"theta", final_theta},
                          {"value", trace.last().value},
                          {"trace", records}}) +
           "\n";
  }
  std::string csv = "iter";
  if (p.dim() == 1) {
    csv += ",theta";
  } else {
    for (std::size_t k = 0; k < p.dim(); ++k) csv += ",theta_" + std::to_string(k);
  }
  csv += ",value,gradnorm\n";
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    csv += std::to_string(i);
    for (double t : r.theta) csv += "," + format_real(t);
    csv += "," + format_real(r.value) + "," + format_real(r.grad_norm) + "\n";
  }
  return csv;
}

struct SweepArgs {
  double theta_star = 0.0;
  std::string assumption = "cond-independent";
  std::string alphas = "1,2,4,16,256";
  std::vector<std::string> objectives{"likelihood", "intersection"};
  double grid_min = -8.0, grid_max = 8.0, grid_step = 0.01;
  std::string prior;
  std::string summary;
};

std::string run_sweep_cmd(const SweepArgs& a, const Globals& g, const Log& log) {
  const std::string format = format_or(g, "csv", {"csv", "json"});
  SweepSpec spec;
  spec.theta_star = a.theta_star;
  spec.assumption = parse_assumption(a.assumption);
  spec.alphas = parse_list(a.alphas, "--alphas");
  spec.objectives.clear();
  for (const auto& o : a.objectives) spec.objectives.push_back(parse_objective_kind(o));
  spec.theta_min = a.grid_min;
  spec.theta_max = a.grid_max;
  spec.theta_step = a.grid_step;
  if (!a.prior.empty()) spec.prior = load_distribution(a.prior);
  const SweepReport report = run_sweep(spec);
  log.info("sweep: " + std::to_string(report.thetas.size()) + " grid points, " +
           std::to_string(report.curves.size()) + " curves");
  const std::string summary = dump_json(sweep_summary_json(report)) + "\n";
  if (format == "json") return summary;

  std::string sidecar = a.summary;
  if (sidecar.empty() && !g.out.empty()) {
    std::filesystem::path p(g.out);
    p.replace_extension(p.extension() == ".json" ? ".summary.json" : ".json");
    sidecar = p.string();
  }
  if (!sidecar.empty()) {
    std::ofstream file(sidecar, std::ios::binary);
    if (!file) throw Error(ErrorCode::FileNotFound, "cannot write '" + sidecar + "'");
    file << summary;
  }
  return sweep_csv(report);
}

struct TrainArgs {
  std::string loss = "intersection";
  std::optional<double> alpha;
  std::optional<double> lambda;
  std::size_t epochs = 200;
  double step = 0.05;
  std::size_t batch_size = 0;
  std::size_t classes = 3;
};

std::string run_train(const TrainArgs& a, const Globals& g, const Log& log) {
  const std::string format = format_or(g, "json", {"json", "csv"});
  TrainConfig cfg;
  if (a.loss == "intersection") {
    if (a.lambda) throw UsageError("--lambda applies only to --loss ce-l2");
    cfg.loss = {LossMode::Kind::Intersection, a.alpha.value_or(1.0), 0.0};
  } else {
    if (a.alpha) throw UsageError("--alpha applies only to --loss intersection");
    cfg.loss = {LossMode::Kind::CrossEntropyL2, 1.0, a.lambda.value_or(0.0)};
  }
  cfg.epochs = a.epochs;
  cfg.step = a.step;
  cfg.seed = g.seed;
  cfg.batch_size = a.batch_size;
  cfg.num_classes = a.classes;
  const TrainReport report = train_toy(cfg);
  log.info("train-toy: final train loss " + format_real(report.epochs.back().train_loss) +
           ", test acc " + format_real(report.epochs.back().test_acc));
  if (format == "json") return dump_json(to_json(report)) + "\n";
  std::string csv = "epoch,train_loss,test_loss,train_acc,test_acc,reg_term,train_objective\n";
  for (const auto& e : report.epochs) {
    csv += std::to_string(e.epoch) + "," + format_real(e.train_loss) + "," + format_real(e.test_loss) +
           "," + format_real(e.train_acc) + "," + format_real(e.test_acc) + "," +
           format_real(e.reg_term) + "," + format_real(e.train_objective) + "\n";
  }
  return csv;
}

struct CheckArgs {
  std::string artifacts;
};

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Maximum-probability bounds, objectives and experiments", "maxprob"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "seed for every stochastic routine");
  app.add_option("--out", g.out, "write the primary output to this file");
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--log-level", g.log_level, "stderr verbosity")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));

  BoundArgs bound_args;
  auto* bound = app.add_subcommand("bound", "exact maximum probability of an event");
  add_bound_inputs(bound, bound_args);

  BoundArgs soft_args;
  auto* soft = app.add_subcommand("soft-bound", "softmax probability P_alpha");
  add_bound_inputs(soft, soft_args);
  soft->add_option("--alpha", soft_args.alpha, "alpha > 0")->required();

  SkeletonArgs skel_args;
  auto* skel = app.add_subcommand("skeleton", "alpha-skeleton of a distribution");
  skel->add_option("--dist", skel_args.dist, "distribution JSON ('-' for stdin)")->capture_default_str();
  skel->add_option("--alpha", skel_args.alpha, "exponent")->required();

  ObjectiveArgs obj_args;
  auto* obj = app.add_subcommand("objective", "objective value and log-probability gradient");
  obj->add_option("--kind", obj_args.kind)->check(CLI::IsMember({"likelihood", "intersection"}));
  obj->add_option("--assumption", obj_args.assumption)
      ->check(CLI::IsMember({"cond-independent", "oracle-subset", "independent", "subset"}));
  obj->add_option("--alpha", obj_args.alpha);
  obj->add_option("--model", obj_args.model, "model conditional JSON")->required();
  obj->add_option("--oracle", obj_args.oracle, "oracle conditional JSON")->required();
  obj->add_option("--prior", obj_args.prior, "prior JSON (uniform when omitted)");

  OptimizeArgs opt_args;
  auto* opt = app.add_subcommand("optimize", "fixed-step gradient ascent; CSV trace");
  opt->add_option("--objective", opt_args.objective)->check(CLI::IsMember({"likelihood", "intersection"}));
  opt->add_option("--assumption", opt_args.assumption)
      ->check(CLI::IsMember({"cond-independent", "oracle-subset", "independent", "subset"}));
  opt->add_option("--alpha", opt_args.alpha);
  opt->add_option("--param", opt_args.param)->check(CLI::IsMember({"sigmoid", "softmax"}));
  opt->add_option("--theta0", opt_args.theta0, "comma-separated start (zeros by default)");
  auto* ts = opt->add_option("--theta-star", opt_args.theta_star, "oracle parameters, comma-separated");
  auto* oo = opt->add_option("--oracle", opt_args.oracle, "oracle conditional JSON");
  ts->excludes(oo);
  opt->add_option("--prior", opt_args.prior, "prior JSON (uniform when omitted)");
  opt->add_option("--step", opt_args.step);
  opt->add_option("--max-iters", opt_args.max_iters);
  opt->add_option("--grad-tol", opt_args.grad_tol);

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep-bernoulli", "objective curves over a sigmoid parameter grid");
  sweep->add_option("--theta-star", sweep_args.theta_star)->required();
  sweep->add_option("--assumption", sweep_args.assumption)
      ->check(CLI::IsMember({"cond-independent", "oracle-subset", "independent", "subset"}));
  sweep->add_option("--alphas", sweep_args.alphas, "comma-separated");
  sweep->add_option("--objectives", sweep_args.objectives)
      ->delimiter(',')
      ->check(CLI::IsMember({"likelihood", "intersection"}));
  sweep->add_option("--grid-min", sweep_args.grid_min);
  sweep->add_option("--grid-max", sweep_args.grid_max);
  sweep->add_option("--grid-step", sweep_args.grid_step);
  sweep->add_option("--prior", sweep_args.prior, "prior JSON on {0, 1}");
  sweep->add_option("--summary", sweep_args.summary, "path of the JSON diagnostics sidecar");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train-toy", "train the toy classifier");
  train_cmd->add_option("--loss", train_args.loss)->check(CLI::IsMember({"intersection", "ce-l2"}));
  train_cmd->add_option("--alpha", train_args.alpha);
  train_cmd->add_option("--lambda", train_args.lambda);
  train_cmd->add_option("--epochs", train_args.epochs);
  train_cmd->add_option("--step", train_args.step);
  train_cmd->add_option("--batch-size", train_args.batch_size, "0 for full batch");
  train_cmd->add_option("--classes", train_args.classes);

  CheckArgs check_args;
  auto* check = app.add_subcommand("check", "run the acceptance suite and print a pass/fail table");
  check->add_option("--artifacts", check_args.artifacts, "directory for training reports");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }

  const Log log(g.log_level, err);
  try {
    std::string body;
    if (bound->parsed()) {
      body = run_bound(bound_args, g);
    } else if (soft->parsed()) {
      body = run_soft_bound(soft_args, g);
    } else if (skel->parsed()) {
      body = run_skeleton(skel_args, g);
    } else if (obj->parsed()) {
      body = run_objective(obj_args, g);
    } else if (opt->parsed()) {
      body = run_optimize(opt_args, g, log);
    } else if (sweep->parsed()) {
      body = run_sweep_cmd(sweep_args, g, log);
    } else if (train_cmd->parsed()) {
      body = run_train(train_args, g, log);
    } else if (check->parsed()) {
      AcceptanceOptions opts;
      opts.seed = g.seed;
      if (!check_args.artifacts.empty()) opts.artifact_dir = check_args.artifacts;
      const auto results = run_acceptance(opts);
      emit(g, out, render_table(results));
      if (!all_passed(results)) {
        err << dump_json(Json{{"error", "CheckFailed"}, {"detail", "one or more criteria failed"}}) << "\n";
        return 1;
      }
      return 0;
    }
    emit(g, out, body);
    return 0;
  } catch (const UsageError& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << dump_json(Json{{"error", std::string(code_name(e.code()))}, {"detail", e.what()}}) << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << dump_json(Json{{"error", "InternalError"}, {"detail", e.what()}}) << "\n";
    return 1;
  }
}

}  // namespace maxprob
