#include "maxprob/nn_toy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <numeric>

#include "maxprob/error.hpp"
#include "maxprob/logspace.hpp"
#include "maxprob/rng.hpp"

namespace maxprob {

namespace {

void require_positive_alpha(double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::NonPositiveAlpha, "alpha must be > 0");
}

void require_finite_logits(std::span<const double> logits) {
  for (double x : logits)
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteLogits, "logits must be finite");
}

void require_labels(const Matrix& logits, std::span<const std::size_t> labels) {
  if (labels.size() != logits.rows)
    throw Error(ErrorCode::DimensionMismatch, "one label per batch row is required");
  for (std::size_t y : labels)
    if (y >= logits.cols) throw Error(ErrorCode::LabelOutOfRange, "label out of range");
}

std::vector<double> scaled(std::span<const double> x, double a) {
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) v *= a;
  return out;
}

DenseLayer zero_like(const DenseLayer& l) {
  return {Matrix(l.weights.rows, l.weights.cols), std::vector<double>(l.bias.size(), 0.0)};
}

void affine(const DenseLayer& l, std::span<const double> in, std::vector<double>& out) {
  out.assign(l.bias.begin(), l.bias.end());
  for (std::size_t o = 0; o < l.weights.rows; ++o)
    for (std::size_t i = 0; i < l.weights.cols; ++i) out[o] += l.weights(o, i) * in[i];
}

void relu(std::vector<double>& v) {
  for (double& x : v) x = std::max(0.0, x);
}

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

constexpr const char* kTensorNames[6] = {"W1", "b1", "W2", "b2", "W3", "b3"};

}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
  const double lse = logsumexp(logits);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(logits[i] - lse);
  return out;
}

std::vector<double> hn_log_forward(std::span<const double> logits, double alpha) {
  require_positive_alpha(alpha);
  require_finite_logits(logits);
  const double lse = logsumexp(scaled(logits, alpha));
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

std::vector<double> hn_forward(std::span<const double> logits, double alpha) {
  std::vector<double> out = hn_log_forward(logits, alpha);
  for (double& v : out) v = std::exp(v);
  return out;
}

double power_mean_regularizer(std::span<const double> logits, double alpha) {
  require_positive_alpha(alpha);
  // log sum p^alpha = LSE(alpha x) - alpha LSE(x)
  const double lse = logsumexp(logits);
  return -(logsumexp(scaled(logits, alpha)) - alpha * lse) / alpha;
}

double intersection_loss(const Matrix& batch_logits, std::span<const std::size_t> labels,
                         double alpha) {
  require_positive_alpha(alpha);
  require_labels(batch_logits, labels);
  double total = 0.0;
  for (std::size_t b = 0; b < batch_logits.rows; ++b) {
    const auto x = batch_logits.row(b);
    require_finite_logits(x);
    const double log_p = x[labels[b]] - logsumexp(x);
    total += log_p + power_mean_regularizer(x, alpha);
  }
  return -total / static_cast<double>(batch_logits.rows);
}

double intersection_loss_hn(const Matrix& batch_logits, std::span<const std::size_t> labels,
                            double alpha) {
  require_positive_alpha(alpha);
  require_labels(batch_logits, labels);
  double total = 0.0;
  for (std::size_t b = 0; b < batch_logits.rows; ++b) {
    const auto x = batch_logits.row(b);
    require_finite_logits(x);
    const double shift = logsumexp(scaled(x, alpha)) / alpha;
    std::vector<double> u(x.begin(), x.end());
    for (double& v : u) v -= shift;
    total += hn_log_forward(u, alpha)[labels[b]];
  }
  return -total / static_cast<double>(batch_logits.rows);
}

double mean_cross_entropy(const Matrix& batch_logits, std::span<const std::size_t> labels) {
  require_labels(batch_logits, labels);
  double total = 0.0;
  for (std::size_t b = 0; b < batch_logits.rows; ++b) {
    const auto x = batch_logits.row(b);
    total += logsumexp(x) - x[labels[b]];
  }
  return total / static_cast<double>(batch_logits.rows);
}

ToyNet ToyNet::init(std::size_t num_classes, std::uint64_t seed, double alpha) {
  if (num_classes < 2) throw Error(ErrorCode::InvalidArgument, "need at least two classes");
  ToyNet net;
  net.set_alpha(alpha);
  Rng rng(seed);
  const std::size_t dims[4] = {kInputDim, kHiddenDim, kHiddenDim, num_classes};
  for (std::size_t l = 0; l < 3; ++l) {
    DenseLayer& layer = net.layers_[l];
    layer.weights = Matrix(dims[l + 1], dims[l]);
    layer.bias.assign(dims[l + 1], 0.0);
    const double scale = std::sqrt(2.0 / static_cast<double>(dims[l]));
    for (double& w : layer.weights.data) w = scale * rng.normal();
  }
  return net;
}

void ToyNet::set_alpha(double alpha) {
  require_positive_alpha(alpha);
  alpha_ = alpha;
}

std::vector<double> ToyNet::logits(std::span<const double> x) const {
  if (x.size() != kInputDim) throw Error(ErrorCode::DimensionMismatch, "input must be 2-D");
  std::vector<double> h1, h2, z;
  affine(layers_[0], x, h1);
  relu(h1);
  affine(layers_[1], h1, h2);
  relu(h2);
  affine(layers_[2], h2, z);
  return z;
}

std::vector<double> ToyNet::forward(std::span<const double> x) const {
  return hn_forward(logits(x), alpha_);
}

double ToyNet::head_mass(std::span<const double> x) const {
  const auto out = forward(x);
  return std::accumulate(out.begin(), out.end(), 0.0);
}

std::size_t ToyNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.data.size() + l.bias.size();
  return n;
}

std::vector<double> ToyNet::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& l : layers_) {
    out.insert(out.end(), l.weights.data.begin(), l.weights.data.end());
    out.insert(out.end(), l.bias.begin(), l.bias.end());
  }
  return out;
}

void ToyNet::assign(std::span<const double> params) {
  if (params.size() != parameter_count())
    throw Error(ErrorCode::DimensionMismatch, "parameter vector has the wrong length");
  std::size_t k = 0;
  for (auto& l : layers_) {
    for (double& w : l.weights.data) w = params[k++];
    for (double& b : l.bias) b = params[k++];
  }
}

ToyDataset ToyDataset::blobs(std::uint64_t seed, std::size_t n_train, std::size_t n_test,
                             std::size_t num_classes, double radius, double noise) {
  if (num_classes < 2) throw Error(ErrorCode::InvalidArgument, "need at least two classes");
  ToyDataset d;
  d.num_classes = num_classes;
  const std::size_t n = n_train + n_test;
  d.points = Matrix(n, kInputDim);
  d.labels.resize(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = i % num_classes;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(num_classes);
    d.labels[i] = k;
    d.points(i, 0) = radius * std::cos(angle) + noise * rng.normal();
    d.points(i, 1) = radius * std::sin(angle) + noise * rng.normal();
  }
  d.train.resize(n_train);
  std::iota(d.train.begin(), d.train.end(), std::size_t{0});
  d.test.resize(n_test);
  std::iota(d.test.begin(), d.test.end(), n_train);
  return d;
}

void LossMode::validate() const {
  if (kind == Kind::Intersection) require_positive_alpha(alpha);
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
}

std::string to_string(LossMode::Kind kind) {
  return kind == LossMode::Kind::Intersection ? "intersection" : "ce-l2";
}

LossAndGradient loss_and_gradient(const ToyNet& net, const ToyDataset& data,
                                  std::span<const std::size_t> indices, const LossMode& mode) {
  mode.validate();
  if (indices.empty()) throw Error(ErrorCode::InvalidArgument, "empty batch");
  const auto& L = net.layers();
  NetGradients g{{zero_like(L[0]), zero_like(L[1]), zero_like(L[2])}};
  const double inv_b = 1.0 / static_cast<double>(indices.size());
  const bool intersection = mode.kind == LossMode::Kind::Intersection;

  double loss = 0.0;
  std::vector<double> h1, a1, h2, a2, z, dz, da2, dh2, da1, dh1;
  for (std::size_t idx : indices) {
    const auto x = data.points.row(idx);
    const std::size_t y = data.labels.at(idx);
    affine(L[0], x, h1);
    a1 = h1;
    relu(a1);
    affine(L[1], a1, h2);
    a2 = h2;
    relu(a2);
    affine(L[2], a2, z);
    if (y >= z.size()) throw Error(ErrorCode::LabelOutOfRange, "label out of range");

    // d(-log p_y + R)/dz = softmax(alpha z) - onehot(y); alpha = 1 for CE.
    const double a = intersection ? mode.alpha : 1.0;
    const double lse_a = logsumexp(scaled(z, a));
    loss += -(z[y] - lse_a / a);
    dz.resize(z.size());
    for (std::size_t k = 0; k < z.size(); ++k)
      dz[k] = (std::exp(a * z[k] - lse_a) - (k == y ? 1.0 : 0.0)) * inv_b;

    da2.assign(a2.size(), 0.0);
    for (std::size_t o = 0; o < z.size(); ++o) {
      g.layers[2].bias[o] += dz[o];
      for (std::size_t i = 0; i < a2.size(); ++i) {
        g.layers[2].weights(o, i) += dz[o] * a2[i];
        da2[i] += L[2].weights(o, i) * dz[o];
      }
    }
    dh2.resize(h2.size());
    for (std::size_t i = 0; i < h2.size(); ++i) dh2[i] = h2[i] > 0.0 ? da2[i] : 0.0;
    da1.assign(a1.size(), 0.0);
    for (std::size_t o = 0; o < h2.size(); ++o) {
      g.layers[1].bias[o] += dh2[o];
      for (std::size_t i = 0; i < a1.size(); ++i) {
        g.layers[1].weights(o, i) += dh2[o] * a1[i];
        da1[i] += L[1].weights(o, i) * dh2[o];
      }
    }
    dh1.resize(h1.size());
    for (std::size_t i = 0; i < h1.size(); ++i) dh1[i] = h1[i] > 0.0 ? da1[i] : 0.0;
    for (std::size_t o = 0; o < h1.size(); ++o) {
      g.layers[0].bias[o] += dh1[o];
      for (std::size_t i = 0; i < x.size(); ++i) g.layers[0].weights(o, i) += dh1[o] * x[i];
    }
  }
  loss *= inv_b;

  if (mode.kind == LossMode::Kind::CrossEntropyL2 && mode.lambda > 0.0) {
    for (std::size_t l = 0; l < 3; ++l) {
      const auto& w = L[l].weights.data;
      auto& gw = g.layers[l].weights.data;
      for (std::size_t k = 0; k < w.size(); ++k) {
        loss += mode.lambda * w[k] * w[k];
        gw[k] += 2.0 * mode.lambda * w[k];
      }
    }
  }
  if (!std::isfinite(loss)) throw Error(ErrorCode::NonFiniteEncountered, "loss is not finite");
  return {loss, std::move(g)};
}

double objective_loss(const ToyNet& net, const ToyDataset& data,
                      std::span<const std::size_t> indices, const LossMode& mode) {
  return loss_and_gradient(net, data, indices, mode).loss;
}

std::vector<TensorCheck> gradient_check(const ToyNet& net, const ToyDataset& data,
                                        std::span<const std::size_t> indices,
                                        const LossMode& mode, double h) {
  const LossAndGradient analytic = loss_and_gradient(net, data, indices, mode);
  std::vector<const std::vector<double>*> tensors;
  for (const auto& l : analytic.grads.layers) {
    tensors.push_back(&l.weights.data);
    tensors.push_back(&l.bias);
  }

  ToyNet probe = net;
  std::vector<double> params = net.flatten();
  std::vector<TensorCheck> out;
  std::size_t offset = 0;
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    const auto& an = *tensors[t];
    double diff2 = 0.0, an2 = 0.0, fd2 = 0.0;
    for (std::size_t k = 0; k < an.size(); ++k) {
      const std::size_t p = offset + k;
      const double saved = params[p];
      params[p] = saved + h;
      probe.assign(params);
      const double up = objective_loss(probe, data, indices, mode);
      params[p] = saved - h;
      probe.assign(params);
      const double down = objective_loss(probe, data, indices, mode);
      params[p] = saved;
      const double fd = (up - down) / (2.0 * h);
      diff2 += (fd - an[k]) * (fd - an[k]);
      an2 += an[k] * an[k];
      fd2 += fd * fd;
    }
    offset += an.size();
    const double denom = std::max({1e-12, std::sqrt(an2), std::sqrt(fd2)});
    out.push_back({kTensorNames[t], std::sqrt(diff2) / denom});
  }
  return out;
}

namespace {

struct SplitMetrics {
  double ce = 0.0;
  double acc = 0.0;
  double reg = 0.0;
};

SplitMetrics split_metrics(const ToyNet& net, const ToyDataset& data,
                           std::span<const std::size_t> indices, const LossMode& mode) {
  SplitMetrics m;
  for (std::size_t idx : indices) {
    const auto z = net.logits(data.points.row(idx));
    const std::size_t y = data.labels[idx];
    m.ce += logsumexp(z) - z[y];
    m.acc += argmax(z) == y ? 1.0 : 0.0;
    if (mode.kind == LossMode::Kind::Intersection) m.reg += power_mean_regularizer(z, mode.alpha);
  }
  const double n = static_cast<double>(indices.size());
  m.ce /= n;
  m.acc /= n;
  m.reg /= n;
  if (mode.kind == LossMode::Kind::CrossEntropyL2) {
    m.reg = 0.0;
    for (const auto& l : net.layers())
      for (double w : l.weights.data) m.reg += mode.lambda * w * w;
  }
  return m;
}

EpochRecord record_epoch(std::size_t epoch, const ToyNet& net, const ToyDataset& data,
                         const LossMode& mode) {
  const SplitMetrics tr = split_metrics(net, data, data.train, mode);
  const SplitMetrics te = split_metrics(net, data, data.test, mode);
  return {epoch, tr.ce, te.ce, tr.acc, te.acc, tr.reg,
          objective_loss(net, data, data.train, mode)};
}

void apply_step(ToyNet& net, const NetGradients& g, double step) {
  for (std::size_t l = 0; l < 3; ++l) {
    auto& layer = net.layers()[l];
    for (std::size_t k = 0; k < layer.weights.data.size(); ++k)
      layer.weights.data[k] -= step * g.layers[l].weights.data[k];
    for (std::size_t k = 0; k < layer.bias.size(); ++k)
      layer.bias[k] -= step * g.layers[l].bias[k];
  }
}

}  // namespace

TrainReport train(ToyNet net, const ToyDataset& data, const TrainConfig& cfg) {
  cfg.loss.validate();
  if (!(cfg.step > 0.0)) throw Error(ErrorCode::InvalidArgument, "step must be > 0");
  if (data.train.empty() || data.test.empty())
    throw Error(ErrorCode::InvalidArgument, "dataset needs train and test points");
  if (net.num_classes() != data.num_classes)
    throw Error(ErrorCode::DimensionMismatch, "network and dataset disagree on class count");
  if (cfg.loss.kind == LossMode::Kind::Intersection) net.set_alpha(cfg.loss.alpha);

  TrainReport report{cfg, {}, {}};
  report.epochs.push_back(record_epoch(0, net, data, cfg.loss));
  Rng shuffle_rng(cfg.seed + 2);
  std::vector<std::size_t> order = data.train;
  const std::size_t batch = cfg.batch_size == 0 ? order.size() : std::min(cfg.batch_size, order.size());

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (batch < order.size()) {
      // Fisher-Yates with the shared generator.
      for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[shuffle_rng.index(i + 1)]);
    }
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t len = std::min(batch, order.size() - start);
      const auto g = loss_and_gradient(net, data, std::span(order).subspan(start, len), cfg.loss);
      apply_step(net, g.grads, cfg.step);
    }
    report.epochs.push_back(record_epoch(epoch, net, data, cfg.loss));
  }
  report.digest = weights_digest(net);
  return report;
}

TrainReport train_toy(const TrainConfig& cfg) {
  const ToyDataset data = ToyDataset::blobs(cfg.seed, 512, 512, cfg.num_classes);
  return train(ToyNet::init(cfg.num_classes, cfg.seed + 1), data, cfg);
}

std::string weights_digest(const ToyNet& net) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (double w : net.flatten()) {
    std::uint64_t bits;
    std::memcpy(&bits, &w, sizeof bits);
    for (int byte = 0; byte < 8; ++byte) {
      hash ^= (bits >> (8 * byte)) & 0xffU;
      hash *= 1099511628211ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

Json to_json(const TrainReport& report) {
  const auto& c = report.config;
  Json config{{"loss", to_string(c.loss.kind)},
              {"alpha", c.loss.alpha},
              {"lambda", c.loss.lambda},
              {"epochs", c.epochs},
              {"step", c.step},
              {"seed", c.seed},
              {"batch_size", c.batch_size},
              {"num_classes", c.num_classes}};
  Json epochs = Json::array();
  for (const auto& e : report.epochs) {
    epochs.push_back(Json{{"epoch", e.epoch},
                          {"train_loss", e.train_loss},
                          {"test_loss", e.test_loss},
                          {"train_acc", e.train_acc},
                          {"test_acc", e.test_acc},
                          {"reg_term", e.reg_term},
                          {"train_objective", e.train_objective}});
  }
  return Json{{"config", config}, {"epochs", epochs}, {"digest", report.digest}};
}

}  // namespace maxprob
