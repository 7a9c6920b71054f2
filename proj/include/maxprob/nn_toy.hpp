#pragma once

// A small 2-16-16-K rectifier network trained with the intersection loss
// (cross-entropy plus a power-mean regularizer realized by a
// HyperNormalization head) or with cross-entropy plus l2 weight decay.
// Backpropagation is written out by hand.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "maxprob/json_io.hpp"

namespace maxprob {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
};

// HN(x; alpha)_i = exp(x_i) / sum_j exp(alpha * x_j), evaluated through
// log HN_i = x_i - logsumexp(alpha * x). Entries are positive; they sum to
// one only when alpha == 1, where HN is the softmax.
std::vector<double> hn_forward(std::span<const double> logits, double alpha);
std::vector<double> hn_log_forward(std::span<const double> logits, double alpha);

std::vector<double> softmax(std::span<const double> logits);

// -(1/alpha) log sum_y softmax(logits)_y^alpha. Lies in
// [0, log K * (alpha - 1) / alpha] for alpha >= 1.
double power_mean_regularizer(std::span<const double> logits, double alpha);

// Mean over the batch of
//   -[ log softmax(x)_y - (1/alpha) log sum_y' softmax(x)_y'^alpha ].
double intersection_loss(const Matrix& batch_logits, std::span<const std::size_t> labels,
                         double alpha);

// The same loss computed through the HN head: logits are shifted so that
// sum_j exp(alpha * x_j) = 1 and the loss is -mean log HN(x; alpha)_y.
double intersection_loss_hn(const Matrix& batch_logits, std::span<const std::size_t> labels,
                            double alpha);

double mean_cross_entropy(const Matrix& batch_logits, std::span<const std::size_t> labels);

struct DenseLayer {
  Matrix weights;  // out x in
  std::vector<double> bias;
};

inline constexpr std::size_t kInputDim = 2;
inline constexpr std::size_t kHiddenDim = 16;

class ToyNet {
 public:
  // He-normal weights, zero biases.
  static ToyNet init(std::size_t num_classes, std::uint64_t seed, double alpha = 1.0);

  std::size_t num_classes() const noexcept { return layers_[2].bias.size(); }
  double alpha() const noexcept { return alpha_; }
  void set_alpha(double alpha);

  std::vector<double> logits(std::span<const double> x) const;
  // HN(logits; alpha).
  std::vector<double> forward(std::span<const double> x) const;
  double head_mass(std::span<const double> x) const;

  std::array<DenseLayer, 3>& layers() noexcept { return layers_; }
  const std::array<DenseLayer, 3>& layers() const noexcept { return layers_; }

  std::size_t parameter_count() const;
  std::vector<double> flatten() const;
  void assign(std::span<const double> params);

 private:
  std::array<DenseLayer, 3> layers_;
  double alpha_ = 1.0;
};

struct ToyDataset {
  Matrix points;  // N x 2
  std::vector<std::size_t> labels;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::size_t num_classes = 3;

  // K Gaussian blobs with centres on a circle of the given radius at angles
  // 2*pi*k/K, unit isotropic noise. Labels cycle 0..K-1; the first n_train
  // points form the training split.
  static ToyDataset blobs(std::uint64_t seed, std::size_t n_train = 512,
                          std::size_t n_test = 512, std::size_t num_classes = 3,
                          double radius = 2.0, double noise = 1.0);
};

struct LossMode {
  enum class Kind { Intersection, CrossEntropyL2 };
  Kind kind = Kind::Intersection;
  double alpha = 1.0;   // intersection
  double lambda = 0.0;  // cross-entropy + lambda * sum of squared weights

  void validate() const;
};

std::string to_string(LossMode::Kind kind);

struct NetGradients {
  std::array<DenseLayer, 3> layers;
};

struct LossAndGradient {
  double loss;
  NetGradients grads;
};

// Training objective on the given sample indices and its exact gradient.
LossAndGradient loss_and_gradient(const ToyNet& net, const ToyDataset& data,
                                  std::span<const std::size_t> indices, const LossMode& mode);
double objective_loss(const ToyNet& net, const ToyDataset& data,
                      std::span<const std::size_t> indices, const LossMode& mode);

struct TensorCheck {
  std::string name;
  // ||fd - analytic|| / max(1e-12, ||analytic||, ||fd||) over the tensor.
  double rel_error;
};

std::vector<TensorCheck> gradient_check(const ToyNet& net, const ToyDataset& data,
                                        std::span<const std::size_t> indices,
                                        const LossMode& mode, double h = 1e-5);

struct TrainConfig {
  LossMode loss;
  std::size_t epochs = 200;
  double step = 0.05;
  std::uint64_t seed = 0;
  std::size_t batch_size = 0;  // 0 = full batch
  std::size_t num_classes = 3;
};

struct EpochRecord {
  std::size_t epoch;
  double train_loss;  // cross-entropy
  double test_loss;
  double train_acc;
  double test_acc;
  double reg_term;
  double train_objective;  // the loss being minimized
};

struct TrainReport {
  TrainConfig config;
  std::vector<EpochRecord> epochs;  // epoch 0 is the untrained net
  std::string digest;
};

// Full-batch (or seeded mini-batch) gradient descent from the given network.
// Mini-batch order is drawn from cfg.seed + 2.
TrainReport train(ToyNet net, const ToyDataset& data, const TrainConfig& cfg);

// Whole experiment from one seed: dataset from cfg.seed, initial weights
// from cfg.seed + 1, then train().
TrainReport train_toy(const TrainConfig& cfg);

// FNV-1a over the IEEE-754 bits of every parameter, as 16 hex digits.
std::string weights_digest(const ToyNet& net);

Json to_json(const TrainReport& report);

}  // namespace maxprob
