#pragma once

#include <cstdint>
#include <vector>

#include "nilmgap/nn/layers.hpp"

namespace nilmgap::nn {

// Optimization knobs. Epochs, window lengths and the 70/15/15 split are the
// protocol; everything else here is a declared default that experiment
// configs may override. max_train_windows / max_val_windows bound the number
// of sliding windows the disaggregator fits draw from each split (0 = all),
// keeping desk-scale runs inside their time budget.
struct TrainConfig {
  std::size_t epochs = 25;
  std::size_t batch = 64;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  std::size_t max_train_windows = 2000;
  std::size_t max_val_windows = 400;
};

// Mean-square-error over every output element; the gradient uses the same
// mean reduction, so duplicating a sample inside a batch leaves the mean
// gradient unchanged.
double mse_loss(const Tensor& prediction, const Tensor& target,
                Tensor* gradient = nullptr);

class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t parameter_count, const TrainConfig& config);

  // One update over the network's current gradients.
  void step(Network& network);

 private:
  double learning_rate_;
  double beta1_;
  double beta2_;
  double epsilon_;
  std::uint64_t steps_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

struct Dataset {
  Tensor inputs;   // leading dimension = samples
  Tensor targets;
};

struct TrainHistory {
  std::vector<double> train_loss;  // per-epoch mean over minibatch losses
  std::vector<double> val_mse;     // per-epoch validation MSE
  std::size_t best_epoch = 0;      // epoch whose snapshot was kept
};

// Seeded-shuffle minibatch Adam for cfg.epochs epochs. After every epoch the
// validation MSE is recorded; the parameter snapshot with the lowest
// validation MSE (earliest on ties) is restored into the network before
// returning. Bit-reproducible for a fixed seed.
TrainHistory train(Network& network, const Dataset& train_data,
                   const Dataset& validation_data, const TrainConfig& config);

// Forward in fixed-size batches; returns predictions with the network's
// output shape per sample.
Tensor predict_batched(Network& network, const Tensor& inputs,
                       std::size_t batch = 256);

}  // namespace nilmgap::nn
