#include "nilmgap/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>

#include "nilmgap/rng.hpp"
#include "nilmgap/util.hpp"

namespace nilmgap::nn {

double mse_loss(const Tensor& prediction, const Tensor& target,
                Tensor* gradient) {
  if (prediction.shape() != target.shape()) {
    fail(ErrorCode::kShapeError, "loss: prediction/target shape mismatch");
  }
  const double scale = 1.0 / static_cast<double>(prediction.size());
  NeumaierSum sum;
  if (gradient != nullptr) *gradient = Tensor(prediction.shape());
  for (std::size_t k = 0; k < prediction.size(); ++k) {
    const double diff = prediction[k] - target[k];
    sum.add(diff * diff);
    if (gradient != nullptr) (*gradient)[k] = 2.0 * diff * scale;
  }
  return sum.value() * scale;
}

AdamOptimizer::AdamOptimizer(std::size_t parameter_count,
                             const TrainConfig& config)
    : learning_rate_(config.learning_rate),
      beta1_(config.beta1),
      beta2_(config.beta2),
      epsilon_(config.epsilon),
      m_(parameter_count, 0.0),
      v_(parameter_count, 0.0) {}

void AdamOptimizer::step(Network& network) {
  ++steps_;
  const double bias1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double bias2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  std::size_t offset = 0;
  for (Layer* layer : network.layers()) {
    auto params = layer->parameters();
    auto grads = layer->gradients();
    for (std::size_t k = 0; k < params.size(); ++k) {
      const double g = grads[k];
      double& m = m_[offset + k];
      double& v = v_[offset + k];
      m = beta1_ * m + (1.0 - beta1_) * g;
      v = beta2_ * v + (1.0 - beta2_) * g * g;
      const double m_hat = m / bias1;
      const double v_hat = v / bias2;
      params[k] -= learning_rate_ * m_hat / (std::sqrt(v_hat) + epsilon_);
    }
    offset += params.size();
  }
}

namespace {

std::size_t sample_count(const Dataset& data) { return data.inputs.dim(0); }

// Rows of a sample-major tensor, gathered into a fresh batch tensor.
Tensor gather_rows(const Tensor& source, std::span<const std::size_t> rows) {
  std::vector<std::size_t> shape = source.shape();
  const std::size_t row_size = source.size() / shape[0];
  shape[0] = rows.size();
  Tensor out(shape);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy(source.data() + rows[r] * row_size,
              source.data() + (rows[r] + 1) * row_size,
              out.data() + r * row_size);
  }
  return out;
}

double validation_mse(Network& network, const Dataset& data,
                      std::size_t batch) {
  const std::size_t n = sample_count(data);
  const std::size_t target_size = data.targets.size() / n;
  NeumaierSum sum;
  std::vector<std::size_t> rows;
  for (std::size_t begin = 0; begin < n; begin += batch) {
    const std::size_t count = std::min(batch, n - begin);
    rows.resize(count);
    std::iota(rows.begin(), rows.end(), begin);
    const Tensor inputs = gather_rows(data.inputs, rows);
    const Tensor targets = gather_rows(data.targets, rows);
    const Tensor prediction = network.forward(inputs);
    const double loss = mse_loss(prediction, targets);
    sum.add(loss * static_cast<double>(count * target_size));
  }
  return sum.value() / static_cast<double>(n * target_size);
}

}  // namespace

TrainHistory train(Network& network, const Dataset& train_data,
                   const Dataset& validation_data, const TrainConfig& config) {
  if (config.epochs < 1 || config.batch < 1) {
    fail(ErrorCode::kInvalidArgument, "epochs and batch must be >= 1");
  }
  if (!(config.learning_rate >= 0.0)) {
    fail(ErrorCode::kInvalidArgument, "learning rate must be >= 0");
  }
  const std::size_t n = sample_count(train_data);
  if (n == 0 || train_data.targets.dim(0) != n) {
    fail(ErrorCode::kInvalidArgument, "training dataset is empty or ragged");
  }
  const bool have_validation = validation_data.inputs.size() > 0;

  AdamOptimizer optimizer(network.parameter_count(), config);
  Rng rng(splitmix64(config.seed));
  TrainHistory history;
  std::vector<double> best_params = network.parameter_vector();
  double best_val = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    NeumaierSum epoch_loss;
    for (std::size_t begin = 0; begin < n; begin += config.batch) {
      const std::size_t count = std::min(config.batch, n - begin);
      const std::span<const std::size_t> rows(order.data() + begin, count);
      const Tensor inputs = gather_rows(train_data.inputs, rows);
      const Tensor targets = gather_rows(train_data.targets, rows);

      network.zero_gradients();
      const Tensor prediction = network.forward(inputs);
      Tensor gradient;
      const double loss = mse_loss(prediction, targets, &gradient);
      if (!std::isfinite(loss)) {
        fail(ErrorCode::kTrainingDiverged,
             "loss became non-finite in epoch " + std::to_string(epoch + 1));
      }
      network.backward(gradient);
      optimizer.step(network);
      epoch_loss.add(loss * static_cast<double>(count));
    }
    history.train_loss.push_back(epoch_loss.value() /
                                 static_cast<double>(n));

    if (have_validation) {
      const double val = validation_mse(network, validation_data, 256);
      if (!std::isfinite(val)) {
        fail(ErrorCode::kTrainingDiverged,
             "validation MSE became non-finite in epoch " +
                 std::to_string(epoch + 1));
      }
      history.val_mse.push_back(val);
      if (val < best_val) {
        best_val = val;
        best_params = network.parameter_vector();
        history.best_epoch = epoch;
      }
    } else {
      best_params = network.parameter_vector();
      history.best_epoch = epoch;
    }
  }

  network.set_parameter_vector(best_params);
  return history;
}

Tensor predict_batched(Network& network, const Tensor& inputs,
                       std::size_t batch) {
  const std::size_t n = inputs.dim(0);
  const std::size_t row_size = inputs.size() / n;

  Tensor all;
  std::vector<std::size_t> out_shape;
  std::size_t out_row_size = 0;
  for (std::size_t begin = 0; begin < n; begin += batch) {
    const std::size_t count = std::min(batch, n - begin);
    std::vector<std::size_t> shape = inputs.shape();
    shape[0] = count;
    Tensor chunk(shape);
    std::copy(inputs.data() + begin * row_size,
              inputs.data() + (begin + count) * row_size, chunk.data());
    const Tensor prediction = network.forward(chunk);
    if (begin == 0) {
      out_shape = prediction.shape();
      out_shape[0] = n;
      out_row_size = prediction.size() / count;
      all = Tensor(out_shape);
    }
    std::copy(prediction.data(), prediction.data() + prediction.size(),
              all.data() + begin * out_row_size);
  }
  return all;
}

}  // namespace nilmgap::nn
