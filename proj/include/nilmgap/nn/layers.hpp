#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "nilmgap/nn/tensor.hpp"

namespace nilmgap::nn {

struct LayerSpec {
  enum class Kind : std::uint8_t {
    kDense = 0,
    kConv1d = 1,
    kLstm = 2,
    kRelu = 3,
    kFlatten = 4,
  };

  Kind kind = Kind::kDense;
  std::size_t units = 0;   // dense width / lstm units / conv filters
  std::size_t kernel = 0;  // conv kernel length
  std::size_t stride = 1;  // conv stride

  static LayerSpec dense(std::size_t out) { return {Kind::kDense, out, 0, 1}; }
  static LayerSpec conv1d(std::size_t filters, std::size_t kernel,
                          std::size_t stride = 1) {
    return {Kind::kConv1d, filters, kernel, stride};
  }
  static LayerSpec lstm(std::size_t units) { return {Kind::kLstm, units, 0, 1}; }
  static LayerSpec relu() { return {Kind::kRelu, 0, 0, 1}; }
  static LayerSpec flatten() { return {Kind::kFlatten, 0, 0, 1}; }

  bool operator==(const LayerSpec&) const = default;
};

// One differentiable stage. forward() caches whatever backward() needs, so
// the call pattern is strictly forward-then-backward on the same batch;
// a network instance is single-threaded by design.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual const LayerSpec& spec() const = 0;
  virtual Tensor forward(const Tensor& input) = 0;
  // Takes dLoss/dOutput, accumulates parameter gradients, returns
  // dLoss/dInput.
  virtual Tensor backward(const Tensor& grad_output) = 0;

  virtual std::span<double> parameters() { return {}; }
  virtual std::span<const double> parameters() const { return {}; }
  virtual std::span<double> gradients() { return {}; }
  virtual void zero_gradients() {}
};

// Feed-forward stack built from specs. Shapes exclude the leading batch
// dimension: sequence input is {length, channels}, flat input {features}.
// Parameter initialization (uniform in +-sqrt(6/(fan_in+fan_out))) is a pure
// function of (specs, input shape, seed). An LSTM layer followed by another
// LSTM emits its full hidden sequence; otherwise it emits the final hidden
// state.
class Network {
 public:
  Network(std::vector<LayerSpec> specs, std::vector<std::size_t> input_shape,
          std::uint64_t seed);

  Network(Network&&) = default;
  Network& operator=(Network&&) = default;

  Tensor forward(const Tensor& input);
  // Propagates dLoss/dOutput back through the stack (gradients accumulate
  // until zero_gradients()).
  void backward(const Tensor& output_gradient);
  void zero_gradients();

  const std::vector<LayerSpec>& specs() const { return specs_; }
  const std::vector<std::size_t>& input_shape() const { return input_shape_; }
  const std::vector<std::size_t>& output_shape() const { return output_shape_; }
  std::uint64_t seed() const { return seed_; }

  std::vector<Layer*> layers();

  std::size_t parameter_count() const;
  std::vector<double> parameter_vector() const;
  void set_parameter_vector(std::span<const double> values);
  double parameter(std::size_t index) const;
  void nudge_parameter(std::size_t index, double delta);
  std::vector<double> gradient_vector();

 private:
  std::vector<LayerSpec> specs_;
  std::vector<std::size_t> input_shape_;
  std::vector<std::size_t> output_shape_;
  std::uint64_t seed_ = 0;
  std::vector<std::unique_ptr<Layer>> layers_;
};

}  // namespace nilmgap::nn
