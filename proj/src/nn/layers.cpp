#include "nilmgap/nn/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstring>

#include "nilmgap/rng.hpp"

namespace nilmgap::nn {

namespace {

using MatrixRM =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatrixRM>;
using ConstMapRM = Eigen::Map<const MatrixRM>;
using StridedMap = Eigen::Map<MatrixRM, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const MatrixRM, 0, Eigen::OuterStride<>>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

void glorot_fill(std::span<double> weights, std::size_t fan_in,
                 std::size_t fan_out, Rng& rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& w : weights) w = rng.uniform(-limit, limit);
}

void check_rank(const Tensor& t, std::size_t rank, const char* layer) {
  if (t.rank() != rank) {
    fail(ErrorCode::kShapeError,
         std::string(layer) + ": expected rank " + std::to_string(rank) +
             " input, got " + std::to_string(t.rank()));
  }
}

class DenseLayer final : public Layer {
 public:
  DenseLayer(const LayerSpec& spec, std::size_t in_features,
             std::uint64_t seed)
      : spec_(spec),
        in_(in_features),
        out_(spec.units),
        params_(out_ * in_ + out_, 0.0),
        grads_(params_.size(), 0.0) {
    Rng rng(seed);
    glorot_fill(std::span(params_.data(), out_ * in_), in_, out_, rng);
  }

  const LayerSpec& spec() const override { return spec_; }

  Tensor forward(const Tensor& input) override {
    check_rank(input, 2, "dense");
    if (input.dim(1) != in_) {
      fail(ErrorCode::kShapeError, "dense: input feature count mismatch");
    }
    input_ = input;
    const std::size_t n = input.dim(0);
    Tensor out({n, out_});
    ConstMapRM x(input.data(), n, in_);
    ConstMapRM w(params_.data(), out_, in_);
    Eigen::Map<const RowVector> bias(params_.data() + out_ * in_, out_);
    MapRM y(out.data(), n, out_);
    y.noalias() = x * w.transpose();
    y.rowwise() += bias;
    out.require_finite("dense forward");
    return out;
  }

  Tensor backward(const Tensor& grad_output) override {
    const std::size_t n = input_.dim(0);
    if (grad_output.rank() != 2 || grad_output.dim(0) != n ||
        grad_output.dim(1) != out_) {
      fail(ErrorCode::kShapeError, "dense: gradient shape mismatch");
    }
    ConstMapRM dy(grad_output.data(), n, out_);
    ConstMapRM x(input_.data(), n, in_);
    ConstMapRM w(params_.data(), out_, in_);
    MapRM dw(grads_.data(), out_, in_);
    Eigen::Map<RowVector> db(grads_.data() + out_ * in_, out_);
    dw.noalias() += dy.transpose() * x;
    db += dy.colwise().sum();
    Tensor dx({n, in_});
    MapRM dxm(dx.data(), n, in_);
    dxm.noalias() = dy * w;
    dx.require_finite("dense backward");
    return dx;
  }

  std::span<double> parameters() override { return params_; }
  std::span<const double> parameters() const override { return params_; }
  std::span<double> gradients() override { return grads_; }
  void zero_gradients() override {
    std::fill(grads_.begin(), grads_.end(), 0.0);
  }

 private:
  LayerSpec spec_;
  std::size_t in_;
  std::size_t out_;
  std::vector<double> params_;
  std::vector<double> grads_;
  Tensor input_;
};

class Conv1dLayer final : public Layer {
 public:
  Conv1dLayer(const LayerSpec& spec, std::size_t in_len, std::size_t in_ch,
              std::uint64_t seed)
      : spec_(spec),
        filters_(spec.units),
        kernel_(spec.kernel),
        stride_(spec.stride),
        in_len_(in_len),
        in_ch_(in_ch),
        out_len_((in_len - spec.kernel) / spec.stride + 1),
        params_(filters_ * kernel_ * in_ch_ + filters_, 0.0),
        grads_(params_.size(), 0.0) {
    Rng rng(seed);
    glorot_fill(std::span(params_.data(), filters_ * kernel_ * in_ch_),
                kernel_ * in_ch_, kernel_ * filters_, rng);
  }

  const LayerSpec& spec() const override { return spec_; }

  Tensor forward(const Tensor& input) override {
    check_rank(input, 3, "conv1d");
    if (input.dim(1) != in_len_ || input.dim(2) != in_ch_) {
      fail(ErrorCode::kShapeError, "conv1d: input shape mismatch");
    }
    const std::size_t n = input.dim(0);
    const std::size_t patch = kernel_ * in_ch_;

    // A window's (tap, channel) block is contiguous in row-major
    // [batch, length, channels] storage, so im2col rows are straight copies.
    cols_.resize(static_cast<Eigen::Index>(n * out_len_),
                 static_cast<Eigen::Index>(patch));
    for (std::size_t b = 0; b < n; ++b) {
      const double* sample = input.data() + b * in_len_ * in_ch_;
      for (std::size_t o = 0; o < out_len_; ++o) {
        std::memcpy(cols_.row(static_cast<Eigen::Index>(b * out_len_ + o)).data(),
                    sample + o * stride_ * in_ch_, patch * sizeof(double));
      }
    }

    Tensor out({n, out_len_, filters_});
    ConstMapRM w(params_.data(), filters_, patch);
    Eigen::Map<const RowVector> bias(params_.data() + filters_ * patch,
                                     filters_);
    MapRM y(out.data(), static_cast<Eigen::Index>(n * out_len_), filters_);
    y.noalias() = cols_ * w.transpose();
    y.rowwise() += bias;
    out.require_finite("conv1d forward");
    batch_ = n;
    return out;
  }

  Tensor backward(const Tensor& grad_output) override {
    const std::size_t n = batch_;
    if (grad_output.rank() != 3 || grad_output.dim(0) != n ||
        grad_output.dim(1) != out_len_ || grad_output.dim(2) != filters_) {
      fail(ErrorCode::kShapeError, "conv1d: gradient shape mismatch");
    }
    const std::size_t patch = kernel_ * in_ch_;
    ConstMapRM dy(grad_output.data(),
                  static_cast<Eigen::Index>(n * out_len_), filters_);
    ConstMapRM w(params_.data(), filters_, patch);
    MapRM dw(grads_.data(), filters_, patch);
    Eigen::Map<RowVector> db(grads_.data() + filters_ * patch, filters_);
    dw.noalias() += dy.transpose() * cols_;
    db += dy.colwise().sum();

    dcols_.resize(static_cast<Eigen::Index>(n * out_len_),
                  static_cast<Eigen::Index>(patch));
    dcols_.noalias() = dy * w;

    // Scatter-add the column gradients back; overlapping windows accumulate.
    Tensor dx({n, in_len_, in_ch_});
    for (std::size_t b = 0; b < n; ++b) {
      double* sample = dx.data() + b * in_len_ * in_ch_;
      for (std::size_t o = 0; o < out_len_; ++o) {
        const double* src =
            dcols_.row(static_cast<Eigen::Index>(b * out_len_ + o)).data();
        double* dst = sample + o * stride_ * in_ch_;
        for (std::size_t k = 0; k < patch; ++k) dst[k] += src[k];
      }
    }
    dx.require_finite("conv1d backward");
    return dx;
  }

  std::span<double> parameters() override { return params_; }
  std::span<const double> parameters() const override { return params_; }
  std::span<double> gradients() override { return grads_; }
  void zero_gradients() override {
    std::fill(grads_.begin(), grads_.end(), 0.0);
  }

 private:
  LayerSpec spec_;
  std::size_t filters_;
  std::size_t kernel_;
  std::size_t stride_;
  std::size_t in_len_;
  std::size_t in_ch_;
  std::size_t out_len_;
  std::vector<double> params_;
  std::vector<double> grads_;
  MatrixRM cols_;
  MatrixRM dcols_;
  std::size_t batch_ = 0;
};

// Canonical LSTM cell: input/forget/output gates with sigmoid, candidate
// with tanh, processed left to right. Gate blocks are ordered [i, f, g, o]
// in both the stacked weight matrices and the preactivation buffer.
class LstmLayer final : public Layer {
 public:
  LstmLayer(const LayerSpec& spec, std::size_t in_len, std::size_t in_ch,
            bool return_sequence, std::uint64_t seed)
      : spec_(spec),
        units_(spec.units),
        in_len_(in_len),
        in_ch_(in_ch),
        return_sequence_(return_sequence),
        params_(4 * units_ * in_ch_ + 4 * units_ * units_ + 4 * units_, 0.0),
        grads_(params_.size(), 0.0) {
    Rng rng(seed);
    glorot_fill(std::span(params_.data(), 4 * units_ * in_ch_), in_ch_,
                4 * units_, rng);
    glorot_fill(
        std::span(params_.data() + 4 * units_ * in_ch_, 4 * units_ * units_),
        units_, 4 * units_, rng);
  }

  const LayerSpec& spec() const override { return spec_; }

  Tensor forward(const Tensor& input) override {
    check_rank(input, 3, "lstm");
    if (input.dim(1) != in_len_ || input.dim(2) != in_ch_) {
      fail(ErrorCode::kShapeError, "lstm: input shape mismatch");
    }
    const std::size_t n = input.dim(0);
    batch_ = n;
    input_ = input;

    const auto rows = static_cast<Eigen::Index>(in_len_ * n);
    const auto u = static_cast<Eigen::Index>(units_);
    i_.resize(rows, u);
    f_.resize(rows, u);
    g_.resize(rows, u);
    o_.resize(rows, u);
    c_.resize(rows, u);
    tc_.resize(rows, u);
    h_.resize(rows, u);

    ConstMapRM wx(params_.data(), 4 * u, static_cast<Eigen::Index>(in_ch_));
    ConstMapRM wh(params_.data() + 4 * units_ * in_ch_, 4 * u, u);
    Eigen::Map<const RowVector> bias(
        params_.data() + 4 * units_ * in_ch_ + 4 * units_ * units_,
        4 * u);

    MatrixRM a(static_cast<Eigen::Index>(n), 4 * u);
    const auto nn = static_cast<Eigen::Index>(n);
    for (std::size_t t = 0; t < in_len_; ++t) {
      ConstStridedMap x_t(input.data() + t * in_ch_, nn,
                          static_cast<Eigen::Index>(in_ch_),
                          Eigen::OuterStride<>(
                              static_cast<Eigen::Index>(in_len_ * in_ch_)));
      a.noalias() = x_t * wx.transpose();
      if (t > 0) {
        a.noalias() += h_.middleRows(static_cast<Eigen::Index>((t - 1) * n),
                                     nn) *
                       wh.transpose();
      }
      a.rowwise() += bias;

      auto it = i_.middleRows(static_cast<Eigen::Index>(t * n), nn);
      auto ft = f_.middleRows(static_cast<Eigen::Index>(t * n), nn);
      auto gt = g_.middleRows(static_cast<Eigen::Index>(t * n), nn);
      auto ot = o_.middleRows(static_cast<Eigen::Index>(t * n), nn);
      auto ct = c_.middleRows(static_cast<Eigen::Index>(t * n), nn);
      auto tct = tc_.middleRows(static_cast<Eigen::Index>(t * n), nn);
      auto ht = h_.middleRows(static_cast<Eigen::Index>(t * n), nn);

      it = (1.0 + (-a.leftCols(u).array()).exp()).inverse();
      ft = (1.0 + (-a.middleCols(u, u).array()).exp()).inverse();
      gt = a.middleCols(2 * u, u).array().tanh();
      ot = (1.0 + (-a.rightCols(u).array()).exp()).inverse();
      if (t > 0) {
        ct = ft.array() *
                 c_.middleRows(static_cast<Eigen::Index>((t - 1) * n), nn)
                     .array() +
             it.array() * gt.array();
      } else {
        ct = it.array() * gt.array();
      }
      tct = ct.array().tanh();
      ht = ot.array() * tct.array();
    }

    Tensor out = return_sequence_ ? Tensor({n, in_len_, units_})
                                  : Tensor({n, units_});
    if (return_sequence_) {
      for (std::size_t t = 0; t < in_len_; ++t) {
        StridedMap slice(out.data() + t * units_, nn, u,
                         Eigen::OuterStride<>(
                             static_cast<Eigen::Index>(in_len_ * units_)));
        slice = h_.middleRows(static_cast<Eigen::Index>(t * n), nn);
      }
    } else {
      MapRM last(out.data(), nn, u);
      last = h_.middleRows(static_cast<Eigen::Index>((in_len_ - 1) * n), nn);
    }
    out.require_finite("lstm forward");
    return out;
  }

  Tensor backward(const Tensor& grad_output) override {
    const std::size_t n = batch_;
    const auto nn = static_cast<Eigen::Index>(n);
    const auto u = static_cast<Eigen::Index>(units_);
    if (return_sequence_) {
      if (grad_output.rank() != 3 || grad_output.dim(0) != n ||
          grad_output.dim(1) != in_len_ || grad_output.dim(2) != units_) {
        fail(ErrorCode::kShapeError, "lstm: gradient shape mismatch");
      }
    } else if (grad_output.rank() != 2 || grad_output.dim(0) != n ||
               grad_output.dim(1) != units_) {
      fail(ErrorCode::kShapeError, "lstm: gradient shape mismatch");
    }

    ConstMapRM wx(params_.data(), 4 * u, static_cast<Eigen::Index>(in_ch_));
    ConstMapRM wh(params_.data() + 4 * units_ * in_ch_, 4 * u, u);
    MapRM dwx(grads_.data(), 4 * u, static_cast<Eigen::Index>(in_ch_));
    MapRM dwh(grads_.data() + 4 * units_ * in_ch_, 4 * u, u);
    Eigen::Map<RowVector> db(
        grads_.data() + 4 * units_ * in_ch_ + 4 * units_ * units_, 4 * u);

    Tensor dx({n, in_len_, in_ch_});
    MatrixRM dh = MatrixRM::Zero(nn, u);
    MatrixRM dc = MatrixRM::Zero(nn, u);
    MatrixRM da(nn, 4 * u);

    for (std::size_t t = in_len_; t-- > 0;) {
      if (return_sequence_) {
        ConstStridedMap grad_t(grad_output.data() + t * units_, nn, u,
                               Eigen::OuterStride<>(static_cast<Eigen::Index>(
                                   in_len_ * units_)));
        dh += grad_t;
      } else if (t == in_len_ - 1) {
        ConstMapRM grad_t(grad_output.data(), nn, u);
        dh += grad_t;
      }

      auto it = i_.middleRows(static_cast<Eigen::Index>(t * n), nn);
      auto ft = f_.middleRows(static_cast<Eigen::Index>(t * n), nn);
      auto gt = g_.middleRows(static_cast<Eigen::Index>(t * n), nn);
      auto ot = o_.middleRows(static_cast<Eigen::Index>(t * n), nn);
      auto tct = tc_.middleRows(static_cast<Eigen::Index>(t * n), nn);

      dc.array() += dh.array() * ot.array() * (1.0 - tct.array().square());

      // da blocks: [i, f, g, o]
      da.leftCols(u).array() =
          dc.array() * gt.array() * it.array() * (1.0 - it.array());
      if (t > 0) {
        da.middleCols(u, u).array() =
            dc.array() *
            c_.middleRows(static_cast<Eigen::Index>((t - 1) * n), nn)
                .array() *
            ft.array() * (1.0 - ft.array());
      } else {
        da.middleCols(u, u).setZero();  // c_{-1} = 0
      }
      da.middleCols(2 * u, u).array() =
          dc.array() * it.array() * (1.0 - gt.array().square());
      da.rightCols(u).array() =
          dh.array() * tct.array() * ot.array() * (1.0 - ot.array());

      ConstStridedMap x_t(input_.data() + t * in_ch_, nn,
                          static_cast<Eigen::Index>(in_ch_),
                          Eigen::OuterStride<>(
                              static_cast<Eigen::Index>(in_len_ * in_ch_)));
      dwx.noalias() += da.transpose() * x_t;
      if (t > 0) {
        dwh.noalias() +=
            da.transpose() *
            h_.middleRows(static_cast<Eigen::Index>((t - 1) * n), nn);
      }
      db += da.colwise().sum();

      StridedMap dx_t(dx.data() + t * in_ch_, nn,
                      static_cast<Eigen::Index>(in_ch_),
                      Eigen::OuterStride<>(
                          static_cast<Eigen::Index>(in_len_ * in_ch_)));
      dx_t.noalias() = da * wx;

      // Carries for step t-1.
      dh.noalias() = da * wh;
      dc.array() *= ft.array();
    }
    dx.require_finite("lstm backward");
    return dx;
  }

  std::span<double> parameters() override { return params_; }
  std::span<const double> parameters() const override { return params_; }
  std::span<double> gradients() override { return grads_; }
  void zero_gradients() override {
    std::fill(grads_.begin(), grads_.end(), 0.0);
  }

 private:
  LayerSpec spec_;
  std::size_t units_;
  std::size_t in_len_;
  std::size_t in_ch_;
  bool return_sequence_;
  std::vector<double> params_;
  std::vector<double> grads_;
  Tensor input_;
  std::size_t batch_ = 0;
  // Step caches, stacked as [t * batch + row, unit].
  MatrixRM i_, f_, g_, o_, c_, tc_, h_;
};

class ReluLayer final : public Layer {
 public:
  explicit ReluLayer(const LayerSpec& spec) : spec_(spec) {}

  const LayerSpec& spec() const override { return spec_; }

  Tensor forward(const Tensor& input) override {
    mask_.assign(input.size(), 0);
    Tensor out(input.shape());
    for (std::size_t k = 0; k < input.size(); ++k) {
      if (input[k] > 0.0) {
        out[k] = input[k];
        mask_[k] = 1;
      }
    }
    out.require_finite("relu forward");
    return out;
  }

  Tensor backward(const Tensor& grad_output) override {
    if (grad_output.size() != mask_.size()) {
      fail(ErrorCode::kShapeError, "relu: gradient shape mismatch");
    }
    Tensor dx(grad_output.shape());
    for (std::size_t k = 0; k < mask_.size(); ++k) {
      dx[k] = mask_[k] ? grad_output[k] : 0.0;
    }
    return dx;
  }

 private:
  LayerSpec spec_;
  std::vector<std::uint8_t> mask_;
};

class FlattenLayer final : public Layer {
 public:
  explicit FlattenLayer(const LayerSpec& spec) : spec_(spec) {}

  const LayerSpec& spec() const override { return spec_; }

  Tensor forward(const Tensor& input) override {
    check_rank(input, 3, "flatten");
    input_shape_ = input.shape();
    return input.reshaped({input.dim(0), input.dim(1) * input.dim(2)});
  }

  Tensor backward(const Tensor& grad_output) override {
    return grad_output.reshaped(input_shape_);
  }

 private:
  LayerSpec spec_;
  std::vector<std::size_t> input_shape_;
};

}  // namespace

Network::Network(std::vector<LayerSpec> specs,
                 std::vector<std::size_t> input_shape, std::uint64_t seed)
    : specs_(std::move(specs)), input_shape_(std::move(input_shape)),
      seed_(seed) {
  if (specs_.empty()) {
    fail(ErrorCode::kInvalidArgument, "network needs at least one layer");
  }
  if (input_shape_.empty() || input_shape_.size() > 2) {
    fail(ErrorCode::kShapeError,
         "network input shape must be {features} or {length, channels}");
  }

  std::vector<std::size_t> shape = input_shape_;
  for (std::size_t idx = 0; idx < specs_.size(); ++idx) {
    const LayerSpec& spec = specs_[idx];
    const std::uint64_t layer_seed = splitmix64(seed + idx + 1);
    switch (spec.kind) {
      case LayerSpec::Kind::kDense: {
        if (shape.size() != 1 || spec.units == 0) {
          fail(ErrorCode::kShapeError, "dense needs flat input and units > 0");
        }
        layers_.push_back(
            std::make_unique<DenseLayer>(spec, shape[0], layer_seed));
        shape = {spec.units};
        break;
      }
      case LayerSpec::Kind::kConv1d: {
        if (shape.size() != 2 || spec.units == 0 || spec.kernel == 0 ||
            spec.stride == 0) {
          fail(ErrorCode::kShapeError, "conv1d needs sequence input");
        }
        if (spec.kernel > shape[0]) {
          fail(ErrorCode::kShapeError,
               "conv1d kernel exceeds input length " +
                   std::to_string(shape[0]));
        }
        layers_.push_back(std::make_unique<Conv1dLayer>(spec, shape[0],
                                                        shape[1], layer_seed));
        shape = {(shape[0] - spec.kernel) / spec.stride + 1, spec.units};
        break;
      }
      case LayerSpec::Kind::kLstm: {
        if (shape.size() != 2 || spec.units == 0) {
          fail(ErrorCode::kShapeError, "lstm needs sequence input");
        }
        const bool return_sequence =
            idx + 1 < specs_.size() &&
            specs_[idx + 1].kind == LayerSpec::Kind::kLstm;
        layers_.push_back(std::make_unique<LstmLayer>(
            spec, shape[0], shape[1], return_sequence, layer_seed));
        shape = return_sequence ? std::vector<std::size_t>{shape[0], spec.units}
                                : std::vector<std::size_t>{spec.units};
        break;
      }
      case LayerSpec::Kind::kRelu: {
        layers_.push_back(std::make_unique<ReluLayer>(spec));
        break;
      }
      case LayerSpec::Kind::kFlatten: {
        if (shape.size() != 2) {
          fail(ErrorCode::kShapeError, "flatten needs sequence input");
        }
        layers_.push_back(std::make_unique<FlattenLayer>(spec));
        shape = {shape[0] * shape[1]};
        break;
      }
    }
  }
  output_shape_ = shape;
}

Tensor Network::forward(const Tensor& input) {
  if (input.rank() != input_shape_.size() + 1) {
    fail(ErrorCode::kShapeError, "network input rank mismatch");
  }
  for (std::size_t d = 0; d < input_shape_.size(); ++d) {
    if (input.dim(d + 1) != input_shape_[d]) {
      fail(ErrorCode::kShapeError, "network input shape mismatch");
    }
  }
  Tensor current = input;
  for (auto& layer : layers_) {
    current = layer->forward(current);
  }
  return current;
}

void Network::backward(const Tensor& output_gradient) {
  Tensor current = output_gradient;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    current = (*it)->backward(current);
  }
}

void Network::zero_gradients() {
  for (auto& layer : layers_) layer->zero_gradients();
}

std::vector<Layer*> Network::layers() {
  std::vector<Layer*> out;
  out.reserve(layers_.size());
  for (auto& layer : layers_) out.push_back(layer.get());
  return out;
}

std::size_t Network::parameter_count() const {
  std::size_t total = 0;
  for (const auto& layer : layers_) total += layer->parameters().size();
  return total;
}

std::vector<double> Network::parameter_vector() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& layer : layers_) {
    const auto params = layer->parameters();
    out.insert(out.end(), params.begin(), params.end());
  }
  return out;
}

void Network::set_parameter_vector(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    fail(ErrorCode::kShapeError, "parameter vector length mismatch");
  }
  std::size_t offset = 0;
  for (auto& layer : layers_) {
    auto params = layer->parameters();
    std::copy(values.begin() + offset, values.begin() + offset + params.size(),
              params.begin());
    offset += params.size();
  }
}

double Network::parameter(std::size_t index) const {
  for (const auto& layer : layers_) {
    const auto params = layer->parameters();
    if (index < params.size()) return params[index];
    index -= params.size();
  }
  fail(ErrorCode::kInvalidArgument, "parameter index out of range");
}

void Network::nudge_parameter(std::size_t index, double delta) {
  for (auto& layer : layers_) {
    auto params = layer->parameters();
    if (index < params.size()) {
      params[index] += delta;
      return;
    }
    index -= params.size();
  }
  fail(ErrorCode::kInvalidArgument, "parameter index out of range");
}

std::vector<double> Network::gradient_vector() {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (auto& layer : layers_) {
    const auto grads = layer->gradients();
    out.insert(out.end(), grads.begin(), grads.end());
  }
  return out;
}

}  // namespace nilmgap::nn
