#include "nilmgap/nn/tensor.hpp"

#include <cmath>
#include <numeric>

namespace nilmgap::nn {

namespace {

std::size_t checked_size(const std::vector<std::size_t>& shape) {
  if (shape.empty() || shape.size() > 3) {
    fail(ErrorCode::kShapeError, "tensor rank must be 1..3");
  }
  std::size_t total = 1;
  for (std::size_t d : shape) {
    if (d == 0) fail(ErrorCode::kShapeError, "zero tensor dimension");
    total *= d;
  }
  return total;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(checked_size(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (checked_size(shape_) != data_.size()) {
    fail(ErrorCode::kShapeError, "tensor data does not match its shape");
  }
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
  if (checked_size(shape) != data_.size()) {
    fail(ErrorCode::kShapeError, "reshape changes element count");
  }
  return Tensor(std::move(shape), data_);
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::require_finite(const char* where) const {
  if (!all_finite()) {
    fail(ErrorCode::kNonFiniteValue,
         std::string("non-finite value after ") + where);
  }
}

}  // namespace nilmgap::nn
