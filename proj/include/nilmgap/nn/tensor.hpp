#pragma once

#include <cstddef>
#include <vector>

#include "nilmgap/error.hpp"

namespace nilmgap::nn {

// Dense row-major value container of rank 1..3. The training convention is
// [batch, length, channels] for sequence data and [batch, features] after
// flattening. Values must stay finite; require_finite() is the hard check
// layers run after every op.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape);

  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor zeros(std::vector<std::size_t> shape) {
    return Tensor(std::move(shape));
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_[i]; }
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  Tensor reshaped(std::vector<std::size_t> shape) const;

  bool all_finite() const;
  void require_finite(const char* where) const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

}  // namespace nilmgap::nn
