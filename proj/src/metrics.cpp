#include "nilmgap/metrics.hpp"

#include <cmath>

#include "nilmgap/util.hpp"

namespace nilmgap {

namespace {

void check_grids(const PowerSeries& estimate, const PowerSeries& truth) {
  if (estimate.start_time() != truth.start_time() ||
      estimate.interval() != truth.interval() ||
      estimate.size() != truth.size()) {
    fail(ErrorCode::kGridMismatch,
         "estimate and truth are not on the same grid");
  }
}

struct Accumulated {
  double abs_error = 0.0;
  double sq_error = 0.0;
  double sq_truth = 0.0;
  std::size_t slots = 0;
};

Accumulated accumulate(const PowerSeries& estimate, const PowerSeries& truth) {
  check_grids(estimate, truth);
  NeumaierSum abs_error;
  NeumaierSum sq_error;
  NeumaierSum sq_truth;
  std::size_t slots = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!estimate.present(i) || !truth.present(i)) continue;
    const double diff = estimate.watts(i) - truth.watts(i);
    abs_error.add(std::abs(diff));
    sq_error.add(diff * diff);
    sq_truth.add(truth.watts(i) * truth.watts(i));
    ++slots;
  }
  if (slots == 0) {
    fail(ErrorCode::kEmptySeries, "no slot has both estimate and truth");
  }
  return {abs_error.value(), sq_error.value(), sq_truth.value(), slots};
}

}  // namespace

double mae(const PowerSeries& estimate, const PowerSeries& truth) {
  const Accumulated acc = accumulate(estimate, truth);
  return acc.abs_error / static_cast<double>(acc.slots);
}

double nde(const PowerSeries& estimate, const PowerSeries& truth) {
  const Accumulated acc = accumulate(estimate, truth);
  if (acc.sq_truth <= 0.0) {
    fail(ErrorCode::kDegenerateTruth,
         "truth is zero everywhere; NDE is undefined");
  }
  return std::sqrt(acc.sq_error / acc.sq_truth);
}

Score score(const PowerSeries& estimate, const PowerSeries& truth) {
  const Accumulated acc = accumulate(estimate, truth);
  if (acc.sq_truth <= 0.0) {
    fail(ErrorCode::kDegenerateTruth,
         "truth is zero everywhere; NDE is undefined");
  }
  return Score{acc.abs_error / static_cast<double>(acc.slots),
               std::sqrt(acc.sq_error / acc.sq_truth), acc.slots};
}

Gap gap(const Score& real, const Score& denoised) {
  return Gap{real.mae - denoised.mae, real.nde - denoised.nde};
}

}  // namespace nilmgap
