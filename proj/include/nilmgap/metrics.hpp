#pragma once

#include <cstddef>

#include "nilmgap/timeseries.hpp"

namespace nilmgap {

// Per-appliance error of one run over the slots where both estimate and
// truth are present.
struct Score {
  double mae = 0.0;   // watts
  double nde = 0.0;   // dimensionless
  std::size_t slots = 0;
};

// Real-minus-denoised performance gap. Negative entries mean the real
// aggregate scored better; they are preserved, not clamped.
struct Gap {
  double delta_mae = 0.0;
  double delta_nde = 0.0;
};

// Mean absolute error in watts: (1/T) * sum |estimate - truth|.
double mae(const PowerSeries& estimate, const PowerSeries& truth);

// Normalized disaggregation error:
// sqrt( sum (estimate - truth)^2 / sum truth^2 ). Scale-invariant under a
// joint rescaling of both inputs; normalizes by the truth only, so it is
// not symmetric in its arguments.
double nde(const PowerSeries& estimate, const PowerSeries& truth);

Score score(const PowerSeries& estimate, const PowerSeries& truth);

Gap gap(const Score& real, const Score& denoised);

}  // namespace nilmgap
