#pragma once

#include <cstddef>

#include "nilmgap/timeseries.hpp"

namespace nilmgap {

// Noise level of one household's aggregate. The ratio is reported at full
// precision; tables format it as a one-decimal percentage.
struct NoiseReport {
  double nar = 0.0;                     // total_residual / total_aggregate
  double total_aggregate_energy = 0.0;  // watt-slots over the used slots
  double total_residual = 0.0;          // watt-slots
  std::size_t slots_used = 0;           // slots where every channel is present
};

// Per-slot residual |mains - sum of appliances|. Slots where any channel is
// MISSING stay MISSING. Requires mains and appliances to share a power type.
PowerSeries residual(const HouseholdDataset& dataset);

// Noise-aggregate ratio: sum of residuals over sum of mains, both restricted
// to slots where all channels are present.
NoiseReport compute_nar(const HouseholdDataset& dataset);

// Replace mains with the superposition of the appliance channels. The mains
// power type becomes the appliances' type; everything else is unchanged.
HouseholdDataset denoise(const HouseholdDataset& dataset);

}  // namespace nilmgap
