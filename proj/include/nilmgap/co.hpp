#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nilmgap/timeseries.hpp"

namespace nilmgap {

struct CoConfig {
  std::size_t k_max = 4;        // levels per appliance, OFF included
  double on_threshold = 15.0;   // watts separating OFF/standby from ON
};

// Learned operating states: per appliance a strictly increasing list of watt
// levels with level 0 (OFF) always present.
struct StateTable {
  std::vector<std::string> names;            // appliance order
  std::vector<std::vector<double>> levels;   // one list per appliance
  std::vector<std::string> warnings;

  std::size_t combination_count() const;
};

// Learn per-appliance states from the training channels: samples above the
// ON threshold are clustered by 1-D k-means into at most k_max-1 levels
// (centroids initialized at evenly spaced quantiles, iteration cap 100,
// convergence tolerance 0.1 W), then OFF is prepended. Deterministic.
StateTable fit_states(const HouseholdDataset& train, const CoConfig& config = {});

// Per slot, choose the state combination whose level sum best matches the
// aggregate; each appliance's estimate is its chosen level. Cost ties are
// broken by the lexicographically smallest state-index vector in appliance
// order. Exhaustive over the state product, which must stay within 1e6.
std::vector<HouseholdDataset::Channel> co_disaggregate(
    const PowerSeries& aggregate, const StateTable& states);

}  // namespace nilmgap
