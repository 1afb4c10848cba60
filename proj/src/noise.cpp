#include "nilmgap/noise.hpp"

#include <cmath>

#include "nilmgap/util.hpp"

namespace nilmgap {

namespace {

void check_power_types(const HouseholdDataset& dataset) {
  if (dataset.mains().power_type() != dataset.appliance_power_type()) {
    fail(ErrorCode::kIncompatiblePowerTypes,
         "mains records " +
             std::string(1, power_type_code(dataset.mains().power_type())) +
             " but appliances record " +
             std::string(1, power_type_code(dataset.appliance_power_type())) +
             "; no ratio can be computed");
  }
}

// Plain left-to-right sum over the appliance channels. The same order is
// used by denoise() and the synthetic generator, which keeps a zero-noise
// household's real and denoised mains bit-identical.
bool appliance_sum(const HouseholdDataset& dataset, std::size_t slot,
                   double* sum) {
  double total = 0.0;
  for (const auto& [name, series] : dataset.appliances()) {
    if (!series.present(slot)) return false;
    total += series.watts(slot);
  }
  *sum = total;
  return true;
}

}  // namespace

PowerSeries residual(const HouseholdDataset& dataset) {
  check_power_types(dataset);
  const std::size_t n = dataset.size();
  std::vector<double> values(n, 0.0);
  std::vector<std::uint8_t> present(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    if (!dataset.mains().present(i) || !appliance_sum(dataset, i, &sum)) {
      continue;
    }
    values[i] = std::abs(dataset.mains().watts(i) - sum);
    present[i] = 1;
  }
  return PowerSeries(dataset.start_time(), dataset.interval(),
                     std::move(values), std::move(present),
                     dataset.mains().power_type());
}

NoiseReport compute_nar(const HouseholdDataset& dataset) {
  check_power_types(dataset);
  NeumaierSum residual_sum;
  NeumaierSum aggregate_sum;
  std::size_t used = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    double sum = 0.0;
    if (!dataset.mains().present(i) || !appliance_sum(dataset, i, &sum)) {
      continue;
    }
    residual_sum.add(std::abs(dataset.mains().watts(i) - sum));
    aggregate_sum.add(dataset.mains().watts(i));
    ++used;
  }
  const double aggregate = aggregate_sum.value();
  if (used == 0 || aggregate <= 0.0) {
    fail(ErrorCode::kDegenerateAggregate,
         "aggregate energy is zero over the usable slots");
  }
  const double residual_total = residual_sum.value();
  return NoiseReport{residual_total / aggregate, aggregate, residual_total,
                     used};
}

HouseholdDataset denoise(const HouseholdDataset& dataset) {
  const std::size_t n = dataset.size();
  std::vector<double> values(n, 0.0);
  std::vector<std::uint8_t> present(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    if (!appliance_sum(dataset, i, &sum)) continue;
    values[i] = sum;
    present[i] = 1;
  }
  PowerSeries mains(dataset.start_time(), dataset.interval(),
                    std::move(values), std::move(present),
                    dataset.appliance_power_type());
  return HouseholdDataset(dataset.label(), std::move(mains),
                          dataset.appliances());
}

}  // namespace nilmgap
