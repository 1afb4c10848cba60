#include "nilmgap/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace nilmgap {

char power_type_code(PowerType type) {
  switch (type) {
    case PowerType::kActive: return 'P';
    case PowerType::kReactive: return 'Q';
    case PowerType::kApparent: return 'S';
  }
  return '?';
}

PowerType power_type_from_code(char code) {
  switch (code) {
    case 'P': return PowerType::kActive;
    case 'Q': return PowerType::kReactive;
    case 'S': return PowerType::kApparent;
    default:
      fail(ErrorCode::kInvalidArgument,
           std::string("unknown power type code '") + code + "'");
  }
}

PowerSeries::PowerSeries(std::int64_t start_time, std::int64_t interval,
                         std::vector<double> values,
                         std::vector<std::uint8_t> present, PowerType type)
    : start_time_(start_time),
      interval_(interval),
      values_(std::move(values)),
      present_(std::move(present)),
      type_(type) {
  if (interval_ <= 0) {
    fail(ErrorCode::kInvalidArgument, "interval must be positive");
  }
  if (values_.empty()) {
    fail(ErrorCode::kEmptySeries, "a power series needs at least one slot");
  }
  if (present_.empty()) {
    present_.assign(values_.size(), 1);  // gap-free constructor
  }
  if (present_.size() != values_.size()) {
    fail(ErrorCode::kInvalidArgument, "presence mask length mismatch");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!present_[i]) {
      values_[i] = 0.0;  // normalized storage for MISSING slots
      continue;
    }
    present_[i] = 1;
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      fail(ErrorCode::kInvalidArgument,
           "slot " + std::to_string(i) + " is not a finite watt value >= 0");
    }
  }
}

PowerSeries::PowerSeries(std::int64_t start_time, std::int64_t interval,
                         std::vector<double> values, PowerType type)
    : PowerSeries(start_time, interval, std::move(values), {}, type) {}

bool PowerSeries::gap_free() const {
  return std::all_of(present_.begin(), present_.end(),
                     [](std::uint8_t p) { return p != 0; });
}

std::size_t PowerSeries::present_count() const {
  return static_cast<std::size_t>(
      std::count_if(present_.begin(), present_.end(),
                    [](std::uint8_t p) { return p != 0; }));
}

PowerSeries PowerSeries::slice(std::size_t offset, std::size_t count) const {
  if (offset + count > size() || count == 0) {
    fail(ErrorCode::kInvalidArgument, "slice out of range");
  }
  std::vector<double> values(values_.begin() + offset,
                             values_.begin() + offset + count);
  std::vector<std::uint8_t> present(present_.begin() + offset,
                                    present_.begin() + offset + count);
  return PowerSeries(time_at(offset), interval_, std::move(values),
                     std::move(present), type_);
}

PowerSeries PowerSeries::with_power_type(PowerType type) const {
  PowerSeries copy = *this;
  copy.type_ = type;
  return copy;
}

HouseholdDataset::HouseholdDataset(std::string label, PowerSeries mains,
                                   std::vector<Channel> appliances)
    : label_(std::move(label)),
      mains_(std::move(mains)),
      appliances_(std::move(appliances)) {
  if (appliances_.empty()) {
    fail(ErrorCode::kInvalidArgument, "a household needs appliance channels");
  }
  std::set<std::string> seen;
  const PowerType appliance_type = appliances_.front().second.power_type();
  for (const auto& [name, series] : appliances_) {
    if (!seen.insert(name).second) {
      fail(ErrorCode::kDuplicateName, "appliance '" + name + "' listed twice");
    }
    if (series.start_time() != mains_.start_time() ||
        series.interval() != mains_.interval() ||
        series.size() != mains_.size()) {
      fail(ErrorCode::kGridMismatch,
           "appliance '" + name + "' is not on the mains grid");
    }
    if (series.power_type() != appliance_type) {
      fail(ErrorCode::kIncompatiblePowerTypes,
           "appliance channels must share one power type");
    }
  }
}

const PowerSeries* HouseholdDataset::find_appliance(
    std::string_view name) const {
  for (const auto& [channel_name, series] : appliances_) {
    if (channel_name == name) return &series;
  }
  return nullptr;
}

namespace {

void check_raw(std::span<const RawReading> raw) {
  if (raw.empty()) {
    fail(ErrorCode::kEmptySeries, "no raw readings");
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i].watts)) {
      fail(ErrorCode::kInvalidArgument,
           "raw reading " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && raw[i].timestamp <= raw[i - 1].timestamp) {
      fail(ErrorCode::kUnorderedInput,
           "raw timestamps must be strictly increasing (reading " +
               std::to_string(i) + ")");
    }
  }
}

}  // namespace

PowerSeries resample_onto(std::span<const RawReading> raw,
                          std::int64_t grid_start, std::size_t slots,
                          std::int64_t interval, const FillPolicy& policy,
                          PowerType type, ResampleStats* stats) {
  check_raw(raw);
  if (interval <= 0) {
    fail(ErrorCode::kInvalidArgument, "interval must be positive");
  }
  if (slots == 0) {
    fail(ErrorCode::kEmptySeries, "empty target grid");
  }

  ResampleStats local;
  for (const RawReading& reading : raw) {
    if (reading.watts < 0.0) ++local.clamped_negative;
  }

  std::vector<double> values(slots, 0.0);
  std::vector<std::uint8_t> present(slots, 0);
  const std::int64_t max_age = policy.max_gap_slots * interval;

  std::size_t idx = 0;  // last raw observation at or before the slot time
  for (std::size_t s = 0; s < slots; ++s) {
    const std::int64_t t =
        grid_start + interval * static_cast<std::int64_t>(s);
    while (idx + 1 < raw.size() && raw[idx + 1].timestamp <= t) ++idx;
    if (raw[idx].timestamp > t || t - raw[idx].timestamp > max_age) {
      local.missing_slots += 1;
      continue;
    }
    values[s] = std::max(0.0, raw[idx].watts);
    present[s] = 1;
  }

  if (stats != nullptr) *stats = local;
  return PowerSeries(grid_start, interval, std::move(values),
                     std::move(present), type);
}

PowerSeries resample(std::span<const RawReading> raw, std::int64_t interval,
                     const FillPolicy& policy, PowerType type,
                     ResampleStats* stats) {
  check_raw(raw);
  if (interval <= 0) {
    fail(ErrorCode::kInvalidArgument, "interval must be positive");
  }
  const std::int64_t first = raw.front().timestamp;
  const std::int64_t last = raw.back().timestamp;
  const std::int64_t span = last - first;
  const std::size_t slots =
      static_cast<std::size_t>((span + interval - 1) / interval) + 1;
  return resample_onto(raw, first, slots, interval, policy, type, stats);
}

HouseholdDataset align(const HouseholdDataset& dataset) {
  const std::size_t n = dataset.size();
  std::vector<std::size_t> keep;
  keep.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    bool complete = dataset.mains().present(i);
    for (const auto& [name, series] : dataset.appliances()) {
      complete = complete && series.present(i);
    }
    if (complete) keep.push_back(i);
  }
  if (keep.empty()) {
    fail(ErrorCode::kNoOverlap,
         "no slot has all channels present in '" + dataset.label() + "'");
  }
  if (keep.size() == n) return dataset;

  const std::int64_t start = dataset.mains().time_at(keep.front());
  auto compact = [&](const PowerSeries& series) {
    std::vector<double> values;
    values.reserve(keep.size());
    for (std::size_t i : keep) values.push_back(series.watts(i));
    return PowerSeries(start, series.interval(), std::move(values),
                       series.power_type());
  };

  std::vector<HouseholdDataset::Channel> appliances;
  appliances.reserve(dataset.appliance_count());
  for (const auto& [name, series] : dataset.appliances()) {
    appliances.emplace_back(name, compact(series));
  }
  return HouseholdDataset(dataset.label(), compact(dataset.mains()),
                          std::move(appliances));
}

ChronoSplit chrono_split(const HouseholdDataset& dataset,
                         const SplitFractions& fractions) {
  const double sum =
      fractions.train + fractions.validation + fractions.test;
  if (fractions.train <= 0.0 || fractions.validation <= 0.0 ||
      fractions.test <= 0.0 || std::abs(sum - 1.0) > 1e-9) {
    fail(ErrorCode::kInvalidArgument,
         "split fractions must be positive and sum to 1");
  }
  const auto total = static_cast<double>(dataset.size());
  const auto cut1 = static_cast<std::size_t>(
      std::floor(total * fractions.train));
  const auto cut2 = static_cast<std::size_t>(
      std::floor(total * (fractions.train + fractions.validation)));
  if (cut1 == 0 || cut2 <= cut1 || cut2 >= dataset.size()) {
    fail(ErrorCode::kSplitTooSmall,
         "T=" + std::to_string(dataset.size()) +
             " leaves an empty partition");
  }

  auto part = [&](std::size_t offset, std::size_t count) {
    std::vector<HouseholdDataset::Channel> appliances;
    appliances.reserve(dataset.appliance_count());
    for (const auto& [name, series] : dataset.appliances()) {
      appliances.emplace_back(name, series.slice(offset, count));
    }
    return HouseholdDataset(dataset.label(),
                            dataset.mains().slice(offset, count),
                            std::move(appliances));
  };

  return ChronoSplit{part(0, cut1), part(cut1, cut2 - cut1),
                     part(cut2, dataset.size() - cut2)};
}

HouseholdDataset restrict_appliances(const HouseholdDataset& dataset,
                                     std::span<const std::string> names) {
  for (const auto& name : names) {
    if (dataset.find_appliance(name) == nullptr) {
      fail(ErrorCode::kUnknownAppliance,
           "appliance '" + name + "' not in household '" + dataset.label() +
               "'");
    }
  }
  std::vector<HouseholdDataset::Channel> kept;
  for (const auto& channel : dataset.appliances()) {
    if (std::find(names.begin(), names.end(), channel.first) != names.end()) {
      kept.push_back(channel);
    }
  }
  return HouseholdDataset(dataset.label(), dataset.mains(), std::move(kept));
}

}  // namespace nilmgap
