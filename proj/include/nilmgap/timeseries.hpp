#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nilmgap/error.hpp"

namespace nilmgap {

// AC power type of a measurement channel: active (P), reactive (Q) or
// apparent (S) power.
enum class PowerType { kActive, kReactive, kApparent };

char power_type_code(PowerType type);          // 'P' | 'Q' | 'S'
PowerType power_type_from_code(char code);

// Raw meter reading before gridding.
struct RawReading {
  std::int64_t timestamp = 0;  // Unix seconds, UTC
  double watts = 0.0;
};

// Bounded forward fill: a slot more than max_gap_slots intervals behind the
// last raw observation stays MISSING instead of extending the plateau.
struct FillPolicy {
  std::int64_t max_gap_slots = 3;
};

struct ResampleStats {
  std::size_t clamped_negative = 0;  // raw readings clamped up to 0 W
  std::size_t missing_slots = 0;
};

// Uniformly sampled power signal. Each slot is either a finite watt value
// >= 0 or MISSING; presence is tracked per slot rather than through a
// sentinel value, so downstream sums can define their domain explicitly.
// Instances are immutable after construction and safe to share across
// threads.
class PowerSeries {
 public:
  PowerSeries(std::int64_t start_time, std::int64_t interval,
              std::vector<double> values, std::vector<std::uint8_t> present,
              PowerType type);

  // Gap-free convenience constructor.
  PowerSeries(std::int64_t start_time, std::int64_t interval,
              std::vector<double> values, PowerType type);

  std::int64_t start_time() const { return start_time_; }
  std::int64_t interval() const { return interval_; }
  std::size_t size() const { return values_.size(); }
  PowerType power_type() const { return type_; }

  std::int64_t time_at(std::size_t i) const {
    return start_time_ + interval_ * static_cast<std::int64_t>(i);
  }

  bool present(std::size_t i) const { return present_[i] != 0; }
  // Precondition: present(i).
  double watts(std::size_t i) const { return values_[i]; }
  std::optional<double> at(std::size_t i) const {
    if (!present(i)) return std::nullopt;
    return values_[i];
  }

  bool gap_free() const;
  std::size_t present_count() const;

  // MISSING slots hold 0 in the raw storage.
  const std::vector<double>& values() const { return values_; }
  const std::vector<std::uint8_t>& presence() const { return present_; }

  // Slice of [offset, offset + count); grid start shifts accordingly.
  PowerSeries slice(std::size_t offset, std::size_t count) const;

  PowerSeries with_power_type(PowerType type) const;

  bool operator==(const PowerSeries& other) const = default;

 private:
  std::int64_t start_time_;
  std::int64_t interval_;
  std::vector<double> values_;
  std::vector<std::uint8_t> present_;
  PowerType type_;
};

// One household: a mains channel plus M named appliance channels on a shared
// grid. Appliance order is preserved as given (it is the combination order
// used by the disaggregators and by per-slot channel sums).
class HouseholdDataset {
 public:
  using Channel = std::pair<std::string, PowerSeries>;

  HouseholdDataset(std::string label, PowerSeries mains,
                   std::vector<Channel> appliances);

  const std::string& label() const { return label_; }
  const PowerSeries& mains() const { return mains_; }
  const std::vector<Channel>& appliances() const { return appliances_; }
  std::size_t appliance_count() const { return appliances_.size(); }

  std::size_t size() const { return mains_.size(); }
  std::int64_t interval() const { return mains_.interval(); }
  std::int64_t start_time() const { return mains_.start_time(); }

  // All appliance channels share one power type by construction.
  PowerType appliance_power_type() const {
    return appliances_.front().second.power_type();
  }

  const PowerSeries* find_appliance(std::string_view name) const;

  bool operator==(const HouseholdDataset& other) const = default;

 private:
  std::string label_;
  PowerSeries mains_;
  std::vector<Channel> appliances_;
};

// Forward-fill raw readings onto the uniform grid that covers
// [first, last] raw timestamp, anchored at the first timestamp.
PowerSeries resample(std::span<const RawReading> raw, std::int64_t interval,
                     const FillPolicy& policy, PowerType type,
                     ResampleStats* stats = nullptr);

// Same fill rule on an explicit grid (used to put several channels of one
// household onto a shared anchor).
PowerSeries resample_onto(std::span<const RawReading> raw,
                          std::int64_t grid_start, std::size_t slots,
                          std::int64_t interval, const FillPolicy& policy,
                          PowerType type, ResampleStats* stats = nullptr);

// Restrict to slots where mains and every appliance are present. The kept
// slots are compacted onto a fresh uniform grid anchored at the first
// complete slot's timestamp, so the result is gap-free by construction.
HouseholdDataset align(const HouseholdDataset& dataset);

struct SplitFractions {
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;
};

struct ChronoSplit {
  HouseholdDataset train;
  HouseholdDataset validation;
  HouseholdDataset test;
};

// Contiguous chronological partition at floor(T*f_train) and
// floor(T*(f_train+f_val)). No shuffling.
ChronoSplit chrono_split(const HouseholdDataset& dataset,
                         const SplitFractions& fractions = {});

// Subset of appliance channels, keeping the dataset's channel order.
HouseholdDataset restrict_appliances(const HouseholdDataset& dataset,
                                     std::span<const std::string> names);

}  // namespace nilmgap
