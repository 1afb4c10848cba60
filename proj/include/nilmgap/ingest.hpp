#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nilmgap/timeseries.hpp"

namespace nilmgap {

struct ChannelSpec {
  std::string name;
  std::filesystem::path path;
  PowerType type = PowerType::kActive;
};

// Parsed dataset descriptor. Relative channel paths resolve against
// base_dir (the descriptor file's directory).
struct DatasetDescriptor {
  std::string label;
  std::int64_t interval = 0;
  FillPolicy fill;
  ChannelSpec mains;
  std::vector<ChannelSpec> appliances;
  std::filesystem::path base_dir;
};

// Grammar, one statement per line, '#' starts a comment:
//   label = <text>
//   interval = <int seconds>
//   max_gap = <int slots>            (optional, default 3)
//   mains = <path> : <P|Q|S>
//   appliance <name> = <path> : <P|Q|S>
// label, interval, mains and at least one appliance are mandatory; unknown
// keys are rejected with their line number.
DatasetDescriptor parse_descriptor(std::string_view text);

DatasetDescriptor load_descriptor(const std::filesystem::path& file);

// Two-column CSV `timestamp,power` (Unix seconds, watts). A single leading
// header row starting with a non-digit is skipped.
std::vector<RawReading> read_power_csv(const std::filesystem::path& file);

// Resample every channel onto the shared grid covered by all of them, then
// align. Deterministic: identical files and descriptor give an identical
// in-memory dataset.
HouseholdDataset load_household(const DatasetDescriptor& descriptor);

// Write a household as descriptor + per-channel CSVs under dir, loadable by
// load_household. MISSING slots are written as absent rows, so the round
// trip is exact for gap-free (aligned) datasets.
void write_household(const HouseholdDataset& dataset,
                     const std::filesystem::path& dir,
                     const FillPolicy& fill = {});

}  // namespace nilmgap
