#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nilmgap/timeseries.hpp"

namespace nilmgap {

enum class ApplianceKind {
  kOnOff,       // one ON level, randomized dwells
  kMultiState,  // several ON levels, one picked per activation
  kCyclic       // one ON level, exact duration/gap period
};

// Counter-based appliance state machine. Levels are watt plateaus with
// levels[0] fixed at 0 W (OFF). Randomized dwells are drawn uniformly from
// [mean/2, mean + mean/2] slots, integer-exact.
struct ApplianceModel {
  std::string name;
  ApplianceKind kind = ApplianceKind::kOnOff;
  std::vector<double> levels;        // levels[0] == 0, others > 0, increasing
  std::int64_t mean_duration = 1;    // ON dwell, slots
  std::int64_t mean_gap = 1;         // OFF dwell, slots
};

// Rectangular pulse train standing in for unmetered load.
struct PulseSpec {
  double level_lo = 0.0;
  double level_hi = 0.0;
  std::int64_t duration_lo = 1;
  std::int64_t duration_hi = 1;
  std::int64_t gap_lo = 1;
  std::int64_t gap_hi = 1;
};

// Residual model. The raw residual (base + pulses) is generated first and
// then scaled by the closed-form factor that makes the household's
// noise-aggregate ratio hit target_nar exactly.
struct NoiseSpec {
  double target_nar = 0.0;  // in [0, 1)
  double base_watts = 0.0;
  std::optional<PulseSpec> pulses;
};

// Parsed form of the synth CLI's config file.
struct SynthConfig {
  std::string label = "synthetic";
  std::int64_t interval = 10;
  std::size_t slots = 100000;
  std::uint64_t seed = 1;
  NoiseSpec noise;
  std::vector<ApplianceModel> models;
};

HouseholdDataset generate(const std::vector<ApplianceModel>& models,
                          const NoiseSpec& noise, std::size_t slots,
                          std::uint64_t seed,
                          const std::string& label = "synthetic",
                          std::int64_t interval = 10);

HouseholdDataset generate(const SynthConfig& config);

// Key-value grammar, one statement per line, '#' starts a comment:
//   label = <text>
//   interval = <int>
//   slots = <int>
//   seed = <int>
//   target_nar = <float>
//   noise_base = <watts>
//   noise_pulse_level = <lo>, <hi>
//   noise_pulse_duration = <lo>, <hi>
//   noise_pulse_gap = <lo>, <hi>
//   appliance <name> = <onoff|multistate|cyclic> : <levels,...> : <mean_duration> : <mean_gap>
SynthConfig parse_synth_config(std::string_view text);

// Three-appliance household in the spirit of the benchmarked ones: a cyclic
// fridge, a short high-power kettle and a two-level washer, plus a pulse
// residual that overlaps the appliance power range.
SynthConfig default_synth_config();

}  // namespace nilmgap
