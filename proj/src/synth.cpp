#include "nilmgap/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "nilmgap/rng.hpp"
#include "nilmgap/util.hpp"

namespace nilmgap {

namespace {

void validate_model(const ApplianceModel& model) {
  if (model.name.empty()) {
    fail(ErrorCode::kInvalidArgument, "appliance model needs a name");
  }
  if (model.levels.size() < 2 || model.levels.front() != 0.0) {
    fail(ErrorCode::kInvalidArgument,
         "model '" + model.name + "' needs level 0 = 0 W plus ON levels");
  }
  for (std::size_t i = 1; i < model.levels.size(); ++i) {
    if (!(model.levels[i] > 0.0) || !std::isfinite(model.levels[i]) ||
        model.levels[i] <= model.levels[i - 1]) {
      fail(ErrorCode::kInvalidArgument,
           "model '" + model.name + "' levels must be increasing and > 0");
    }
  }
  if ((model.kind == ApplianceKind::kOnOff ||
       model.kind == ApplianceKind::kCyclic) &&
      model.levels.size() != 2) {
    fail(ErrorCode::kInvalidArgument,
         "model '" + model.name + "' takes exactly one ON level");
  }
  if (model.mean_duration < 1 || model.mean_gap < 1) {
    fail(ErrorCode::kInvalidArgument,
         "model '" + model.name + "' durations must be >= 1 slot");
  }
}

std::int64_t sample_dwell(Rng& rng, std::int64_t mean) {
  const std::int64_t lo = std::max<std::int64_t>(1, mean / 2);
  const std::int64_t hi = std::max(lo, mean + mean / 2);
  return rng.uniform_int(lo, hi);
}

std::vector<double> generate_channel(const ApplianceModel& model,
                                     std::size_t slots, std::uint64_t seed) {
  std::vector<double> values(slots, 0.0);
  if (model.kind == ApplianceKind::kCyclic) {
    // Strictly periodic: ON for mean_duration, OFF for mean_gap, from t=0.
    const std::int64_t period = model.mean_duration + model.mean_gap;
    for (std::size_t t = 0; t < slots; ++t) {
      const std::int64_t phase = static_cast<std::int64_t>(t) % period;
      values[t] = phase < model.mean_duration ? model.levels[1] : 0.0;
    }
    return values;
  }

  Rng rng(seed);
  std::size_t t = 0;
  bool on = false;  // start OFF
  while (t < slots) {
    std::int64_t dwell;
    double level;
    if (on) {
      dwell = sample_dwell(rng, model.mean_duration);
      const std::size_t state =
          model.kind == ApplianceKind::kMultiState
              ? static_cast<std::size_t>(rng.uniform_int(
                    1, static_cast<std::int64_t>(model.levels.size()) - 1))
              : 1;
      level = model.levels[state];
    } else {
      dwell = sample_dwell(rng, model.mean_gap);
      level = 0.0;
    }
    for (std::int64_t k = 0; k < dwell && t < slots; ++k, ++t) {
      values[t] = level;
    }
    on = !on;
  }
  return values;
}

std::vector<double> generate_raw_residual(const NoiseSpec& noise,
                                          std::size_t slots,
                                          std::uint64_t seed) {
  std::vector<double> eta(slots, noise.base_watts);
  if (!noise.pulses.has_value()) return eta;
  const PulseSpec& p = *noise.pulses;
  if (p.level_hi < p.level_lo || p.duration_lo < 1 ||
      p.duration_hi < p.duration_lo || p.gap_lo < 1 || p.gap_hi < p.gap_lo ||
      p.level_lo < 0.0) {
    fail(ErrorCode::kInvalidArgument, "malformed pulse spec");
  }
  Rng rng(seed);
  std::size_t t = 0;
  bool in_pulse = false;
  while (t < slots) {
    if (in_pulse) {
      const std::int64_t dwell = rng.uniform_int(p.duration_lo, p.duration_hi);
      const double level = rng.uniform(p.level_lo, p.level_hi);
      for (std::int64_t k = 0; k < dwell && t < slots; ++k, ++t) {
        eta[t] += level;
      }
    } else {
      t += static_cast<std::size_t>(rng.uniform_int(p.gap_lo, p.gap_hi));
    }
    in_pulse = !in_pulse;
  }
  return eta;
}

}  // namespace

HouseholdDataset generate(const std::vector<ApplianceModel>& models,
                          const NoiseSpec& noise, std::size_t slots,
                          std::uint64_t seed, const std::string& label,
                          std::int64_t interval) {
  if (models.empty()) {
    fail(ErrorCode::kInvalidArgument, "need at least one appliance model");
  }
  if (slots < 100) {
    fail(ErrorCode::kInvalidArgument, "need at least 100 slots");
  }
  if (!(noise.target_nar >= 0.0) || noise.target_nar >= 1.0) {
    fail(ErrorCode::kInvalidArgument, "target NAR must be in [0, 1)");
  }
  for (const ApplianceModel& model : models) validate_model(model);

  std::vector<std::vector<double>> channels;
  channels.reserve(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    channels.push_back(
        generate_channel(models[i], slots, splitmix64(seed + i + 1)));
  }
  std::vector<double> eta =
      generate_raw_residual(noise, slots, splitmix64(seed));

  // Per-slot appliance sums, plain left-to-right (same order as denoise()).
  std::vector<double> appliance_total(slots, 0.0);
  for (std::size_t t = 0; t < slots; ++t) {
    double sum = 0.0;
    for (const auto& channel : channels) sum += channel[t];
    appliance_total[t] = sum;
  }

  NeumaierSum signal_sum;
  NeumaierSum eta_sum;
  for (std::size_t t = 0; t < slots; ++t) {
    signal_sum.add(appliance_total[t]);
    eta_sum.add(eta[t]);
  }
  const double signal_energy = signal_sum.value();
  const double eta_energy = eta_sum.value();

  // mains = sum(x) + scale * eta. With everything nonnegative,
  //   NAR = scale*E / (S + scale*E)  =>  scale = nar*S / ((1-nar)*E).
  double scale = 0.0;
  if (noise.target_nar > 0.0) {
    if (eta_energy <= 0.0) {
      fail(ErrorCode::kInfeasibleNoise,
           "residual model is identically zero; target NAR " +
               format_g17(noise.target_nar) + " is unreachable");
    }
    if (signal_energy <= 0.0) {
      fail(ErrorCode::kInfeasibleNoise,
           "appliance channels are identically zero; NAR would be 1");
    }
    scale = noise.target_nar * signal_energy /
            ((1.0 - noise.target_nar) * eta_energy);
  }

  std::vector<double> mains(slots, 0.0);
  for (std::size_t t = 0; t < slots; ++t) {
    mains[t] = appliance_total[t] + scale * eta[t];
  }

  std::vector<HouseholdDataset::Channel> appliances;
  appliances.reserve(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    appliances.emplace_back(
        models[i].name, PowerSeries(0, interval, std::move(channels[i]),
                                    PowerType::kActive));
  }
  return HouseholdDataset(
      label, PowerSeries(0, interval, std::move(mains), PowerType::kActive),
      std::move(appliances));
}

HouseholdDataset generate(const SynthConfig& config) {
  return generate(config.models, config.noise, config.slots, config.seed,
                  config.label, config.interval);
}

namespace {

std::int64_t parse_int(std::string_view token, int line) {
  token = trim(token);
  std::int64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    fail(ErrorCode::kSyntaxError,
         "line " + std::to_string(line) + ": expected integer, got '" +
             std::string(token) + "'");
  }
  return value;
}

double parse_float(std::string_view token, int line) {
  const std::string text{trim(token)};
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() ||
      !std::isfinite(value)) {
    fail(ErrorCode::kSyntaxError,
         "line " + std::to_string(line) + ": expected number, got '" + text +
             "'");
  }
  return value;
}

std::pair<double, double> parse_float_pair(std::string_view token, int line) {
  const auto parts = split(token, ',');
  if (parts.size() != 2) {
    fail(ErrorCode::kSyntaxError,
         "line " + std::to_string(line) + ": expected '<lo>, <hi>'");
  }
  return {parse_float(parts[0], line), parse_float(parts[1], line)};
}

ApplianceKind parse_kind(std::string_view token, int line) {
  const std::string_view kind = trim(token);
  if (kind == "onoff") return ApplianceKind::kOnOff;
  if (kind == "multistate") return ApplianceKind::kMultiState;
  if (kind == "cyclic") return ApplianceKind::kCyclic;
  fail(ErrorCode::kSyntaxError,
       "line " + std::to_string(line) + ": unknown appliance kind '" +
           std::string(kind) + "'");
}

}  // namespace

SynthConfig parse_synth_config(std::string_view text) {
  SynthConfig config;
  config.models.clear();
  int line_no = 0;
  for (std::string_view raw_line : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw_line;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::kSyntaxError,
           "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));

    if (key == "label") {
      config.label = std::string(value);
    } else if (key == "interval") {
      config.interval = parse_int(value, line_no);
    } else if (key == "slots") {
      config.slots = static_cast<std::size_t>(parse_int(value, line_no));
    } else if (key == "seed") {
      config.seed = static_cast<std::uint64_t>(parse_int(value, line_no));
    } else if (key == "target_nar") {
      config.noise.target_nar = parse_float(value, line_no);
    } else if (key == "noise_base") {
      config.noise.base_watts = parse_float(value, line_no);
    } else if (key == "noise_pulse_level") {
      const auto [lo, hi] = parse_float_pair(value, line_no);
      if (!config.noise.pulses) config.noise.pulses = PulseSpec{};
      config.noise.pulses->level_lo = lo;
      config.noise.pulses->level_hi = hi;
    } else if (key == "noise_pulse_duration") {
      const auto [lo, hi] = parse_float_pair(value, line_no);
      if (!config.noise.pulses) config.noise.pulses = PulseSpec{};
      config.noise.pulses->duration_lo = static_cast<std::int64_t>(lo);
      config.noise.pulses->duration_hi = static_cast<std::int64_t>(hi);
    } else if (key == "noise_pulse_gap") {
      const auto [lo, hi] = parse_float_pair(value, line_no);
      if (!config.noise.pulses) config.noise.pulses = PulseSpec{};
      config.noise.pulses->gap_lo = static_cast<std::int64_t>(lo);
      config.noise.pulses->gap_hi = static_cast<std::int64_t>(hi);
    } else if (key.starts_with("appliance ")) {
      ApplianceModel model;
      model.name = std::string(trim(key.substr(10)));
      for (const auto& existing : config.models) {
        if (existing.name == model.name) {
          fail(ErrorCode::kDuplicateName,
               "line " + std::to_string(line_no) + ": appliance '" +
                   model.name + "' listed twice");
        }
      }
      const auto parts = split(value, ':');
      if (parts.size() != 4) {
        fail(ErrorCode::kSyntaxError,
             "line " + std::to_string(line_no) +
                 ": expected '<kind> : <levels> : <duration> : <gap>'");
      }
      model.kind = parse_kind(parts[0], line_no);
      model.levels.push_back(0.0);
      for (std::string_view level : split(parts[1], ',')) {
        model.levels.push_back(parse_float(level, line_no));
      }
      model.mean_duration = parse_int(parts[2], line_no);
      model.mean_gap = parse_int(parts[3], line_no);
      config.models.push_back(std::move(model));
    } else {
      fail(ErrorCode::kSyntaxError,
           "line " + std::to_string(line_no) + ": unknown key '" +
               std::string(key) + "'");
    }
  }
  if (config.models.empty()) {
    fail(ErrorCode::kMissingKey, "config defines no appliance models");
  }
  return config;
}

SynthConfig default_synth_config() {
  SynthConfig config;
  config.label = "synthetic";
  config.noise.base_watts = 40.0;
  config.noise.pulses =
      PulseSpec{20.0, 2500.0, /*duration*/ 6, 180, /*gap*/ 30, 300};

  ApplianceModel fridge;
  fridge.name = "fridge";
  fridge.kind = ApplianceKind::kCyclic;
  fridge.levels = {0.0, 120.0};
  fridge.mean_duration = 40;
  fridge.mean_gap = 80;

  ApplianceModel kettle;
  kettle.name = "kettle";
  kettle.kind = ApplianceKind::kOnOff;
  kettle.levels = {0.0, 2000.0};
  kettle.mean_duration = 15;
  kettle.mean_gap = 220;

  ApplianceModel washer;
  washer.name = "washer";
  washer.kind = ApplianceKind::kMultiState;
  washer.levels = {0.0, 500.0, 1900.0};
  washer.mean_duration = 50;
  washer.mean_gap = 350;

  config.models = {fridge, kettle, washer};
  return config;
}

}  // namespace nilmgap
