#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nilmgap/nn/serialize.hpp"
#include "nilmgap/nn/train.hpp"
#include "nilmgap/timeseries.hpp"

namespace nilmgap {

// The two neural disaggregators: a window-to-point LSTM regressor over
// 49-sample windows predicting the window's last slot, and a
// sequence-to-point convolutional regressor over 99-sample windows
// predicting the midpoint.
enum class ArchId { kLstmW49, kS2pW99 };

enum class WindowMode { kMidpoint, kLast };

const char* to_string(ArchId arch);
ArchId arch_from_string(std::string_view name);

std::vector<nn::LayerSpec> architecture(ArchId arch);
std::size_t window_length(ArchId arch);  // 49 / 99
WindowMode window_mode(ArchId arch);     // LAST / MIDPOINT

// Trained per-appliance regressor plus the constants needed to reproduce
// its predictions exactly.
struct NeuralModel {
  ArchId arch;
  std::size_t window = 0;
  nn::Network network;
  double input_mean = 0.0;   // training aggregate mean
  double input_std = 1.0;    // training aggregate std (> 0)
  double target_scale = 1.0; // training appliance std, floored at 1 W
  std::uint64_t seed = 0;
};

struct WindowBatch {
  nn::Tensor inputs;                  // [count, window, 1]
  std::vector<std::size_t> centers;   // slot index each window predicts
};

// Stride-1 sliding windows over a gap-free series, padded with pad_value so
// every slot receives exactly one prediction: MIDPOINT pads (window-1)/2 on
// both ends, LAST pads window-1 in front.
WindowBatch make_windows(const PowerSeries& aggregate, std::size_t window,
                         WindowMode mode, double pad_value);

// Train one appliance regressor. Inputs are standardized by the training
// aggregate's mean/std and targets divided by the appliance's training std
// (floored at 1 W); training runs through nn::train with cfg, drawing at
// most cfg.max_train_windows / cfg.max_val_windows windows evenly from each
// split.
NeuralModel fit(const HouseholdDataset& train, const HouseholdDataset& val,
                const std::string& appliance, ArchId arch,
                const nn::TrainConfig& config,
                nn::TrainHistory* history = nullptr);

// Per-slot estimate on the aggregate's grid: network output times
// target_scale, clamped below at 0 W.
PowerSeries predict(const NeuralModel& model, const PowerSeries& aggregate);

void save_model(const NeuralModel& model, const std::filesystem::path& file);
NeuralModel load_model(const std::filesystem::path& file);

}  // namespace nilmgap
