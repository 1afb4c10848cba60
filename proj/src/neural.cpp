#include "nilmgap/neural.hpp"

#include <algorithm>
#include <cmath>

#include "nilmgap/util.hpp"

namespace nilmgap {

const char* to_string(ArchId arch) {
  switch (arch) {
    case ArchId::kLstmW49: return "LSTM_W49";
    case ArchId::kS2pW99: return "S2P_W99";
  }
  return "?";
}

ArchId arch_from_string(std::string_view name) {
  if (name == "LSTM_W49") return ArchId::kLstmW49;
  if (name == "S2P_W99") return ArchId::kS2pW99;
  fail(ErrorCode::kInvalidArgument,
       "unknown architecture '" + std::string(name) + "'");
}

std::vector<nn::LayerSpec> architecture(ArchId arch) {
  using nn::LayerSpec;
  switch (arch) {
    case ArchId::kS2pW99:
      return {LayerSpec::conv1d(16, 9), LayerSpec::relu(),
              LayerSpec::conv1d(16, 7), LayerSpec::relu(),
              LayerSpec::conv1d(24, 5), LayerSpec::relu(),
              LayerSpec::flatten(),     LayerSpec::dense(256),
              LayerSpec::relu(),        LayerSpec::dense(1)};
    case ArchId::kLstmW49:
      return {LayerSpec::conv1d(16, 4), LayerSpec::lstm(32),
              LayerSpec::lstm(64),      LayerSpec::dense(64),
              LayerSpec::relu(),        LayerSpec::dense(1)};
  }
  fail(ErrorCode::kInvalidArgument, "unknown architecture");
}

std::size_t window_length(ArchId arch) {
  return arch == ArchId::kS2pW99 ? 99 : 49;
}

WindowMode window_mode(ArchId arch) {
  return arch == ArchId::kS2pW99 ? WindowMode::kMidpoint : WindowMode::kLast;
}

namespace {

void require_gap_free(const PowerSeries& series, const char* what) {
  if (!series.gap_free()) {
    fail(ErrorCode::kInvalidArgument,
         std::string(what) + " must be gap-free; align the dataset first");
  }
}

// Copies the window centered (or ending) at each requested slot, reading
// pad_value outside [0, T).
void fill_windows(const std::vector<double>& values, std::size_t window,
                  WindowMode mode, double pad_value,
                  std::span<const std::size_t> centers, nn::Tensor* out) {
  const auto total = static_cast<std::ptrdiff_t>(values.size());
  const std::ptrdiff_t lead =
      mode == WindowMode::kMidpoint
          ? static_cast<std::ptrdiff_t>((window - 1) / 2)
          : static_cast<std::ptrdiff_t>(window - 1);
  for (std::size_t w = 0; w < centers.size(); ++w) {
    double* dst = out->data() + w * window;
    const auto center = static_cast<std::ptrdiff_t>(centers[w]);
    for (std::size_t j = 0; j < window; ++j) {
      const std::ptrdiff_t t =
          center - lead + static_cast<std::ptrdiff_t>(j);
      dst[j] = (t < 0 || t >= total) ? pad_value : values[static_cast<std::size_t>(t)];
    }
  }
}

// Evenly spaced subsample of [0, total); cap = 0 keeps everything.
std::vector<std::size_t> spaced_indices(std::size_t total, std::size_t cap) {
  std::vector<std::size_t> indices;
  if (cap == 0 || cap >= total) {
    indices.resize(total);
    for (std::size_t i = 0; i < total; ++i) indices[i] = i;
    return indices;
  }
  indices.reserve(cap);
  for (std::size_t k = 0; k < cap; ++k) {
    indices.push_back(k * total / cap);
  }
  return indices;
}

struct ChannelStats {
  double mean = 0.0;
  double stddev = 0.0;
};

ChannelStats channel_stats(const PowerSeries& series) {
  NeumaierSum sum;
  for (std::size_t i = 0; i < series.size(); ++i) sum.add(series.watts(i));
  const double mean = sum.value() / static_cast<double>(series.size());
  NeumaierSum sq;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double d = series.watts(i) - mean;
    sq.add(d * d);
  }
  return {mean,
          std::sqrt(sq.value() / static_cast<double>(series.size()))};
}

std::vector<double> standardized(const PowerSeries& series, double mean,
                                 double stddev) {
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    out[i] = (series.watts(i) - mean) / stddev;
  }
  return out;
}

nn::Dataset windows_for_split(const HouseholdDataset& split,
                              const PowerSeries& appliance, ArchId arch,
                              double mean, double stddev, double target_scale,
                              std::size_t cap) {
  const std::size_t window = window_length(arch);
  if (window > split.size()) {
    fail(ErrorCode::kWindowTooLong,
         "window " + std::to_string(window) + " exceeds split length " +
             std::to_string(split.size()));
  }
  const std::vector<double> z = standardized(split.mains(), mean, stddev);
  const std::vector<std::size_t> centers = spaced_indices(split.size(), cap);

  nn::Tensor inputs({centers.size(), window, 1});
  // Standardized padding 0 corresponds to the raw training mean.
  fill_windows(z, window, window_mode(arch), 0.0, centers, &inputs);

  nn::Tensor targets({centers.size(), std::size_t{1}});
  for (std::size_t k = 0; k < centers.size(); ++k) {
    targets[k] = appliance.watts(centers[k]) / target_scale;
  }
  return nn::Dataset{std::move(inputs), std::move(targets)};
}

}  // namespace

WindowBatch make_windows(const PowerSeries& aggregate, std::size_t window,
                         WindowMode mode, double pad_value) {
  if (window == 0) {
    fail(ErrorCode::kInvalidArgument, "window length must be >= 1");
  }
  if (window > aggregate.size()) {
    fail(ErrorCode::kWindowTooLong,
         "window " + std::to_string(window) + " exceeds series length " +
             std::to_string(aggregate.size()));
  }
  if (mode == WindowMode::kMidpoint && window % 2 == 0) {
    fail(ErrorCode::kInvalidArgument,
         "midpoint windows must have odd length");
  }
  require_gap_free(aggregate, "window input");

  WindowBatch batch;
  batch.centers.resize(aggregate.size());
  for (std::size_t i = 0; i < aggregate.size(); ++i) batch.centers[i] = i;
  batch.inputs = nn::Tensor({aggregate.size(), window, 1});
  fill_windows(aggregate.values(), window, mode, pad_value, batch.centers,
               &batch.inputs);
  return batch;
}

NeuralModel fit(const HouseholdDataset& train, const HouseholdDataset& val,
                const std::string& appliance, ArchId arch,
                const nn::TrainConfig& config, nn::TrainHistory* history) {
  const PowerSeries* train_appliance = train.find_appliance(appliance);
  const PowerSeries* val_appliance = val.find_appliance(appliance);
  if (train_appliance == nullptr || val_appliance == nullptr) {
    fail(ErrorCode::kUnknownAppliance,
         "appliance '" + appliance + "' missing from a split");
  }
  require_gap_free(train.mains(), "training aggregate");
  require_gap_free(val.mains(), "validation aggregate");
  require_gap_free(*train_appliance, "training appliance channel");
  require_gap_free(*val_appliance, "validation appliance channel");

  const ChannelStats aggregate_stats = channel_stats(train.mains());
  const double input_std = std::max(aggregate_stats.stddev, 1e-6);
  const double target_scale =
      std::max(channel_stats(*train_appliance).stddev, 1.0);

  const nn::Dataset train_set =
      windows_for_split(train, *train_appliance, arch, aggregate_stats.mean,
                        input_std, target_scale, config.max_train_windows);
  const nn::Dataset val_set =
      windows_for_split(val, *val_appliance, arch, aggregate_stats.mean,
                        input_std, target_scale, config.max_val_windows);

  nn::Network network(architecture(arch), {window_length(arch), 1},
                      config.seed);
  const nn::TrainHistory run = nn::train(network, train_set, val_set, config);
  if (history != nullptr) *history = run;

  return NeuralModel{arch,      window_length(arch), std::move(network),
                     aggregate_stats.mean, input_std, target_scale,
                     config.seed};
}

PowerSeries predict(const NeuralModel& model, const PowerSeries& aggregate) {
  require_gap_free(aggregate, "prediction aggregate");
  const std::vector<double> z =
      standardized(aggregate, model.input_mean, model.input_std);

  const std::size_t n = aggregate.size();
  const std::size_t window = model.window;
  if (window > n) {
    fail(ErrorCode::kWindowTooLong,
         "window " + std::to_string(window) + " exceeds series length " +
             std::to_string(n));
  }

  std::vector<double> estimate(n, 0.0);
  constexpr std::size_t kChunk = 512;
  std::vector<std::size_t> centers;
  // The network instance carries per-batch caches; clone the parameters into
  // a scratch network so predict() stays const over the model.
  nn::Network scratch(model.network.specs(), model.network.input_shape(),
                      model.network.seed());
  scratch.set_parameter_vector(model.network.parameter_vector());

  for (std::size_t begin = 0; begin < n; begin += kChunk) {
    const std::size_t count = std::min(kChunk, n - begin);
    centers.resize(count);
    for (std::size_t k = 0; k < count; ++k) centers[k] = begin + k;
    nn::Tensor inputs({count, window, 1});
    fill_windows(z, window, window_mode(model.arch), 0.0, centers, &inputs);
    const nn::Tensor out = scratch.forward(inputs);
    for (std::size_t k = 0; k < count; ++k) {
      estimate[begin + k] = std::max(0.0, out[k] * model.target_scale);
    }
  }
  return PowerSeries(aggregate.start_time(), aggregate.interval(),
                     std::move(estimate), aggregate.power_type());
}

void save_model(const NeuralModel& model, const std::filesystem::path& file) {
  std::map<std::string, double> extras;
  extras["arch"] = model.arch == ArchId::kS2pW99 ? 1.0 : 0.0;
  extras["window"] = static_cast<double>(model.window);
  extras["input_mean"] = model.input_mean;
  extras["input_std"] = model.input_std;
  extras["target_scale"] = model.target_scale;
  nn::save_network(model.network, extras, file);
}

NeuralModel load_model(const std::filesystem::path& file) {
  nn::NetworkArtifact artifact = nn::load_network(file);
  auto extra = [&](const char* name) {
    const auto it = artifact.extras.find(name);
    if (it == artifact.extras.end()) {
      fail(ErrorCode::kIoError,
           std::string("model artifact lacks '") + name + "'");
    }
    return it->second;
  };
  NeuralModel model{extra("arch") > 0.5 ? ArchId::kS2pW99 : ArchId::kLstmW49,
                    static_cast<std::size_t>(extra("window")),
                    std::move(artifact.network),
                    extra("input_mean"),
                    extra("input_std"),
                    extra("target_scale"),
                    0};
  model.seed = model.network.seed();
  return model;
}

}  // namespace nilmgap
