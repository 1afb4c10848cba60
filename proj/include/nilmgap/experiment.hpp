#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nilmgap/co.hpp"
#include "nilmgap/metrics.hpp"
#include "nilmgap/nn/train.hpp"
#include "nilmgap/timeseries.hpp"

namespace nilmgap {

enum class Algorithm { kCo = 0, kLstm = 1, kS2p = 2 };
enum class Variant { kReal = 0, kDenoised = 1 };

const char* to_string(Algorithm algorithm);
const char* to_string(Variant variant);
Algorithm algorithm_from_string(std::string_view name);
Variant variant_from_string(std::string_view name);

struct ExperimentConfig {
  std::filesystem::path dataset;          // dataset descriptor path
  std::vector<std::string> appliances;    // must exist in the household
  std::vector<Algorithm> algorithms = {Algorithm::kCo, Algorithm::kLstm,
                                       Algorithm::kS2p};
  SplitFractions split;
  std::optional<std::int64_t> interval;   // overrides the descriptor
  nn::TrainConfig train;
  CoConfig co;
  Variant train_variant = Variant::kReal; // aggregate the models see in training
  std::filesystem::path out_dir = "results";
  std::uint64_t seed = 0;
};

// Key-value grammar, one statement per line, '#' starts a comment:
//   dataset = <path>                     (mandatory)
//   appliances = <name>,<name>,...       (mandatory)
//   algorithms = CO,LSTM,S2P
//   split = <train>,<val>,<test>
//   interval = <seconds>
//   seed = <int>
//   epochs = <int>
//   batch = <int>
//   lr = <float>
//   max_train_windows = <int>
//   max_val_windows = <int>
//   k_max = <int>
//   on_threshold = <watts>
//   train_variant = real|denoised
//   out = <dir>
ExperimentConfig parse_experiment_config(std::string_view text);
ExperimentConfig load_experiment_config(const std::filesystem::path& file);

// One (algorithm, appliance, variant) evaluation on the test split.
struct ScenarioResult {
  std::string household;
  Algorithm algorithm = Algorithm::kCo;
  std::string appliance;
  Variant variant = Variant::kReal;
  Score score;
  double nar = 0.0;  // household NAR, attached to every result
};

struct GapResult {
  Algorithm algorithm = Algorithm::kCo;
  std::string appliance;
  Gap gap;
};

struct JobTrace {
  Algorithm algorithm = Algorithm::kCo;
  std::string appliance;
  PowerSeries truth;
  PowerSeries estimate_real;
  PowerSeries estimate_denoised;
};

struct RunOutput {
  std::vector<ScenarioResult> results;  // sorted by algorithm, appliance, variant
  std::vector<GapResult> gaps;          // sorted by algorithm, appliance
  std::vector<JobTrace> traces;         // per-slot estimates for result files
  double nar = 0.0;
};

// The full protocol: load -> align -> split chronologically -> fit each
// (algorithm, appliance) on the training aggregate -> evaluate the trained
// model on the real and on the denoised test aggregate. Models are fitted
// once and reused for both variants. Deterministic for a fixed config.
RunOutput run(const ExperimentConfig& config);

// run() plus the result-file layout:
//   <out>/<algorithm>_<appliance>_<variant>.csv   (slot,truth_w,estimate_w)
//   <out>/summary.csv                             (one ScenarioResult per row)
// Nothing is written if any stage fails.
RunOutput run_and_write(const ExperimentConfig& config);

void write_results(const RunOutput& output, const std::filesystem::path& dir);

// Reads summary.csv back into ScenarioResult rows (full precision).
std::vector<ScenarioResult> read_summary(const std::filesystem::path& dir);

}  // namespace nilmgap
