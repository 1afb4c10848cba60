#include "nilmgap/co.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <unordered_map>

namespace nilmgap {

std::size_t StateTable::combination_count() const {
  std::size_t product = 1;
  for (const auto& appliance_levels : levels) {
    product *= appliance_levels.size();
  }
  return product;
}

namespace {

constexpr int kKmeansMaxIterations = 100;
constexpr double kKmeansTolerance = 0.1;  // watts

// 1-D k-means on sorted samples. Quantile initialization plus contiguous
// cluster ranges make the whole procedure deterministic.
std::vector<double> kmeans_levels(const std::vector<double>& sorted,
                                  std::size_t k) {
  const std::size_t n = sorted.size();
  k = std::min(k, n);

  std::vector<double> centroids(k);
  for (std::size_t j = 0; j < k; ++j) {
    const auto pos = static_cast<std::size_t>(
        (static_cast<double>(j) + 0.5) * static_cast<double>(n) /
        static_cast<double>(k));
    centroids[j] = sorted[std::min(pos, n - 1)];
  }
  std::sort(centroids.begin(), centroids.end());

  std::vector<double> prefix(n + 1, 0.0);
  std::partial_sum(sorted.begin(), sorted.end(), prefix.begin() + 1);

  std::vector<std::size_t> bounds(k + 1);
  for (int iter = 0; iter < kKmeansMaxIterations; ++iter) {
    bounds.front() = 0;
    bounds.back() = n;
    for (std::size_t j = 0; j + 1 < k; ++j) {
      const double mid = 0.5 * (centroids[j] + centroids[j + 1]);
      bounds[j + 1] = static_cast<std::size_t>(
          std::upper_bound(sorted.begin(), sorted.end(), mid) -
          sorted.begin());
    }
    double max_move = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t lo = bounds[j];
      const std::size_t hi = bounds[j + 1];
      if (hi <= lo) continue;  // empty cluster keeps its centroid
      const double mean =
          (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
      max_move = std::max(max_move, std::abs(mean - centroids[j]));
      centroids[j] = mean;
    }
    std::sort(centroids.begin(), centroids.end());
    if (max_move < kKmeansTolerance) break;
  }

  // Drop clusters that ended up empty or collapsed onto a neighbor.
  bounds.front() = 0;
  bounds.back() = n;
  for (std::size_t j = 0; j + 1 < k; ++j) {
    const double mid = 0.5 * (centroids[j] + centroids[j + 1]);
    bounds[j + 1] = static_cast<std::size_t>(
        std::upper_bound(sorted.begin(), sorted.end(), mid) - sorted.begin());
  }
  std::vector<double> kept;
  for (std::size_t j = 0; j < k; ++j) {
    if (bounds[j + 1] <= bounds[j]) continue;
    if (!kept.empty() && centroids[j] - kept.back() < 1e-6) continue;
    kept.push_back(centroids[j]);
  }
  return kept;
}

}  // namespace

StateTable fit_states(const HouseholdDataset& train, const CoConfig& config) {
  if (config.k_max < 2) {
    fail(ErrorCode::kInvalidArgument, "k_max must be at least 2");
  }
  StateTable table;
  for (const auto& [name, series] : train.appliances()) {
    std::vector<double> on_samples;
    for (std::size_t i = 0; i < series.size(); ++i) {
      if (series.present(i) && series.watts(i) > config.on_threshold) {
        on_samples.push_back(series.watts(i));
      }
    }
    table.names.push_back(name);
    if (on_samples.empty()) {
      table.levels.push_back({0.0});
      table.warnings.push_back("appliance '" + name + "' never exceeds " +
                               std::to_string(config.on_threshold) +
                               " W; using a single OFF state");
      continue;
    }
    std::sort(on_samples.begin(), on_samples.end());
    std::vector<double> levels = {0.0};
    for (double level : kmeans_levels(on_samples, config.k_max - 1)) {
      levels.push_back(level);
    }
    table.levels.push_back(std::move(levels));
  }
  return table;
}

namespace {

constexpr std::size_t kMaxCombinations = 1000000;

struct CombinationIndex {
  std::vector<double> sums;                      // ascending, unique
  std::vector<std::vector<std::uint8_t>> combos; // lex-min vector per sum
};

CombinationIndex enumerate_combinations(const StateTable& states) {
  const std::size_t total = states.combination_count();
  const std::size_t appliances = states.levels.size();

  std::vector<double> sums(total);
  std::vector<std::uint8_t> digits(appliances, 0);
  std::vector<std::vector<std::uint8_t>> vectors(total);
  for (std::size_t id = 0; id < total; ++id) {
    double sum = 0.0;
    for (std::size_t a = 0; a < appliances; ++a) {
      sum += states.levels[a][digits[a]];
    }
    sums[id] = sum;
    vectors[id] = digits;
    // Odometer with the last appliance fastest: ids ascend in
    // lexicographic order of the state-index vector.
    for (std::size_t a = appliances; a-- > 0;) {
      if (++digits[a] < states.levels[a].size()) break;
      digits[a] = 0;
    }
  }

  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sums[a] != sums[b]) return sums[a] < sums[b];
    return a < b;  // equal sums: keep enumeration (= lexicographic) order
  });

  CombinationIndex index;
  index.sums.reserve(total);
  index.combos.reserve(total);
  for (std::size_t id : order) {
    if (!index.sums.empty() && index.sums.back() == sums[id]) continue;
    index.sums.push_back(sums[id]);
    index.combos.push_back(std::move(vectors[id]));
  }
  return index;
}

std::size_t best_combination(const CombinationIndex& index, double aggregate) {
  const auto it =
      std::lower_bound(index.sums.begin(), index.sums.end(), aggregate);
  const auto hi = static_cast<std::size_t>(it - index.sums.begin());
  if (hi == 0) return 0;
  if (hi == index.sums.size()) return hi - 1;
  const double cost_lo = aggregate - index.sums[hi - 1];
  const double cost_hi = index.sums[hi] - aggregate;
  if (cost_lo < cost_hi) return hi - 1;
  if (cost_hi < cost_lo) return hi;
  // Equal cost across two sums: the lexicographically smaller combination
  // wins overall.
  return std::lexicographical_compare(index.combos[hi - 1].begin(),
                                      index.combos[hi - 1].end(),
                                      index.combos[hi].begin(),
                                      index.combos[hi].end())
             ? hi - 1
             : hi;
}

}  // namespace

std::vector<HouseholdDataset::Channel> co_disaggregate(
    const PowerSeries& aggregate, const StateTable& states) {
  if (states.names.size() != states.levels.size() || states.names.empty()) {
    fail(ErrorCode::kInvalidArgument, "malformed state table");
  }
  std::size_t product = 1;
  for (const auto& levels : states.levels) {
    if (levels.empty() || levels.front() != 0.0) {
      fail(ErrorCode::kInvalidArgument, "state 0 must be 0 W");
    }
    if (levels.size() > 255) {
      fail(ErrorCode::kInvalidArgument, "more than 255 levels per appliance");
    }
    if (!std::is_sorted(levels.begin(), levels.end()) ||
        std::adjacent_find(levels.begin(), levels.end()) != levels.end()) {
      fail(ErrorCode::kInvalidArgument, "levels must be strictly increasing");
    }
    if (product > kMaxCombinations / levels.size()) {
      fail(ErrorCode::kSearchSpaceTooLarge,
           "state combination space exceeds " +
               std::to_string(kMaxCombinations) + "; lower k_max");
    }
    product *= levels.size();
  }

  const CombinationIndex index = enumerate_combinations(states);

  const std::size_t n = aggregate.size();
  std::vector<std::vector<double>> estimates(states.names.size(),
                                             std::vector<double>(n, 0.0));
  std::vector<std::uint8_t> present(n, 0);

  // Aggregate values repeat heavily on gridded data; memoize per value.
  std::unordered_map<std::uint64_t, std::size_t> memo;
  for (std::size_t t = 0; t < n; ++t) {
    if (!aggregate.present(t)) continue;
    const double y = aggregate.watts(t);
    const std::uint64_t key = std::bit_cast<std::uint64_t>(y);
    std::size_t choice;
    if (const auto it = memo.find(key); it != memo.end()) {
      choice = it->second;
    } else {
      choice = best_combination(index, y);
      memo.emplace(key, choice);
    }
    const auto& combo = index.combos[choice];
    for (std::size_t a = 0; a < combo.size(); ++a) {
      estimates[a][t] = states.levels[a][combo[a]];
    }
    present[t] = 1;
  }

  std::vector<HouseholdDataset::Channel> channels;
  channels.reserve(states.names.size());
  for (std::size_t a = 0; a < states.names.size(); ++a) {
    channels.emplace_back(
        states.names[a],
        PowerSeries(aggregate.start_time(), aggregate.interval(),
                    std::move(estimates[a]), present,
                    aggregate.power_type()));
  }
  return channels;
}

}  // namespace nilmgap
