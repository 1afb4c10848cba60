#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "nilmgap/nn/layers.hpp"

namespace nilmgap::nn {

// Versioned binary container for a trained network: layer specs, input
// shape, training seed, named scalar extras (normalization constants and the
// like) and the raw little-endian parameter array. Round-trips losslessly.
struct NetworkArtifact {
  Network network;
  std::map<std::string, double> extras;
};

void save_network(const Network& network,
                  const std::map<std::string, double>& extras,
                  const std::filesystem::path& file);

NetworkArtifact load_network(const std::filesystem::path& file);

}  // namespace nilmgap::nn
