#include "nilmgap/nn/serialize.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace nilmgap::nn {

namespace {

static_assert(std::endian::native == std::endian::little,
              "artifact container assumes little-endian storage");

constexpr char kMagic[8] = {'N', 'I', 'L', 'M', 'G', 'N', 'N', '1'};

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(value));
  if (!in) fail(ErrorCode::kIoError, "truncated model artifact");
  return value;
}

}  // namespace

void save_network(const Network& network,
                  const std::map<std::string, double>& extras,
                  const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + file.string());

  out.write(kMagic, sizeof(kMagic));
  write_pod(out, static_cast<std::uint32_t>(network.specs().size()));
  for (const LayerSpec& spec : network.specs()) {
    write_pod(out, static_cast<std::uint8_t>(spec.kind));
    write_pod(out, static_cast<std::uint64_t>(spec.units));
    write_pod(out, static_cast<std::uint64_t>(spec.kernel));
    write_pod(out, static_cast<std::uint64_t>(spec.stride));
  }
  write_pod(out, static_cast<std::uint32_t>(network.input_shape().size()));
  for (std::size_t dim : network.input_shape()) {
    write_pod(out, static_cast<std::uint64_t>(dim));
  }
  write_pod(out, static_cast<std::uint64_t>(network.seed()));

  write_pod(out, static_cast<std::uint32_t>(extras.size()));
  for (const auto& [name, value] : extras) {
    write_pod(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_pod(out, value);
  }

  const std::vector<double> params = network.parameter_vector();
  write_pod(out, static_cast<std::uint64_t>(params.size()));
  out.write(reinterpret_cast<const char*>(params.data()),
            static_cast<std::streamsize>(params.size() * sizeof(double)));
  if (!out) fail(ErrorCode::kIoError, "failed writing " + file.string());
}

NetworkArtifact load_network(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + file.string());

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    fail(ErrorCode::kIoError, file.string() + " is not a model artifact");
  }

  const auto spec_count = read_pod<std::uint32_t>(in);
  std::vector<LayerSpec> specs;
  specs.reserve(spec_count);
  for (std::uint32_t i = 0; i < spec_count; ++i) {
    LayerSpec spec;
    spec.kind = static_cast<LayerSpec::Kind>(read_pod<std::uint8_t>(in));
    spec.units = static_cast<std::size_t>(read_pod<std::uint64_t>(in));
    spec.kernel = static_cast<std::size_t>(read_pod<std::uint64_t>(in));
    spec.stride = static_cast<std::size_t>(read_pod<std::uint64_t>(in));
    specs.push_back(spec);
  }

  const auto rank = read_pod<std::uint32_t>(in);
  std::vector<std::size_t> input_shape;
  input_shape.reserve(rank);
  for (std::uint32_t i = 0; i < rank; ++i) {
    input_shape.push_back(static_cast<std::size_t>(read_pod<std::uint64_t>(in)));
  }
  const auto seed = read_pod<std::uint64_t>(in);

  std::map<std::string, double> extras;
  const auto extra_count = read_pod<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < extra_count; ++i) {
    const auto name_len = read_pod<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) fail(ErrorCode::kIoError, "truncated model artifact");
    extras[name] = read_pod<double>(in);
  }

  Network network(std::move(specs), std::move(input_shape), seed);
  const auto param_count = read_pod<std::uint64_t>(in);
  if (param_count != network.parameter_count()) {
    fail(ErrorCode::kIoError, "artifact parameter count mismatch");
  }
  std::vector<double> params(param_count);
  in.read(reinterpret_cast<char*>(params.data()),
          static_cast<std::streamsize>(param_count * sizeof(double)));
  if (!in) fail(ErrorCode::kIoError, "truncated model artifact");
  network.set_parameter_vector(params);

  return NetworkArtifact{std::move(network), std::move(extras)};
}

}  // namespace nilmgap::nn
