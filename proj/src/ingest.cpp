#include "nilmgap/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "nilmgap/util.hpp"

namespace nilmgap {

namespace {

ChannelSpec parse_channel(std::string_view value, std::string name,
                          int line_no) {
  // "<path> : <P|Q|S>"; split on the last colon so Windows-style paths
  // would still fail loudly rather than silently.
  const auto colon = value.rfind(':');
  if (colon == std::string_view::npos) {
    fail(ErrorCode::kSyntaxError,
         "line " + std::to_string(line_no) + ": expected '<path> : <P|Q|S>'");
  }
  const std::string_view path = trim(value.substr(0, colon));
  const std::string_view type = trim(value.substr(colon + 1));
  if (path.empty()) {
    fail(ErrorCode::kSyntaxError,
         "line " + std::to_string(line_no) + ": empty channel path");
  }
  if (type.size() != 1) {
    fail(ErrorCode::kSyntaxError,
         "line " + std::to_string(line_no) + ": power type must be P, Q or S");
  }
  ChannelSpec spec;
  spec.name = std::move(name);
  spec.path = std::filesystem::path(std::string(path));
  try {
    spec.type = power_type_from_code(type.front());
  } catch (const Error&) {
    fail(ErrorCode::kSyntaxError,
         "line " + std::to_string(line_no) + ": power type must be P, Q or S");
  }
  return spec;
}

}  // namespace

DatasetDescriptor parse_descriptor(std::string_view text) {
  DatasetDescriptor desc;
  bool have_label = false;
  bool have_interval = false;
  bool have_mains = false;
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
      if (have_label) {
        fail(ErrorCode::kSyntaxError,
             "line " + std::to_string(line_no) + ": duplicate key 'label'");
      }
      desc.label = std::string(value);
      have_label = true;
    } else if (key == "interval") {
      if (have_interval) {
        fail(ErrorCode::kSyntaxError,
             "line " + std::to_string(line_no) + ": duplicate key 'interval'");
      }
      std::int64_t parsed = 0;
      const auto [ptr, ec] =
          std::from_chars(value.data(), value.data() + value.size(), parsed);
      if (ec != std::errc() || ptr != value.data() + value.size() ||
          parsed <= 0) {
        fail(ErrorCode::kSyntaxError,
             "line " + std::to_string(line_no) +
                 ": interval must be a positive integer");
      }
      desc.interval = parsed;
      have_interval = true;
    } else if (key == "max_gap") {
      std::int64_t parsed = 0;
      const auto [ptr, ec] =
          std::from_chars(value.data(), value.data() + value.size(), parsed);
      if (ec != std::errc() || ptr != value.data() + value.size() ||
          parsed < 0) {
        fail(ErrorCode::kSyntaxError,
             "line " + std::to_string(line_no) +
                 ": max_gap must be a nonnegative integer");
      }
      desc.fill.max_gap_slots = parsed;
    } else if (key == "mains") {
      if (have_mains) {
        fail(ErrorCode::kSyntaxError,
             "line " + std::to_string(line_no) + ": duplicate key 'mains'");
      }
      desc.mains = parse_channel(value, "mains", line_no);
      have_mains = true;
    } else if (key.starts_with("appliance ")) {
      const std::string name{trim(key.substr(10))};
      if (name.empty()) {
        fail(ErrorCode::kSyntaxError,
             "line " + std::to_string(line_no) + ": appliance needs a name");
      }
      for (const auto& existing : desc.appliances) {
        if (existing.name == name) {
          fail(ErrorCode::kDuplicateName,
               "line " + std::to_string(line_no) + ": appliance '" + name +
                   "' listed twice");
        }
      }
      desc.appliances.push_back(parse_channel(value, name, line_no));
    } else {
      fail(ErrorCode::kSyntaxError,
           "line " + std::to_string(line_no) + ": unknown key '" +
               std::string(key) + "'");
    }
  }

  if (!have_label) fail(ErrorCode::kMissingKey, "label");
  if (!have_interval) fail(ErrorCode::kMissingKey, "interval");
  if (!have_mains) fail(ErrorCode::kMissingKey, "mains");
  if (desc.appliances.empty()) fail(ErrorCode::kMissingKey, "appliance");
  return desc;
}

DatasetDescriptor load_descriptor(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    fail(ErrorCode::kIoError, "cannot open descriptor " + file.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  DatasetDescriptor desc = parse_descriptor(buffer.str());
  desc.base_dir = file.parent_path();
  return desc;
}

std::vector<RawReading> read_power_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    fail(ErrorCode::kIoError, "cannot open " + file.string());
  }
  std::vector<RawReading> readings;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::string_view trimmed = trim(line);
    if (trimmed.empty()) continue;
    if (row == 1 && !std::isdigit(static_cast<unsigned char>(trimmed[0])) &&
        trimmed[0] != '-') {
      continue;  // optional header row
    }
    const auto comma = trimmed.find(',');
    if (comma == std::string_view::npos) {
      fail(ErrorCode::kSyntaxError,
           file.string() + ":" + std::to_string(row) + ": expected 2 columns");
    }
    const std::string_view ts_text = trim(trimmed.substr(0, comma));
    const std::string watt_text{trim(trimmed.substr(comma + 1))};

    RawReading reading;
    const auto [ptr, ec] = std::from_chars(
        ts_text.data(), ts_text.data() + ts_text.size(), reading.timestamp);
    if (ec != std::errc() || ptr != ts_text.data() + ts_text.size()) {
      fail(ErrorCode::kSyntaxError,
           file.string() + ":" + std::to_string(row) + ": bad timestamp '" +
               std::string(ts_text) + "'");
    }
    char* end = nullptr;
    reading.watts = std::strtod(watt_text.c_str(), &end);
    if (watt_text.empty() || end != watt_text.c_str() + watt_text.size() ||
        !std::isfinite(reading.watts)) {
      fail(ErrorCode::kSyntaxError,
           file.string() + ":" + std::to_string(row) + ": bad watt value '" +
               watt_text + "'");
    }
    readings.push_back(reading);
  }
  return readings;
}

HouseholdDataset load_household(const DatasetDescriptor& descriptor) {
  if (descriptor.interval <= 0) {
    fail(ErrorCode::kInvalidArgument, "descriptor interval must be positive");
  }
  auto resolve = [&](const std::filesystem::path& p) {
    return p.is_absolute() ? p : descriptor.base_dir / p;
  };

  std::vector<std::vector<RawReading>> raw;
  raw.push_back(read_power_csv(resolve(descriptor.mains.path)));
  for (const ChannelSpec& spec : descriptor.appliances) {
    raw.push_back(read_power_csv(resolve(spec.path)));
  }

  std::int64_t anchor = std::numeric_limits<std::int64_t>::min();
  std::int64_t end = std::numeric_limits<std::int64_t>::max();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].empty()) {
      const std::string name =
          i == 0 ? "mains" : descriptor.appliances[i - 1].name;
      fail(ErrorCode::kEmptySeries, "channel '" + name + "' has no readings");
    }
    anchor = std::max(anchor, raw[i].front().timestamp);
    end = std::min(end, raw[i].back().timestamp);
  }
  if (anchor > end) {
    fail(ErrorCode::kNoOverlap, "channel time ranges do not intersect");
  }
  const std::size_t slots =
      static_cast<std::size_t>((end - anchor) / descriptor.interval) + 1;

  PowerSeries mains =
      resample_onto(raw[0], anchor, slots, descriptor.interval,
                    descriptor.fill, descriptor.mains.type);
  std::vector<HouseholdDataset::Channel> appliances;
  appliances.reserve(descriptor.appliances.size());
  for (std::size_t i = 0; i < descriptor.appliances.size(); ++i) {
    const ChannelSpec& spec = descriptor.appliances[i];
    appliances.emplace_back(
        spec.name, resample_onto(raw[i + 1], anchor, slots,
                                 descriptor.interval, descriptor.fill,
                                 spec.type));
  }

  return align(HouseholdDataset(descriptor.label, std::move(mains),
                                std::move(appliances)));
}

namespace {

void write_channel_csv(const PowerSeries& series,
                       const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) {
    fail(ErrorCode::kIoError, "cannot write " + file.string());
  }
  out << "timestamp,power\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!series.present(i)) continue;
    out << series.time_at(i) << ',' << format_g17(series.watts(i)) << '\n';
  }
}

std::string sanitize_filename(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
                    c == '_';
    out.push_back(ok ? c : '_');
  }
  return out;
}

}  // namespace

void write_household(const HouseholdDataset& dataset,
                     const std::filesystem::path& dir,
                     const FillPolicy& fill) {
  std::filesystem::create_directories(dir);
  std::ofstream conf(dir / "dataset.conf");
  if (!conf) {
    fail(ErrorCode::kIoError,
         "cannot write " + (dir / "dataset.conf").string());
  }
  conf << "label = " << dataset.label() << '\n';
  conf << "interval = " << dataset.interval() << '\n';
  conf << "max_gap = " << fill.max_gap_slots << '\n';
  conf << "mains = mains.csv : "
       << power_type_code(dataset.mains().power_type()) << '\n';
  write_channel_csv(dataset.mains(), dir / "mains.csv");
  for (const auto& [name, series] : dataset.appliances()) {
    const std::string file = sanitize_filename(name) + ".csv";
    conf << "appliance " << name << " = " << file << " : "
         << power_type_code(series.power_type()) << '\n';
    write_channel_csv(series, dir / file);
  }
}

}  // namespace nilmgap
