// Copyright 2026 The pgmvg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PGMVG_IO_FORMATS_HPP
#define PGMVG_IO_FORMATS_HPP

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "pgmvg/core_types.hpp"

namespace pgmvg {

// .pgmv layout, all integers and reals little-endian:
//   bytes  0..3   magic "PGMV"
//   bytes  4..7   uint32 version (1)
//   bytes  8..15  uint64 rows M
//   bytes 16..23  uint64 dim D
//   bytes 24..    M*D float32, row-major
inline constexpr std::array<char, 4> kPgmvMagic = {'P', 'G', 'M', 'V'};
inline constexpr std::uint32_t kPgmvVersion = 1;
inline constexpr std::size_t kPgmvHeaderSize = 24;

struct EmbeddingFileHeader {
  std::array<char, 4> magic = kPgmvMagic;
  std::uint32_t version = kPgmvVersion;
  std::uint64_t rows = 0;
  std::uint64_t dim = 0;
};

namespace detail {

template <typename UInt>
UInt load_le(const unsigned char* p) {
  UInt v = 0;
  for (std::size_t b = 0; b < sizeof(UInt); ++b) v |= static_cast<UInt>(p[b]) << (8 * b);
  return v;
}

template <typename UInt>
void store_le(std::string& out, UInt v) {
  for (std::size_t b = 0; b < sizeof(UInt); ++b) {
    out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

}  // namespace detail

/// Encodes a matrix as .pgmv bytes. Values are narrowed to float32.
inline std::string encode_embeddings(const EmbeddingMatrix& m) {
  std::string out;
  out.reserve(kPgmvHeaderSize + m.data().size() * 4);
  out.append(kPgmvMagic.data(), kPgmvMagic.size());
  detail::store_le<std::uint32_t>(out, kPgmvVersion);
  detail::store_le<std::uint64_t>(out, m.rows());
  detail::store_le<std::uint64_t>(out, m.dim());
  for (double v : m.data()) {
    detail::store_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

inline EmbeddingMatrix decode_embeddings(const std::string& bytes, int model_id = 0) {
  if (bytes.size() < kPgmvHeaderSize) {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kPgmvMagic.data(), 4) != 0) {
      throw Error(ErrorCode::kBadMagic, "not a .pgmv file");
    }
    throw Error(ErrorCode::kTruncatedFile,
                "header needs 24 bytes, file has " + std::to_string(bytes.size()));
  }
  if (std::memcmp(bytes.data(), kPgmvMagic.data(), 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "not a .pgmv file");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const auto version = detail::load_le<std::uint32_t>(p + 4);
  if (version != kPgmvVersion) {
    throw Error(ErrorCode::kBadMagic, "unsupported version " + std::to_string(version));
  }
  const auto rows = detail::load_le<std::uint64_t>(p + 8);
  const auto dim = detail::load_le<std::uint64_t>(p + 16);
  const std::uint64_t payload = bytes.size() - kPgmvHeaderSize;
  if (dim != 0 && rows > payload / 4 / dim) {
    throw Error(ErrorCode::kTruncatedFile,
                "payload has " + std::to_string(payload) + " bytes, header declares " +
                    std::to_string(rows) + "x" + std::to_string(dim));
  }
  if (payload != rows * dim * 4) {
    throw Error(ErrorCode::kShapeMismatch,
                std::to_string(payload - rows * dim * 4) + " trailing bytes");
  }
  std::vector<double> data(rows * dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const float f =
        std::bit_cast<float>(detail::load_le<std::uint32_t>(p + kPgmvHeaderSize + 4 * i));
    if (!std::isfinite(f)) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "row " + std::to_string(i / dim) + ", col " + std::to_string(i % dim));
    }
    data[i] = f;
  }
  return EmbeddingMatrix(model_id, rows, dim, std::move(data));
}

inline EmbeddingMatrix read_embeddings(const std::filesystem::path& path, int model_id = 0) {
  try {
    return decode_embeddings(detail::read_file(path), model_id);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

inline void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  detail::write_file(path, encode_embeddings(m));
}

/// Reads a one-ID-per-line sidecar; a trailing newline is optional.
inline UtteranceSet read_ids(const std::filesystem::path& path, std::size_t expected) {
  std::vector<std::string> lines = detail::split_lines(detail::read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) {
      throw Error(ErrorCode::kEmptyId, path.string() + " line " + std::to_string(i + 1));
    }
  }
  if (lines.size() != expected) {
    throw Error(ErrorCode::kCountMismatch, path.string() + " has " +
                                               std::to_string(lines.size()) +
                                               " ids, expected " + std::to_string(expected));
  }
  return UtteranceSet(std::move(lines));
}

inline void write_ids(const std::filesystem::path& path, const UtteranceSet& ids) {
  std::string out;
  for (const auto& id : ids.ids) out += id + "\n";
  detail::write_file(path, out);
}

inline std::string format_labels(const UtteranceSet& ids, const PseudoLabels& labels) {
  if (ids.size() != labels.size()) {
    throw Error(ErrorCode::kCountMismatch, std::to_string(ids.size()) + " ids but " +
                                               std::to_string(labels.size()) + " labels");
  }
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out += ids.ids[i];
    out += '\t';
    out += std::to_string(labels.label[i]);
    out += '\n';
  }
  return out;
}

inline void write_labels(const std::filesystem::path& path, const UtteranceSet& ids,
                         const PseudoLabels& labels) {
  detail::write_file(path, format_labels(ids, labels));
}

struct LabelFile {
  UtteranceSet ids;
  std::vector<int> labels;
};

/// Parses `<id>\t<label>` lines. Labels need not be dense.
inline LabelFile read_labels(const std::filesystem::path& path) {
  std::vector<std::string> names;
  std::vector<int> labels;
  const auto lines = detail::split_lines(detail::read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    const auto tab = line.rfind('\t');
    const std::string where = path.string() + " line " + std::to_string(i + 1);
    if (tab == std::string::npos) throw Error(ErrorCode::kShapeMismatch, where + ": no tab");
    int label = 0;
    const char* first = line.data() + tab + 1;
    const char* last = line.data() + line.size();
    const auto [ptr, ec] = std::from_chars(first, last, label);
    if (ec != std::errc() || ptr != last) {
      throw Error(ErrorCode::kShapeMismatch, where + ": bad label");
    }
    names.push_back(line.substr(0, tab));
    labels.push_back(label);
  }
  return {UtteranceSet(std::move(names)), std::move(labels)};
}

/// Ordered `key = value` pairs; `#` starts a comment.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

inline KeyValues parse_key_values(const std::string& text, const std::string& origin) {
  KeyValues kv;
  const auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kConfigError,
                  origin + " line " + std::to_string(i + 1) + ": expected key = value");
    }
    kv.emplace_back(std::string(detail::trim(line.substr(0, eq))),
                    std::string(detail::trim(line.substr(eq + 1))));
  }
  return kv;
}

namespace detail {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  if constexpr (std::is_floating_point_v<T>) {
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec == std::errc() && ptr == value.data() + value.size() && std::isfinite(out)) return out;
  } else {
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec == std::errc() && ptr == value.data() + value.size()) return out;
  }
  throw Error(ErrorCode::kConfigError, key + ": cannot parse '" + value + "'");
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace detail

/// Setters and getters for every RunConfig field, keyed by field name.
struct ConfigField {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

inline const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = [] {
    std::vector<ConfigField> f;
    auto add_int = [&f](std::string name, int RunConfig::*member) {
      f.push_back({name,
                   [name, member](RunConfig& c, const std::string& v) {
                     c.*member = detail::parse_number<int>(name, v);
                   },
                   [member](const RunConfig& c) { return std::to_string(c.*member); }});
    };
    auto add_real = [&f](std::string name, double RunConfig::*member) {
      f.push_back({name,
                   [name, member](RunConfig& c, const std::string& v) {
                     c.*member = detail::parse_number<double>(name, v);
                   },
                   [member](const RunConfig& c) { return detail::format_double(c.*member); }});
    };
    add_int("k_init", &RunConfig::k_init);
    add_int("k_step", &RunConfig::k_step);
    add_int("k_max", &RunConfig::k_max);
    add_real("th_high", &RunConfig::th_high);
    add_real("th_low", &RunConfig::th_low);
    add_real("epsilon", &RunConfig::epsilon);
    add_int("min_cluster_size", &RunConfig::min_cluster_size);
    add_real("stop_new_node_frac", &RunConfig::stop_new_node_frac);
    add_real("stop_cluster_delta_frac", &RunConfig::stop_cluster_delta_frac);
    add_int("outlier_rank", &RunConfig::outlier_rank);
    add_real("outlier_threshold", &RunConfig::outlier_threshold);
    add_real("sigma_floor", &RunConfig::sigma_floor);
    add_int("em_max_iters", &RunConfig::em_max_iters);
    add_real("em_tol", &RunConfig::em_tol);
    f.push_back({"seed",
                 [](RunConfig& c, const std::string& v) {
                   c.seed = detail::parse_number<std::uint64_t>("seed", v);
                 },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    return f;
  }();
  return fields;
}

inline void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
  for (const auto& f : config_fields()) {
    if (f.name == key) {
      f.set(c, value);
      return;
    }
  }
  throw Error(ErrorCode::kConfigError, "unknown key '" + key + "'");
}

inline RunConfig parse_config(const std::string& text, const std::string& origin = "config",
                              RunConfig base = {}) {
  for (const auto& [k, v] : parse_key_values(text, origin)) set_config_value(base, k, v);
  return base;
}

inline RunConfig read_config(const std::filesystem::path& path, RunConfig base = {}) {
  return parse_config(detail::read_file(path), path.string(), base);
}

/// Serializes every field as `key = value`, one per line, with an optional
/// prefix (e.g. "# " when embedding the config in another file).
inline std::string format_config(const RunConfig& c, std::string_view prefix = "") {
  std::string out;
  for (const auto& f : config_fields()) {
    out += prefix;
    out += f.name + " = " + f.get(c) + "\n";
  }
  return out;
}

}  // namespace pgmvg

#endif  // PGMVG_IO_FORMATS_HPP
