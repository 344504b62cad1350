// Copyright 2026 The cesample Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cesample/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "cesample/error.hpp"

namespace cesample {

namespace fs = std::filesystem;

namespace {

constexpr std::uint16_t kBinaryVersion = 1;
constexpr char kMagicMatrix[4] = {'C', 'E', 'S', 'A'};
constexpr char kMagicConfidence[4] = {'C', 'E', 'S', 'C'};
constexpr char kMagicCorrectness[4] = {'C', 'E', 'S', 'H'};

std::vector<unsigned char> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return bytes;
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

float get_f32(const unsigned char* p) {
  const std::uint32_t bits = get_u32(p);
  float f;
  std::memcpy(&f, &bits, sizeof f);
  return f;
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xFF));
}

void put_f32(std::string& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof bits);
  put_u32(out, bits);
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xFFFFFFFFu) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " does not fit the binary header");
  }
  return static_cast<std::uint32_t>(v);
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

double parse_number(std::string_view token, const fs::path& path,
                    std::size_t line) {
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) {
    token.remove_prefix(1);
  }
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t' ||
                            token.back() == '\r')) {
    token.remove_suffix(1);
  }
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error(ErrorCode::kParse, path.string() + ": line " +
                                       std::to_string(line) +
                                       ": not a number: '" +
                                       std::string(token) + "'");
  }
  return value;
}

// Rows of comma-separated numbers. Blank lines are skipped.
std::vector<std::vector<double>> read_csv_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      row.push_back(parse_number(rest.substr(0, comma), path, line_no));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

struct BinaryHeader {
  std::size_t n = 0;
  std::size_t m = 1;
  std::size_t payload_offset = 0;
};

BinaryHeader read_header(const std::vector<unsigned char>& bytes,
                         const char (&magic)[4], bool has_m,
                         const fs::path& path) {
  const std::size_t header_size = has_m ? 14 : 10;
  const std::size_t seen = std::min<std::size_t>(bytes.size(), 4);
  if (seen < 4 && std::memcmp(bytes.data(), magic, seen) == 0) {
    throw Error(ErrorCode::kTruncated, path.string() + ": header truncated");
  }
  if (std::memcmp(bytes.data(), magic, seen) != 0) {
    throw Error(ErrorCode::kBadMagic,
                path.string() + ": expected magic '" +
                    std::string(magic, 4) + "'");
  }
  if (bytes.size() < header_size) {
    throw Error(ErrorCode::kTruncated, path.string() + ": header truncated");
  }
  const std::uint16_t version = get_u16(bytes.data() + 4);
  if (version != kBinaryVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                path.string() + ": version " + std::to_string(version));
  }
  BinaryHeader h;
  h.n = get_u32(bytes.data() + 6);
  if (has_m) h.m = get_u32(bytes.data() + 10);
  h.payload_offset = header_size;
  const std::size_t expected = h.n * h.m * 4;
  const std::size_t actual = bytes.size() - header_size;
  if (actual < expected) {
    throw Error(ErrorCode::kTruncated,
                path.string() + ": header declares " + std::to_string(h.n * h.m) +
                    " floats but payload holds " + std::to_string(actual / 4));
  }
  if (actual > expected) {
    throw Error(ErrorCode::kDimensionMismatch,
                path.string() + ": " + std::to_string(actual - expected) +
                    " trailing bytes after payload");
  }
  return h;
}

std::string header_bytes(const char (&magic)[4], std::size_t n,
                         std::optional<std::size_t> m) {
  std::string out(magic, 4);
  put_u16(out, kBinaryVersion);
  put_u32(out, checked_u32(n, "row count"));
  if (m) put_u32(out, checked_u32(*m, "column count"));
  return out;
}

void check_finite_matrix(const Matrix& matrix, const fs::path& path) {
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      if (!std::isfinite(matrix(r, c))) {
        throw Error(ErrorCode::kNonFinite,
                    path.string() + ": non-finite value at row " +
                        std::to_string(r + 1) + ", column " +
                        std::to_string(c + 1));
      }
    }
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "matrix data size does not match its shape");
  }
}

const char* format_name(StorageFormat format) {
  return format == StorageFormat::kText ? "text" : "binary";
}

StorageFormat parse_format(const std::string& tag) {
  if (tag == "text") return StorageFormat::kText;
  if (tag == "binary") return StorageFormat::kBinary;
  throw Error(ErrorCode::kUnknownFormat, "unknown format tag '" + tag + "'");
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void OperationalDataset::validate() const {
  const std::size_t n = activations.rows();
  const std::size_t m = activations.cols();
  if (n == 0 || m == 0) {
    throw Error(ErrorCode::kDimensionMismatch,
                "dataset needs at least one row and one column");
  }
  // Row/column reported 1-based, as in the files.
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      if (!std::isfinite(activations(r, c))) {
        throw Error(ErrorCode::kNonFinite,
                    "non-finite activation at row " + std::to_string(r + 1) +
                        ", column " + std::to_string(c + 1));
      }
    }
  }
  if (confidence) {
    if (confidence->size() != n) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "confidence has " + std::to_string(confidence->size()) +
                      " values for " + std::to_string(n) + " rows");
    }
    for (std::size_t r = 0; r < n; ++r) {
      const double c = (*confidence)[r];
      if (!std::isfinite(c)) {
        throw Error(ErrorCode::kNonFinite,
                    "non-finite confidence at row " + std::to_string(r + 1));
      }
      if (c < 0.0 || c > 1.0) {
        throw Error(ErrorCode::kInvalidValue,
                    "confidence outside [0,1] at row " + std::to_string(r + 1));
      }
    }
  }
  if (correctness) {
    if (correctness->size() != n) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "correctness has " + std::to_string(correctness->size()) +
                      " values for " + std::to_string(n) + " rows");
    }
    for (std::size_t r = 0; r < n; ++r) {
      if ((*correctness)[r] > 1) {
        throw Error(ErrorCode::kInvalidValue,
                    "correctness not in {0,1} at row " + std::to_string(r + 1));
      }
    }
  }
  if (ids.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "ids are not aligned with rows");
  }
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(n);
  for (std::uint64_t id : ids) {
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::kDuplicateId,
                  "duplicate example id " + std::to_string(id));
    }
  }
}

double OperationalDataset::true_accuracy() const {
  if (!correctness) {
    throw Error(ErrorCode::kMissingData, "dataset has no correctness values");
  }
  std::size_t hits = 0;
  for (auto h : *correctness) hits += h;
  return static_cast<double>(hits) / static_cast<double>(correctness->size());
}

OperationalDataset make_dataset(
    Matrix activations, std::optional<std::vector<double>> confidence,
    std::optional<std::vector<std::uint8_t>> correctness) {
  OperationalDataset d;
  d.ids.resize(activations.rows());
  for (std::size_t i = 0; i < d.ids.size(); ++i) d.ids[i] = i;
  d.activations = std::move(activations);
  d.confidence = std::move(confidence);
  d.correctness = std::move(correctness);
  d.validate();
  return d;
}

Matrix read_matrix_text(const fs::path& path) {
  auto rows = read_csv_rows(path);
  if (rows.empty()) return Matrix();
  const std::size_t m = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * m);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m) {
      throw Error(ErrorCode::kDimensionMismatch,
                  path.string() + ": row " + std::to_string(r + 1) + " has " +
                      std::to_string(rows[r].size()) + " values, expected " +
                      std::to_string(m));
    }
    data.insert(data.end(), rows[r].begin(), rows[r].end());
  }
  Matrix matrix(rows.size(), m, std::move(data));
  check_finite_matrix(matrix, path);
  return matrix;
}

Matrix read_matrix_binary(const fs::path& path) {
  const auto bytes = slurp(path);
  const auto h = read_header(bytes, kMagicMatrix, true, path);
  std::vector<double> data(h.n * h.m);
  const unsigned char* p = bytes.data() + h.payload_offset;
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = get_f32(p + 4 * i);
  Matrix matrix(h.n, h.m, std::move(data));
  check_finite_matrix(matrix, path);
  return matrix;
}

Matrix read_matrix_any(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  in.close();
  if (std::memcmp(magic, kMagicMatrix, 4) == 0) return read_matrix_binary(path);
  return read_matrix_text(path);
}

void write_matrix_text(const Matrix& matrix, const fs::path& path) {
  std::string out;
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      if (c) out.push_back(',');
      out += format_double(matrix(r, c));
    }
    out.push_back('\n');
  }
  write_bytes(path, out);
}

void write_matrix_binary(const Matrix& matrix, const fs::path& path) {
  std::string out = header_bytes(kMagicMatrix, matrix.rows(), matrix.cols());
  out.reserve(out.size() + matrix.data().size() * 4);
  for (double v : matrix.data()) put_f32(out, static_cast<float>(v));
  write_bytes(path, out);
}

std::vector<double> read_column(const fs::path& path, StorageFormat format,
                                bool correctness) {
  std::vector<double> values;
  if (format == StorageFormat::kText) {
    for (auto& row : read_csv_rows(path)) {
      if (row.size() != 1) {
        throw Error(ErrorCode::kDimensionMismatch,
                    path.string() + ": expected one value per line");
      }
      values.push_back(row.front());
    }
  } else {
    const auto bytes = slurp(path);
    const auto h = read_header(
        bytes, correctness ? kMagicCorrectness : kMagicConfidence, false, path);
    values.resize(h.n);
    const unsigned char* p = bytes.data() + h.payload_offset;
    for (std::size_t i = 0; i < h.n; ++i) values[i] = get_f32(p + 4 * i);
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::kNonFinite, path.string() +
                                             ": non-finite value at row " +
                                             std::to_string(i + 1));
    }
  }
  return values;
}

void write_column(std::span<const double> values, const fs::path& path,
                  StorageFormat format, bool correctness) {
  std::string out;
  if (format == StorageFormat::kText) {
    for (double v : values) {
      out += format_double(v);
      out.push_back('\n');
    }
  } else {
    out = header_bytes(correctness ? kMagicCorrectness : kMagicConfidence,
                       values.size(), std::nullopt);
    for (double v : values) put_f32(out, static_cast<float>(v));
  }
  write_bytes(path, out);
}

DatasetManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open manifest " + path.string());
  DatasetManifest manifest;
  bool have_act = false, have_format = false, have_n = false, have_m = false;
  std::string line;
  std::size_t line_no = 0;
  auto parse_size = [&](const std::string& v) {
    std::size_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
      throw Error(ErrorCode::kParse, path.string() + ": line " +
                                         std::to_string(line_no) +
                                         ": bad integer '" + v + "'");
    }
    return out;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParse, path.string() + ": line " +
                                         std::to_string(line_no) +
                                         ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "activations") {
      manifest.activations = value;
      have_act = true;
    } else if (key == "confidence") {
      if (!value.empty()) manifest.confidence = fs::path(value);
    } else if (key == "correctness") {
      if (!value.empty()) manifest.correctness = fs::path(value);
    } else if (key == "format") {
      manifest.format = parse_format(value);
      have_format = true;
    } else if (key == "n") {
      manifest.n = parse_size(value);
      have_n = true;
    } else if (key == "m") {
      manifest.m = parse_size(value);
      have_m = true;
    } else {
      throw Error(ErrorCode::kParse,
                  path.string() + ": unknown manifest key '" + key + "'");
    }
  }
  if (!have_act || !have_format || !have_n || !have_m) {
    throw Error(ErrorCode::kParse,
                path.string() +
                    ": manifest requires activations, format, n and m");
  }
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  std::string out;
  out += "activations=" + manifest.activations.generic_string() + "\n";
  if (manifest.confidence) {
    out += "confidence=" + manifest.confidence->generic_string() + "\n";
  }
  if (manifest.correctness) {
    out += "correctness=" + manifest.correctness->generic_string() + "\n";
  }
  out += std::string("format=") + format_name(manifest.format) + "\n";
  out += "n=" + std::to_string(manifest.n) + "\n";
  out += "m=" + std::to_string(manifest.m) + "\n";
  write_bytes(path, out);
}

OperationalDataset load_dataset(const DatasetManifest& manifest,
                                const fs::path& base_dir) {
  auto resolve = [&](const fs::path& p) {
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };
  const fs::path act_path = resolve(manifest.activations);
  Matrix activations = manifest.format == StorageFormat::kBinary
                           ? read_matrix_binary(act_path)
                           : read_matrix_text(act_path);
  if (activations.rows() != manifest.n || activations.cols() != manifest.m) {
    throw Error(ErrorCode::kDimensionMismatch,
                act_path.string() + ": manifest declares " +
                    std::to_string(manifest.n) + "x" +
                    std::to_string(manifest.m) + " but file holds " +
                    std::to_string(activations.rows()) + "x" +
                    std::to_string(activations.cols()));
  }
  std::optional<std::vector<double>> confidence;
  if (manifest.confidence) {
    const fs::path p = resolve(*manifest.confidence);
    confidence = read_column(p, manifest.format, false);
    if (confidence->size() != manifest.n) {
      throw Error(ErrorCode::kDimensionMismatch,
                  p.string() + ": " + std::to_string(confidence->size()) +
                      " values, manifest declares n=" +
                      std::to_string(manifest.n));
    }
  }
  std::optional<std::vector<std::uint8_t>> correctness;
  if (manifest.correctness) {
    const fs::path p = resolve(*manifest.correctness);
    const auto raw = read_column(p, manifest.format, true);
    if (raw.size() != manifest.n) {
      throw Error(ErrorCode::kDimensionMismatch,
                  p.string() + ": " + std::to_string(raw.size()) +
                      " values, manifest declares n=" +
                      std::to_string(manifest.n));
    }
    correctness.emplace(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != 0.0 && raw[i] != 1.0) {
        throw Error(ErrorCode::kInvalidValue,
                    p.string() + ": correctness value " +
                        format_double(raw[i]) + " at row " +
                        std::to_string(i + 1) + " is not 0 or 1");
      }
      (*correctness)[i] = raw[i] == 1.0 ? 1 : 0;
    }
  }
  return make_dataset(std::move(activations), std::move(confidence),
                      std::move(correctness));
}

OperationalDataset load_dataset(const fs::path& manifest_path) {
  return load_dataset(read_manifest(manifest_path),
                      manifest_path.parent_path());
}

DatasetManifest save_dataset(const OperationalDataset& dataset,
                             DatasetManifest manifest,
                             const fs::path& base_dir) {
  dataset.validate();
  auto resolve = [&](const fs::path& p) {
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };
  manifest.n = dataset.size();
  manifest.m = dataset.width();
  if (manifest.format == StorageFormat::kBinary) {
    write_matrix_binary(dataset.activations, resolve(manifest.activations));
  } else {
    write_matrix_text(dataset.activations, resolve(manifest.activations));
  }
  if (dataset.confidence) {
    if (!manifest.confidence) {
      throw Error(ErrorCode::kInvalidArgument,
                  "manifest has no confidence path for a dataset with confidence");
    }
    write_column(*dataset.confidence, resolve(*manifest.confidence),
                 manifest.format, false);
  } else {
    manifest.confidence.reset();
  }
  if (dataset.correctness) {
    if (!manifest.correctness) {
      throw Error(ErrorCode::kInvalidArgument,
                  "manifest has no correctness path for a dataset with correctness");
    }
    std::vector<double> h(dataset.correctness->begin(),
                          dataset.correctness->end());
    write_column(h, resolve(*manifest.correctness), manifest.format, true);
  } else {
    manifest.correctness.reset();
  }
  return manifest;
}

DatasetManifest save_dataset_with_prefix(const OperationalDataset& dataset,
                                         const std::string& prefix,
                                         StorageFormat format) {
  const fs::path base(prefix);
  const fs::path dir = base.parent_path();
  const std::string stem = base.filename().string();
  const std::string ext = format == StorageFormat::kBinary ? ".bin" : ".csv";
  DatasetManifest manifest;
  manifest.format = format;
  manifest.activations = stem + ".act" + ext;
  if (dataset.confidence) manifest.confidence = fs::path(stem + ".conf" + ext);
  if (dataset.correctness) manifest.correctness = fs::path(stem + ".corr" + ext);
  if (!dir.empty()) fs::create_directories(dir);
  manifest = save_dataset(dataset, manifest, dir);
  write_manifest(manifest, dir / (stem + ".manifest"));
  return manifest;
}

}  // namespace cesample
