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

#ifndef CESAMPLE_DATASET_HPP_
#define CESAMPLE_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cesample {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class StorageFormat { kText, kBinary };

const char* format_name(StorageFormat format);
StorageFormat parse_format(const std::string& tag);

// The operational set S: one row of last-hidden-layer activations per
// example, plus optional confidence c(x) and correctness H(x).
struct OperationalDataset {
  Matrix activations;
  std::optional<std::vector<double>> confidence;
  std::optional<std::vector<std::uint8_t>> correctness;
  std::vector<std::uint64_t> ids;

  std::size_t size() const noexcept { return activations.rows(); }
  std::size_t width() const noexcept { return activations.cols(); }

  // Throws Error on any broken invariant.
  void validate() const;

  // Census accuracy: mean of H over every row. Requires correctness.
  double true_accuracy() const;
};

// Builds a dataset with ids 0..N-1 and validates it.
OperationalDataset make_dataset(
    Matrix activations, std::optional<std::vector<double>> confidence = {},
    std::optional<std::vector<std::uint8_t>> correctness = {});

// Paths inside a manifest are resolved relative to the manifest's directory.
struct DatasetManifest {
  std::filesystem::path activations;
  std::optional<std::filesystem::path> confidence;
  std::optional<std::filesystem::path> correctness;
  StorageFormat format = StorageFormat::kBinary;
  std::size_t n = 0;
  std::size_t m = 0;
};

DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest,
                    const std::filesystem::path& path);

OperationalDataset load_dataset(const DatasetManifest& manifest,
                                const std::filesystem::path& base_dir = {});
OperationalDataset load_dataset(const std::filesystem::path& manifest_path);

// Writes the data files named in `manifest` (n and m are filled in from the
// dataset) and returns the completed manifest.
DatasetManifest save_dataset(const OperationalDataset& dataset,
                             DatasetManifest manifest,
                             const std::filesystem::path& base_dir = {});

// Convenience: writes <prefix>.act/.conf/.corr plus <prefix>.manifest.
DatasetManifest save_dataset_with_prefix(const OperationalDataset& dataset,
                                         const std::string& prefix,
                                         StorageFormat format);

// Low-level file codecs. Binary files are CESA (matrix), CESC (confidence)
// and CESH (correctness): 4-byte magic, u16 version, u32 N, [u32 m], then
// little-endian float32 payload.
Matrix read_matrix_text(const std::filesystem::path& path);
Matrix read_matrix_binary(const std::filesystem::path& path);
// Dispatches on the leading magic bytes.
Matrix read_matrix_any(const std::filesystem::path& path);
void write_matrix_text(const Matrix& matrix, const std::filesystem::path& path);
void write_matrix_binary(const Matrix& matrix,
                         const std::filesystem::path& path);

std::vector<double> read_column(const std::filesystem::path& path,
                                StorageFormat format, bool correctness);
void write_column(std::span<const double> values,
                  const std::filesystem::path& path, StorageFormat format,
                  bool correctness);

// 17 significant digits; enough to round-trip any double.
std::string format_double(double value);

}  // namespace cesample

#endif  // CESAMPLE_DATASET_HPP_
