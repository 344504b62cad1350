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

#ifndef CESAMPLE_BINNING_HPP_
#define CESAMPLE_BINNING_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cesample/dataset.hpp"

namespace cesample {

// K equal-width sections over each neuron's observed range [lo, hi].
struct BinningSpec {
  std::size_t sections = 20;
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t width() const noexcept { return lo.size(); }
};

BinningSpec fit_binning(const OperationalDataset& dataset, std::size_t sections);

// 1-based section of `value`. Sections are left-closed, the last one also
// contains `hi`; out-of-range values clamp to 1 or K; a degenerate range
// (lo == hi) maps everything to section 1.
std::size_t section_of(double value, double lo, double hi, std::size_t sections);

// N x m table of 0-based section indices, computed once per dataset so the
// selection loop never touches the activations again.
class SectionTable {
 public:
  SectionTable(const OperationalDataset& dataset, const BinningSpec& spec);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t sections() const noexcept { return sections_; }

  std::span<const std::uint32_t> row(std::size_t r) const {
    return {codes_.data() + r * width_, width_};
  }

 private:
  std::size_t rows_;
  std::size_t width_;
  std::size_t sections_;
  std::vector<std::uint32_t> codes_;
};

// Per-neuron section counts of a set of rows. Counts are exact; the
// probabilities are derived on demand.
class MarginalHistogram {
 public:
  MarginalHistogram(std::size_t width, std::size_t sections)
      : width_(width), sections_(sections), counts_(width * sections, 0) {}

  // From row-major m x K tallies; every neuron's row must have the same
  // positive sum.
  static MarginalHistogram from_counts(std::size_t width, std::size_t sections,
                                       std::span<const std::uint64_t> counts);

  std::size_t width() const noexcept { return width_; }
  std::size_t sections() const noexcept { return sections_; }
  std::uint64_t total() const noexcept { return total_; }

  std::uint64_t count(std::size_t neuron, std::size_t section) const {
    return counts_[neuron * sections_ + section];
  }
  double prob(std::size_t neuron, std::size_t section) const {
    return static_cast<double>(count(neuron, section)) /
           static_cast<double>(total_);
  }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

  void add_row(std::span<const std::uint32_t> sections);

  friend bool operator==(const MarginalHistogram&,
                         const MarginalHistogram&) = default;

 private:
  std::size_t width_;
  std::size_t sections_;
  std::uint64_t total_ = 0;
  std::vector<std::uint64_t> counts_;
};

MarginalHistogram marginals(const SectionTable& table,
                            std::span<const std::size_t> rows);
MarginalHistogram marginals(const OperationalDataset& dataset,
                            std::span<const std::size_t> rows,
                            const BinningSpec& spec);
// Whole-dataset marginals P_S.
MarginalHistogram marginals(const SectionTable& table);

}  // namespace cesample

#endif  // CESAMPLE_BINNING_HPP_
