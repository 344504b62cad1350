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

#include "cesample/binning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cesample/error.hpp"

namespace cesample {

BinningSpec fit_binning(const OperationalDataset& dataset, std::size_t sections) {
  if (sections == 0) {
    throw Error(ErrorCode::kInvalidArgument, "section count must be positive");
  }
  BinningSpec spec;
  spec.sections = sections;
  const std::size_t m = dataset.width();
  spec.lo.assign(m, 0.0);
  spec.hi.assign(m, 0.0);
  for (std::size_t c = 0; c < m; ++c) {
    double lo = dataset.activations(0, c);
    double hi = lo;
    for (std::size_t r = 1; r < dataset.size(); ++r) {
      lo = std::min(lo, dataset.activations(r, c));
      hi = std::max(hi, dataset.activations(r, c));
    }
    spec.lo[c] = lo;
    spec.hi[c] = hi;
  }
  return spec;
}

std::size_t section_of(double value, double lo, double hi, std::size_t sections) {
  if (!(hi > lo) || value <= lo) return 1;
  if (value >= hi) return sections;
  // (v - lo) * K / (hi - lo) keeps grid points such as 0.5 on [0,1], K=20
  // exact, which (v - lo) / w with w = 0.05 would not.
  const double scaled =
      (value - lo) * static_cast<double>(sections) / (hi - lo);
  const auto j = static_cast<std::size_t>(std::floor(scaled));
  return std::min(j, sections - 1) + 1;
}

SectionTable::SectionTable(const OperationalDataset& dataset,
                           const BinningSpec& spec)
    : rows_(dataset.size()),
      width_(dataset.width()),
      sections_(spec.sections),
      codes_(rows_ * width_) {
  if (spec.width() != width_ || spec.hi.size() != width_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "binning spec covers " + std::to_string(spec.width()) +
                    " neurons, dataset has " + std::to_string(width_));
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < width_; ++c) {
      codes_[r * width_ + c] = static_cast<std::uint32_t>(
          section_of(dataset.activations(r, c), spec.lo[c], spec.hi[c],
                     sections_) -
          1);
    }
  }
}

void MarginalHistogram::add_row(std::span<const std::uint32_t> sections) {
  if (sections.size() != width_) {
    throw Error(ErrorCode::kDimensionMismatch, "row width does not match histogram");
  }
  for (std::size_t i = 0; i < width_; ++i) {
    ++counts_[i * sections_ + sections[i]];
  }
  ++total_;
}

MarginalHistogram MarginalHistogram::from_counts(
    std::size_t width, std::size_t sections,
    std::span<const std::uint64_t> counts) {
  if (counts.size() != width * sections || width == 0 || sections == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "count matrix has wrong size");
  }
  MarginalHistogram h(width, sections);
  for (std::size_t i = 0; i < width; ++i) {
    std::uint64_t row_total = 0;
    for (std::size_t j = 0; j < sections; ++j) row_total += counts[i * sections + j];
    if (i == 0) h.total_ = row_total;
    if (row_total != h.total_) {
      throw Error(ErrorCode::kInvalidValue,
                  "every neuron's counts must sum to the same total");
    }
  }
  if (h.total_ == 0) throw Error(ErrorCode::kEmptySubset, "histogram of no rows");
  std::copy(counts.begin(), counts.end(), h.counts_.begin());
  return h;
}

MarginalHistogram marginals(const SectionTable& table,
                            std::span<const std::size_t> rows) {
  if (rows.empty()) {
    throw Error(ErrorCode::kEmptySubset, "marginals of an empty subset");
  }
  MarginalHistogram h(table.width(), table.sections());
  for (std::size_t r : rows) {
    if (r >= table.rows()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "row " + std::to_string(r) + " out of range");
    }
    h.add_row(table.row(r));
  }
  return h;
}

MarginalHistogram marginals(const OperationalDataset& dataset,
                            std::span<const std::size_t> rows,
                            const BinningSpec& spec) {
  return marginals(SectionTable(dataset, spec), rows);
}

MarginalHistogram marginals(const SectionTable& table) {
  MarginalHistogram h(table.width(), table.sections());
  for (std::size_t r = 0; r < table.rows(); ++r) h.add_row(table.row(r));
  return h;
}

}  // namespace cesample
