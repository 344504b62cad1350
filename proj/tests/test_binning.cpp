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

#include <cstdint>
#include <numeric>
#include <vector>

#include "cesample/binning.hpp"
#include "cesample/error.hpp"
#include "cesample/rng.hpp"
#include "doctest.h"

namespace {

using namespace cesample;

OperationalDataset column_dataset(std::vector<std::vector<double>> rows) {
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  return make_dataset(std::move(m));
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace

TEST_SUITE("binning") {

TEST_CASE("section edges") {
  CHECK(section_of(0.0, 0.0, 1.0, 20) == 1);
  CHECK(section_of(1.0, 0.0, 1.0, 20) == 20);
  CHECK(section_of(0.5, 0.0, 1.0, 20) == 11);
  CHECK(section_of(0.05, 0.0, 1.0, 20) == 2);
  CHECK(section_of(3.7, 3.7, 3.7, 20) == 1);
  CHECK(section_of(-5.0, 3.7, 3.7, 20) == 1);
  // Clamped outside the fitted range.
  CHECK(section_of(-0.1, 0.0, 1.0, 20) == 1);
  CHECK(section_of(7.0, 0.0, 1.0, 20) == 20);
}

TEST_CASE("fit uses per-column observed range") {
  const auto ds = column_dataset({{0.0, 3.7, -2.0}, {0.5, 3.7, 4.0}, {1.0, 3.7, 1.0}});
  const BinningSpec spec = fit_binning(ds, 20);
  CHECK(spec.lo == std::vector<double>{0.0, 3.7, -2.0});
  CHECK(spec.hi == std::vector<double>{1.0, 3.7, 4.0});
  CHECK((spec.hi[0] - spec.lo[0]) / 20 == doctest::Approx(0.05));
  CHECK_THROWS_AS(fit_binning(ds, 0), Error);
}

TEST_CASE("three values, two sections") {
  const auto ds = column_dataset({{0.0}, {0.5}, {1.0}});
  const auto rows = all_rows(3);
  const MarginalHistogram h = marginals(ds, rows, fit_binning(ds, 2));
  CHECK(h.count(0, 0) == 1);
  CHECK(h.count(0, 1) == 2);
  CHECK(h.prob(0, 0) == doctest::Approx(1.0 / 3));
  CHECK(h.prob(0, 1) == doctest::Approx(2.0 / 3));
}

TEST_CASE("hand-enumerable two-neuron tally") {
  // Neuron 0 range [0,4], neuron 1 range [-1,1]; K=4.
  const auto ds = column_dataset({{0, -1}, {1, 0}, {2.5, 0.2}, {4, 1}});
  const SectionTable table(ds, fit_binning(ds, 4));
  const MarginalHistogram h = marginals(table);
  // Neuron 0: 0->1, 1->2, 2.5->3, 4->4. Neuron 1: -1->1, 0->3, 0.2->3, 1->4.
  CHECK(h.counts() == std::vector<std::uint64_t>{1, 1, 1, 1, 1, 0, 2, 1});
  CHECK(h.total() == 4);
}

TEST_CASE("normalisation, monotonicity and incremental counts") {
  Rng rng(17);
  Matrix m(200, 3);
  for (std::size_t r = 0; r < 200; ++r)
    for (std::size_t c = 0; c < 3; ++c) m(r, c) = rng.normal();
  const auto ds = make_dataset(m);
  const BinningSpec spec = fit_binning(ds, 7);
  const SectionTable table(ds, spec);
  const MarginalHistogram whole = marginals(table);
  for (std::size_t i = 0; i < 3; ++i) {
    double sum = 0.0;
    std::uint64_t count = 0;
    for (std::size_t j = 0; j < 7; ++j) {
      sum += whole.prob(i, j);
      count += whole.count(i, j);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(count == 200);
  }

  std::size_t prev = 1;
  for (double v = -4.0; v <= 4.0; v += 0.001) {
    const std::size_t s = section_of(v, -1.3, 2.9, 13);
    CHECK(s >= prev);
    prev = s;
  }

  const auto subset = rng.sample_without_replacement(200, 37);
  MarginalHistogram grown(3, 7);
  for (std::size_t r : subset) grown.add_row(table.row(r));
  CHECK(grown == marginals(table, subset));
  CHECK(grown == marginals(ds, subset, spec));
}

TEST_CASE("empty subset and malformed counts are rejected") {
  const auto ds = column_dataset({{0.0}, {1.0}});
  const SectionTable table(ds, fit_binning(ds, 2));
  CHECK_THROWS_AS(marginals(table, std::vector<std::size_t>{}), Error);
  const std::vector<std::uint64_t> uneven{1, 1, 3, 0};
  CHECK_THROWS_AS(MarginalHistogram::from_counts(2, 2, uneven), Error);
}

}  // TEST_SUITE
