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

#include "cesample/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cesample/error.hpp"

namespace cesample {

namespace {

void check_shapes(const MarginalHistogram& a, const MarginalHistogram& b) {
  if (a.width() != b.width() || a.sections() != b.sections()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "histograms differ in shape: " + std::to_string(a.width()) +
                    "x" + std::to_string(a.sections()) + " vs " +
                    std::to_string(b.width()) + "x" +
                    std::to_string(b.sections()));
  }
  if (a.total() == 0 || b.total() == 0) {
    throw Error(ErrorCode::kEmptySubset, "histogram of an empty set");
  }
}

}  // namespace

const char* objective_name(ObjectiveTag tag) {
  return tag == ObjectiveTag::kAvgCrossEntropy ? "ce" : "kl";
}

void ObjectiveKind::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::kInvalidArgument, "smoothing alpha must be >= 0");
  }
  if (tag == ObjectiveTag::kAvgCrossEntropy && !(alpha > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "cross-entropy selection needs alpha > 0");
  }
  if (!(log_base > 0.0) || log_base == 1.0 || !std::isfinite(log_base)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid logarithm base");
  }
  if (!std::isfinite(offset)) {
    throw Error(ErrorCode::kInvalidArgument, "objective offset must be finite");
  }
}

double avg_cross_entropy(const MarginalHistogram& population,
                         const MarginalHistogram& sample, double alpha) {
  check_shapes(population, sample);
  const std::size_t m = population.width();
  const std::size_t k = population.sections();
  const double denom =
      static_cast<double>(sample.total()) + alpha * static_cast<double>(k);
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double ps = population.prob(i, j);
      if (ps == 0.0) continue;
      const double pt =
          (static_cast<double>(sample.count(i, j)) + alpha) / denom;
      sum += ps * std::log(pt);
    }
  }
  return -sum / static_cast<double>(m);
}

double kl_t_from_s(const MarginalHistogram& population,
                   const MarginalHistogram& sample) {
  check_shapes(population, sample);
  const std::size_t m = population.width();
  const std::size_t k = population.sections();
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (sample.count(i, j) == 0) continue;
      if (population.count(i, j) == 0) {
        throw Error(ErrorCode::kSupportViolation,
                    "sample occupies section " + std::to_string(j + 1) +
                        " of neuron " + std::to_string(i + 1) +
                        " where the population has no mass");
      }
      const double pt = sample.prob(i, j);
      sum += pt * std::log(pt / population.prob(i, j));
    }
  }
  return sum / static_cast<double>(m);
}

double objective_value(const ObjectiveKind& kind,
                       const MarginalHistogram& population,
                       const MarginalHistogram& sample) {
  kind.validate();
  const double raw = kind.tag == ObjectiveTag::kAvgCrossEntropy
                         ? avg_cross_entropy(population, sample, kind.alpha)
                         : kl_t_from_s(population, sample);
  return raw / std::log(kind.log_base) + kind.offset;
}

IncrementalObjective::IncrementalObjective(const MarginalHistogram& population,
                                           ObjectiveKind kind)
    : population_(population),
      sample_(population.width(), population.sections()),
      kind_(kind),
      ps_(population.width() * population.sections()),
      log_ps_(ps_.size()) {
  kind_.validate();
  if (population.total() == 0) {
    throw Error(ErrorCode::kEmptySubset, "population histogram is empty");
  }
  scale_ = 1.0 / std::log(kind_.log_base);
  const std::size_t k = population.sections();
  for (std::size_t cell = 0; cell < ps_.size(); ++cell) {
    ps_[cell] = population.prob(cell / k, cell % k);
    log_ps_[cell] = ps_[cell] > 0.0 ? std::log(ps_[cell]) : 0.0;
  }
  refresh();
}

IncrementalObjective::IncrementalObjective(const MarginalHistogram& population,
                                           ObjectiveKind kind,
                                           const MarginalHistogram& base_sample)
    : IncrementalObjective(population, kind) {
  if (base_sample.width() != population.width() ||
      base_sample.sections() != population.sections()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "base sample and population differ in shape");
  }
  sample_ = base_sample;
  refresh();
}

// Per-cell contribution; the objective is finish(sum of terms).
//   CE: pS * ln(c + alpha)
//   KL: c * (ln c - ln pS)
double IncrementalObjective::term(std::size_t cell, std::uint64_t count) const {
  const double c = static_cast<double>(count);
  if (kind_.tag == ObjectiveTag::kAvgCrossEntropy) {
    if (ps_[cell] == 0.0) return 0.0;
    return ps_[cell] * std::log(c + kind_.alpha);
  }
  if (count == 0) return 0.0;
  if (ps_[cell] == 0.0) {
    const std::size_t k = population_.sections();
    throw Error(ErrorCode::kSupportViolation,
                "sample occupies section " + std::to_string(cell % k + 1) +
                    " of neuron " + std::to_string(cell / k + 1) +
                    " where the population has no mass");
  }
  return c * (std::log(c) - log_ps_[cell]);
}

double IncrementalObjective::finish(double accumulated,
                                    std::uint64_t total) const {
  const double m = static_cast<double>(population_.width());
  const double t = static_cast<double>(total);
  double raw;
  if (kind_.tag == ObjectiveTag::kAvgCrossEntropy) {
    const double k = static_cast<double>(population_.sections());
    raw = -accumulated / m + std::log(t + kind_.alpha * k);
  } else {
    raw = accumulated / (m * t) - std::log(t);
  }
  return raw * scale_ + kind_.offset;
}

void IncrementalObjective::refresh() {
  double sum = 0.0;
  const auto& counts = sample_.counts();
  for (std::size_t cell = 0; cell < counts.size(); ++cell) {
    sum += term(cell, counts[cell]);
  }
  accumulated_ = sum;
}

void IncrementalObjective::add(std::span<const std::uint32_t> row_sections) {
  sample_.add_row(row_sections);
  refresh();
}

void IncrementalObjective::add(const SectionTable& table,
                               std::span<const std::size_t> rows) {
  for (std::size_t r : rows) sample_.add_row(table.row(r));
  refresh();
}

double IncrementalObjective::value() const {
  if (sample_.total() == 0) {
    throw Error(ErrorCode::kEmptySubset, "objective of an empty sample");
  }
  return finish(accumulated_, sample_.total());
}

double IncrementalObjective::value_with(const SectionTable& table,
                                        std::span<const std::size_t> rows) const {
  if (rows.empty()) {
    throw Error(ErrorCode::kEmptySubset, "candidate group is empty");
  }
  if (table.width() != population_.width() ||
      table.sections() != population_.sections()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "section table does not match the population histogram");
  }
  const std::size_t m = population_.width();
  const std::size_t k = population_.sections();
  double delta = 0.0;
  std::vector<std::uint32_t> codes;
  codes.reserve(rows.size());
  for (std::size_t i = 0; i < m; ++i) {
    codes.clear();
    for (std::size_t r : rows) codes.push_back(table.row(r)[i]);
    std::sort(codes.begin(), codes.end());
    for (std::size_t a = 0; a < codes.size();) {
      std::size_t b = a;
      while (b < codes.size() && codes[b] == codes[a]) ++b;
      const std::size_t cell = i * k + codes[a];
      const std::uint64_t c = sample_.counts()[cell];
      delta += term(cell, c + (b - a)) - term(cell, c);
      a = b;
    }
  }
  return finish(accumulated_ + delta, sample_.total() + rows.size());
}

double incremental_objective(const MarginalHistogram& population,
                             const MarginalHistogram& base_sample,
                             const SectionTable& table,
                             std::span<const std::size_t> group,
                             const ObjectiveKind& kind) {
  const IncrementalObjective objective(population, kind, base_sample);
  return objective.value_with(table, group);
}

}  // namespace cesample
