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

#ifndef CESAMPLE_OBJECTIVE_HPP_
#define CESAMPLE_OBJECTIVE_HPP_

#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "cesample/binning.hpp"

namespace cesample {

enum class ObjectiveTag {
  kAvgCrossEntropy,  // mean over neurons of H(P_S^i, P_T^i)
  kKlTFromS,         // mean over neurons of D_KL(P_T^i || P_S^i)
};

const char* objective_name(ObjectiveTag tag);  // "ce" / "kl"

// Default pseudo-count 1/(e^2 - 1). With it the gain of a section's first
// row, ln((1 + a) / a) = 2, equals 1 / (0 + 1/2), so greedy growth rounds
// expected counts to nearest (Webster) instead of favouring empty sections.
inline constexpr double kDefaultAlpha = 0.15651764274966568;

struct ObjectiveKind {
  ObjectiveTag tag = ObjectiveTag::kAvgCrossEntropy;
  // Pseudo-count added to every section of P_T in the cross-entropy; keeps
  // empty sections finite. Unused by the KL objective.
  double alpha = kDefaultAlpha;
  // Reported values are log_base(.) instead of ln(.), plus `offset`. Neither
  // changes which candidate wins; both exist so callers can report e.g.
  // bits, or CE - H(P_S).
  double log_base = std::numbers::e;
  double offset = 0.0;

  void validate() const;
};

// -(1/m) sum_i sum_j pS[i][j] * ln((cT[i][j] + alpha) / (|T| + alpha K)).
// Sections with pS == 0 contribute nothing. alpha == 0 is accepted here and
// yields +inf when T misses a section S occupies.
double avg_cross_entropy(const MarginalHistogram& population,
                         const MarginalHistogram& sample, double alpha);

// (1/m) sum_i sum_j pT[i][j] * ln(pT[i][j] / pS[i][j]); throws
// kSupportViolation if T occupies a section S does not.
double kl_t_from_s(const MarginalHistogram& population,
                   const MarginalHistogram& sample);

// Either objective per `kind`, including the base/offset transform.
double objective_value(const ObjectiveKind& kind,
                       const MarginalHistogram& population,
                       const MarginalHistogram& sample);

// Objective of a growing sample T against a fixed population. Scoring a
// candidate group only touches the sections the group's rows fall in.
class IncrementalObjective {
 public:
  IncrementalObjective(const MarginalHistogram& population, ObjectiveKind kind);
  // Starts from an existing sample instead of the empty one.
  IncrementalObjective(const MarginalHistogram& population, ObjectiveKind kind,
                       const MarginalHistogram& base_sample);

  const MarginalHistogram& sample() const noexcept { return sample_; }
  const ObjectiveKind& kind() const noexcept { return kind_; }

  void add(std::span<const std::uint32_t> row_sections);
  void add(const SectionTable& table, std::span<const std::size_t> rows);

  // Objective of the current sample, recomputed from its counts.
  double value() const;

  // Objective of sample ∪ rows without modifying the sample. The result
  // depends only on the multiset of section codes, never on row order.
  double value_with(const SectionTable& table,
                    std::span<const std::size_t> rows) const;

 private:
  double term(std::size_t cell, std::uint64_t count) const;
  double finish(double accumulated, std::uint64_t total) const;
  void refresh();

  MarginalHistogram population_;
  MarginalHistogram sample_;
  ObjectiveKind kind_;
  std::vector<double> ps_;      // pS per cell
  std::vector<double> log_ps_;  // ln pS per cell (KL only)
  double accumulated_ = 0.0;    // sum of term() over all cells of sample_
  double scale_ = 1.0;          // 1 / ln(base)
};

// Objective of T ∪ group computed from T's counts without rescanning T.
double incremental_objective(const MarginalHistogram& population,
                             const MarginalHistogram& base_sample,
                             const SectionTable& table,
                             std::span<const std::size_t> group,
                             const ObjectiveKind& kind);

}  // namespace cesample

#endif  // CESAMPLE_OBJECTIVE_HPP_
