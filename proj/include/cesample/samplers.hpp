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

#ifndef CESAMPLE_SAMPLERS_HPP_
#define CESAMPLE_SAMPLERS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "cesample/binning.hpp"
#include "cesample/dataset.hpp"
#include "cesample/objective.hpp"

namespace cesample {

enum class Method { kSrs, kCss, kCes };

const char* method_name(Method method);
Method parse_method(const std::string& name);

enum class ObjectiveChoice { kAuto, kCrossEntropy, kKl };

ObjectiveChoice parse_objective_choice(const std::string& name);

struct SelectionParams {
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  std::size_t init = 30;         // p
  std::size_t group = 5;         // q
  std::size_t candidates = 300;  // l
  std::size_t sections = 20;     // K
  ObjectiveChoice objective = ObjectiveChoice::kAuto;
  double alpha = kDefaultAlpha;
  // kAuto uses KL below this population size, cross-entropy at or above.
  std::size_t kl_threshold = 1000;
  double log_base = std::numbers::e;
  double offset = 0.0;

  void validate(std::size_t population) const;
};

ObjectiveKind resolve_objective(const SelectionParams& params,
                                std::size_t population);

struct StratificationSpec {
  // Strata are contiguous blocks of the confidence ranking, highest first.
  std::vector<double> strata{0.8, 0.1, 0.1};
  std::vector<double> allocation{0.2, 0.4, 0.4};
  // Ignore `allocation` and draw n * |S_j| / |S| from each stratum.
  bool proportional = false;

  void validate() const;
};

struct SampleSelection {
  Method method = Method::kSrs;
  std::size_t population = 0;
  // Row indices into the dataset, in selection order. For CSS the rows are
  // grouped by stratum, in stratum order; for CES the first `init` rows are
  // the random seed set and each following block is one merged group.
  std::vector<std::size_t> indices;
  std::vector<double> objective_trace;      // CES only
  std::vector<std::size_t> stratum_sizes;   // CSS only
  std::vector<std::size_t> stratum_counts;  // CSS only
  // Free-form key/value echo of the parameters, written to selection files.
  std::vector<std::pair<std::string, std::string>> metadata;
};

struct EstimateReport {
  Method method = Method::kSrs;
  double estimate = 0.0;
  std::size_t sample_size = 0;
};

SampleSelection srs_select(const OperationalDataset& dataset, std::size_t budget,
                           std::uint64_t seed);

// Stratum sizes from the fractions (round, last absorbs the remainder).
std::vector<std::size_t> stratum_sizes(std::size_t population,
                                       const std::vector<double>& fractions);

// Per-stratum draw counts for budget n, with capping at stratum size and
// redistribution of the excess proportionally to the allocation.
std::vector<std::size_t> allocate_budget(std::size_t budget,
                                         const std::vector<std::size_t>& sizes,
                                         const std::vector<double>& allocation);

SampleSelection css_select(const OperationalDataset& dataset, std::size_t budget,
                           std::uint64_t seed, const StratificationSpec& strat);

// Precomputed binning state shared by repeated CES runs on one dataset.
struct CesContext {
  CesContext(const OperationalDataset& dataset, std::size_t sections);

  BinningSpec binning;
  SectionTable table;
  MarginalHistogram population;
};

SampleSelection ces_select(const OperationalDataset& dataset,
                           const SelectionParams& params);
SampleSelection ces_select(const CesContext& context,
                           const SelectionParams& params);

SampleSelection select(Method method, const OperationalDataset& dataset,
                       const SelectionParams& params,
                       const StratificationSpec& strat);

EstimateReport estimate_from_selection(const OperationalDataset& dataset,
                                       const SampleSelection& selection);

// Selection file: "# key=value" header lines, then one example id per line.
void write_selection(const SampleSelection& selection,
                     const OperationalDataset& dataset,
                     const std::filesystem::path& path);
// Ids are mapped back to rows of `dataset`.
SampleSelection read_selection(const std::filesystem::path& path,
                               const OperationalDataset& dataset);

}  // namespace cesample

#endif  // CESAMPLE_SAMPLERS_HPP_
