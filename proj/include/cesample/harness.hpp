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

#ifndef CESAMPLE_HARNESS_HPP_
#define CESAMPLE_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cesample/dataset.hpp"
#include "cesample/metrics.hpp"
#include "cesample/samplers.hpp"

namespace cesample {

// 35, 40, ..., 180.
std::vector<std::size_t> default_sample_sizes();

struct ExperimentConfig {
  std::vector<Method> methods{Method::kSrs, Method::kCes};
  std::vector<std::size_t> sample_sizes = default_sample_sizes();
  std::size_t repetitions = 50;
  std::uint64_t seed = 0;
  // budget and seed are overridden per trial.
  SelectionParams params;
  StratificationSpec strat;
  // Worker threads for repetitions; results do not depend on this.
  std::size_t threads = 1;

  void validate(const OperationalDataset& dataset) const;
};

// Seed of one trial: a fixed hash of (master, method, size, repetition).
std::uint64_t trial_seed(std::uint64_t master, Method method,
                         std::size_t sample_size, std::size_t repetition);

struct RawRecord {
  std::string method;
  std::size_t sample_size = 0;
  std::size_t repetition = 0;
  double estimate = 0.0;
};

struct AggregateRow {
  std::string method;
  std::size_t sample_size = 0;
  double mse = 0.0;
  double stddev = 0.0;  // sqrt(mse)
  double mean_estimate = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  double true_accuracy = 0.0;
  std::vector<RawRecord> raw;  // ordered by method, size, repetition
  std::vector<AggregateRow> aggregates;
  // One report per non-baseline method against the baseline (srs when
  // present, otherwise the first method). E is NaN where the baseline MSE
  // is zero; such sizes are left out of the average.
  std::vector<EfficiencyReport> efficiency;
};

ExperimentResult run_experiment(const OperationalDataset& dataset,
                                const ExperimentConfig& config);

// Rebuilds aggregates and E-values from raw records.
void summarize(ExperimentResult& result);

// Writes <dir>/raw.csv and <dir>/agg.csv.
void write_results(const ExperimentResult& result, const std::filesystem::path& dir);

std::vector<RawRecord> read_raw_csv(const std::filesystem::path& path);

}  // namespace cesample

#endif  // CESAMPLE_HARNESS_HPP_
