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

#ifndef CESAMPLE_SCENARIO_HPP_
#define CESAMPLE_SCENARIO_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cesample/dataset.hpp"

namespace cesample {

struct SynthCluster {
  double weight = 1.0;
  std::vector<double> center;
  double spread = 1.0;
  double accuracy = 1.0;
};

// Gaussian clusters in representation space, each with its own rate of
// correct predictions.
struct SynthSpec {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<SynthCluster> clusters;
  std::uint64_t seed = 0;
  // Confidence becomes 1 - (accuracy + noise): a model whose confidence
  // points the wrong way.
  bool invert_confidence = false;

  void validate() const;
};

// Key=value file: n=, m=, seed=, invert_confidence=0|1 and one
// "cluster=weight,accuracy,spread,c_1,...,c_m" line per cluster.
SynthSpec read_synth_spec(const std::filesystem::path& path);
void write_synth_spec(const SynthSpec& spec, const std::filesystem::path& path);

OperationalDataset generate_synthetic(const SynthSpec& spec);

enum class Activation { kIdentity, kRelu, kSoftmax };

struct DenseLayer {
  Matrix weights;  // input width x output width
  std::vector<double> biases;
  Activation activation = Activation::kIdentity;
};

struct MlpModel {
  std::size_t input_width = 0;
  std::vector<DenseLayer> layers;

  void validate() const;
};

// Text model file:
//   layers=L input=d
//   then per layer "rows cols activation", rows*cols weights (row-major,
//   rows = input width), then cols biases. Whitespace-separated.
MlpModel read_model(const std::filesystem::path& path);
void write_model(const MlpModel& model, const std::filesystem::path& path);

struct ForwardResult {
  Matrix last_hidden;  // input to the final layer
  Matrix outputs;      // final layer output
  std::vector<std::size_t> predicted_class;
  std::vector<double> confidence;  // max of the softmax-normalized outputs
};

ForwardResult mlp_forward(const MlpModel& model, const Matrix& inputs);

std::vector<std::uint8_t> correctness_from_labels(
    std::span<const std::size_t> predicted, std::span<const std::int64_t> labels);

std::vector<std::int64_t> read_labels(const std::filesystem::path& path);

}  // namespace cesample

#endif  // CESAMPLE_SCENARIO_HPP_
