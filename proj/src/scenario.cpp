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

#include "cesample/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cesample/error.hpp"
#include "cesample/rng.hpp"

namespace cesample {

namespace fs = std::filesystem;

namespace {

constexpr double kConfidenceNoise = 0.05;

template <typename T>
T parse_value(std::string_view text, const std::string& what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kParse,
                what + ": cannot parse '" + std::string(text) + "'");
  }
  return value;
}

std::vector<double> parse_list(std::string_view text, const std::string& what) {
  std::vector<double> out;
  for (;;) {
    const auto comma = text.find(',');
    out.push_back(parse_value<double>(text.substr(0, comma), what));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kSoftmax: return "softmax";
  }
  return "?";
}

Activation parse_activation(const std::string& name) {
  if (name == "identity" || name == "linear") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "softmax") return Activation::kSoftmax;
  throw Error(ErrorCode::kParse, "unknown activation '" + name + "'");
}

void softmax_inplace(std::span<double> row) {
  const double peak = *std::max_element(row.begin(), row.end());
  double sum = 0.0;
  for (double& v : row) {
    v = std::exp(v - peak);
    sum += v;
  }
  for (double& v : row) v /= sum;
}

Matrix apply_layer(const DenseLayer& layer, const Matrix& in) {
  const std::size_t rows = in.rows();
  const std::size_t width_in = layer.weights.rows();
  const std::size_t width_out = layer.weights.cols();
  Matrix out(rows, width_out);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t o = 0; o < width_out; ++o) {
      double acc = layer.biases[o];
      for (std::size_t i = 0; i < width_in; ++i) {
        acc += in(r, i) * layer.weights(i, o);
      }
      out(r, o) = acc;
    }
    switch (layer.activation) {
      case Activation::kIdentity: break;
      case Activation::kRelu:
        for (double& v : out.row(r)) v = std::max(v, 0.0);
        break;
      case Activation::kSoftmax:
        softmax_inplace(out.row(r));
        break;
    }
  }
  return out;
}

}  // namespace

void SynthSpec::validate() const {
  if (n == 0 || m == 0) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic spec needs n >= 1 and m >= 1");
  }
  if (clusters.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic spec has no clusters");
  }
  double total = 0.0;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const auto& cl = clusters[c];
    const std::string tag = "cluster " + std::to_string(c + 1);
    if (!(cl.weight > 0.0 && cl.weight <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, tag + ": weight must be in (0,1]");
    }
    if (!(cl.accuracy >= 0.0 && cl.accuracy <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, tag + ": accuracy must be in [0,1]");
    }
    if (!(cl.spread > 0.0) || !std::isfinite(cl.spread)) {
      throw Error(ErrorCode::kInvalidArgument, tag + ": spread must be positive");
    }
    if (cl.center.size() != m) {
      throw Error(ErrorCode::kDimensionMismatch,
                  tag + ": center has " + std::to_string(cl.center.size()) +
                      " coordinates, m=" + std::to_string(m));
    }
    total += cl.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "cluster weights must sum to 1");
  }
}

SynthSpec read_synth_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open synthetic spec " + path.string());
  SynthSpec spec;
  std::vector<std::vector<double>> raw_clusters;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParse, path.string() + ": expected key=value, got '" + line + "'");
    }
    const std::string key = line.substr(0, eq);
    const std::string_view value = std::string_view(line).substr(eq + 1);
    const std::string what = path.string() + ": " + key;
    if (key == "n") {
      spec.n = parse_value<std::size_t>(value, what);
    } else if (key == "m") {
      spec.m = parse_value<std::size_t>(value, what);
    } else if (key == "seed") {
      spec.seed = parse_value<std::uint64_t>(value, what);
    } else if (key == "invert_confidence") {
      spec.invert_confidence = parse_value<int>(value, what) != 0;
    } else if (key == "cluster") {
      raw_clusters.push_back(parse_list(value, what));
    } else {
      throw Error(ErrorCode::kParse, path.string() + ": unknown key '" + key + "'");
    }
  }
  for (const auto& raw : raw_clusters) {
    if (raw.size() < 4) {
      throw Error(ErrorCode::kParse,
                  path.string() + ": cluster needs weight,accuracy,spread,center...");
    }
    SynthCluster c;
    c.weight = raw[0];
    c.accuracy = raw[1];
    c.spread = raw[2];
    c.center.assign(raw.begin() + 3, raw.end());
    spec.clusters.push_back(std::move(c));
  }
  spec.validate();
  return spec;
}

void write_synth_spec(const SynthSpec& spec, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "n=" << spec.n << "\nm=" << spec.m << "\nseed=" << spec.seed
      << "\ninvert_confidence=" << (spec.invert_confidence ? 1 : 0) << "\n";
  for (const auto& c : spec.clusters) {
    out << "cluster=" << format_double(c.weight) << ','
        << format_double(c.accuracy) << ',' << format_double(c.spread);
    for (double x : c.center) out << ',' << format_double(x);
    out << "\n";
  }
}

OperationalDataset generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, 0));
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& c : spec.clusters) cumulative.push_back(acc += c.weight);

  Matrix activations(spec.n, spec.m);
  std::vector<double> confidence(spec.n);
  std::vector<std::uint8_t> correctness(spec.n);
  for (std::size_t r = 0; r < spec.n; ++r) {
    const double u = rng.uniform01() * acc;
    std::size_t k = 0;
    while (k + 1 < cumulative.size() && u >= cumulative[k]) ++k;
    const auto& cluster = spec.clusters[k];
    for (std::size_t c = 0; c < spec.m; ++c) {
      activations(r, c) = cluster.center[c] + cluster.spread * rng.normal();
    }
    correctness[r] = rng.bernoulli(cluster.accuracy) ? 1 : 0;
    const double noisy = std::clamp(
        cluster.accuracy + rng.uniform(-kConfidenceNoise, kConfidenceNoise), 0.0, 1.0);
    confidence[r] = spec.invert_confidence ? 1.0 - noisy : noisy;
  }
  return make_dataset(std::move(activations), std::move(confidence),
                      std::move(correctness));
}

void MlpModel::validate() const {
  if (layers.empty()) throw Error(ErrorCode::kInvalidArgument, "model has no layers");
  std::size_t width = input_width;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const std::string tag = "layer " + std::to_string(l + 1);
    if (layer.weights.rows() != width) {
      throw Error(ErrorCode::kDimensionMismatch,
                  tag + ": expects input width " +
                      std::to_string(layer.weights.rows()) + ", previous width is " +
                      std::to_string(width));
    }
    if (layer.weights.cols() == 0 || layer.biases.size() != layer.weights.cols()) {
      throw Error(ErrorCode::kDimensionMismatch, tag + ": bias length mismatch");
    }
    if (layer.activation == Activation::kSoftmax && l + 1 != layers.size()) {
      throw Error(ErrorCode::kInvalidArgument, tag + ": softmax only allowed last");
    }
    width = layer.weights.cols();
  }
}

MlpModel read_model(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open model " + path.string());
  std::string token;
  const std::string where = path.string();
  auto next = [&]() {
    if (!(in >> token)) {
      throw Error(ErrorCode::kParse, where + ": unexpected end of model file");
    }
    return token;
  };
  auto next_keyed = [&](const std::string& key) {
    const std::string t = next();
    if (t.rfind(key + "=", 0) != 0) {
      throw Error(ErrorCode::kParse, where + ": expected '" + key + "=', got '" + t + "'");
    }
    return parse_value<std::size_t>(std::string_view(t).substr(key.size() + 1), where);
  };
  MlpModel model;
  const std::size_t layer_count = next_keyed("layers");
  model.input_width = next_keyed("input");
  for (std::size_t l = 0; l < layer_count; ++l) {
    DenseLayer layer;
    const auto rows = parse_value<std::size_t>(next(), where);
    const auto cols = parse_value<std::size_t>(next(), where);
    layer.activation = parse_activation(next());
    std::vector<double> weights(rows * cols);
    for (double& w : weights) w = parse_value<double>(next(), where);
    layer.weights = Matrix(rows, cols, std::move(weights));
    layer.biases.resize(cols);
    for (double& b : layer.biases) b = parse_value<double>(next(), where);
    model.layers.push_back(std::move(layer));
  }
  if (in >> token) {
    throw Error(ErrorCode::kParse, where + ": trailing data after last layer");
  }
  model.validate();
  return model;
}

void write_model(const MlpModel& model, const fs::path& path) {
  model.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "layers=" << model.layers.size() << " input=" << model.input_width << "\n";
  for (const auto& layer : model.layers) {
    out << layer.weights.rows() << ' ' << layer.weights.cols() << ' '
        << activation_name(layer.activation) << "\n";
    for (std::size_t r = 0; r < layer.weights.rows(); ++r) {
      for (std::size_t c = 0; c < layer.weights.cols(); ++c) {
        out << (c ? " " : "") << format_double(layer.weights(r, c));
      }
      out << "\n";
    }
    for (std::size_t c = 0; c < layer.biases.size(); ++c) {
      out << (c ? " " : "") << format_double(layer.biases[c]);
    }
    out << "\n";
  }
}

ForwardResult mlp_forward(const MlpModel& model, const Matrix& inputs) {
  model.validate();
  if (inputs.cols() != model.input_width) {
    throw Error(ErrorCode::kDimensionMismatch,
                "inputs have width " + std::to_string(inputs.cols()) +
                    ", model expects " + std::to_string(model.input_width));
  }
  ForwardResult result;
  Matrix current = inputs;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    if (l + 1 == model.layers.size()) result.last_hidden = current;
    current = apply_layer(model.layers[l], current);
  }
  result.outputs = std::move(current);
  const bool normalized = model.layers.back().activation == Activation::kSoftmax;
  const std::size_t rows = result.outputs.rows();
  result.predicted_class.resize(rows);
  result.confidence.resize(rows);
  std::vector<double> probs;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto out = result.outputs.row(r);
    result.predicted_class[r] = static_cast<std::size_t>(
        std::max_element(out.begin(), out.end()) - out.begin());
    probs.assign(out.begin(), out.end());
    if (!normalized) softmax_inplace(probs);
    result.confidence[r] = *std::max_element(probs.begin(), probs.end());
  }
  return result;
}

std::vector<std::uint8_t> correctness_from_labels(
    std::span<const std::size_t> predicted, std::span<const std::int64_t> labels) {
  if (predicted.size() != labels.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(predicted.size()) + " predictions but " +
                    std::to_string(labels.size()) + " labels");
  }
  std::vector<std::uint8_t> out(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    out[i] = labels[i] >= 0 && static_cast<std::size_t>(labels[i]) == predicted[i];
  }
  return out;
}

std::vector<std::int64_t> read_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open labels " + path.string());
  std::vector<std::int64_t> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    labels.push_back(parse_value<std::int64_t>(line, path.string()));
  }
  return labels;
}

}  // namespace cesample
