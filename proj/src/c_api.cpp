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

#include "cesample/cesample.h"

#include <algorithm>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "cesample/dataset.hpp"
#include "cesample/error.hpp"
#include "cesample/harness.hpp"
#include "cesample/samplers.hpp"
#include "cesample/scenario.hpp"

struct ces_dataset {
  cesample::OperationalDataset data;
};

struct ces_selection {
  cesample::SampleSelection data;
};

struct ces_experiment {
  cesample::ExperimentResult data;
  std::vector<std::string> labels;
};

namespace {

thread_local std::string last_error;

ces_status fail(ces_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename Body>
ces_status guarded(Body&& body) {
  try {
    body();
    return CES_OK;
  } catch (const cesample::Error& e) {
    return fail(static_cast<ces_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CES_ERR_OUT_OF_MEMORY, "out of memory");
  } catch (const std::exception& e) {
    return fail(CES_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CES_ERR_INTERNAL, "unknown exception");
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr) {
    throw cesample::Error(cesample::ErrorCode::kInvalidArgument,
                          std::string(name) + " is NULL");
  }
}

cesample::Method to_method(ces_method m) {
  switch (m) {
    case CES_METHOD_SRS: return cesample::Method::kSrs;
    case CES_METHOD_CSS: return cesample::Method::kCss;
    case CES_METHOD_CES: return cesample::Method::kCes;
  }
  throw cesample::Error(cesample::ErrorCode::kInvalidArgument, "unknown method");
}

ces_method from_method(cesample::Method m) {
  switch (m) {
    case cesample::Method::kSrs: return CES_METHOD_SRS;
    case cesample::Method::kCss: return CES_METHOD_CSS;
    case cesample::Method::kCes: return CES_METHOD_CES;
  }
  return CES_METHOD_SRS;
}

cesample::SelectionParams to_params(const ces_select_params& p) {
  cesample::SelectionParams out;
  out.budget = p.budget;
  out.seed = p.seed;
  out.sections = p.sections;
  out.init = p.init;
  out.group = p.group;
  out.candidates = p.candidates;
  out.alpha = p.alpha;
  switch (p.objective) {
    case CES_OBJECTIVE_AUTO: out.objective = cesample::ObjectiveChoice::kAuto; break;
    case CES_OBJECTIVE_CROSS_ENTROPY:
      out.objective = cesample::ObjectiveChoice::kCrossEntropy;
      break;
    case CES_OBJECTIVE_KL: out.objective = cesample::ObjectiveChoice::kKl; break;
    default:
      throw cesample::Error(cesample::ErrorCode::kInvalidArgument, "unknown objective");
  }
  return out;
}

cesample::StratificationSpec to_strat(const ces_select_params& p) {
  cesample::StratificationSpec out;
  if (p.strata != nullptr) out.strata.assign(p.strata, p.strata + p.strata_len);
  if (p.alloc != nullptr) out.allocation.assign(p.alloc, p.alloc + p.alloc_len);
  out.proportional = p.proportional != 0;
  return out;
}

}  // namespace

extern "C" {

const char* ces_last_error(void) { return last_error.c_str(); }

const char* ces_status_name(ces_status status) {
  if (status == CES_OK) return "ok";
  if (status == CES_ERR_OUT_OF_MEMORY) return "out of memory";
  if (status == CES_ERR_INTERNAL) return "internal error";
  return cesample::error_code_name(static_cast<cesample::ErrorCode>(status));
}

const char* ces_version(void) { return "1.0.0"; }

ces_status ces_dataset_load(const char* manifest_path, ces_dataset** out) {
  return guarded([&] {
    require(manifest_path, "manifest_path");
    require(out, "out");
    *out = new ces_dataset{cesample::load_dataset(manifest_path)};
  });
}

ces_status ces_dataset_save(const ces_dataset* dataset, const char* prefix,
                            const char* format) {
  return guarded([&] {
    require(dataset, "dataset");
    require(prefix, "prefix");
    require(format, "format");
    cesample::save_dataset_with_prefix(dataset->data, prefix,
                                       cesample::parse_format(format));
  });
}

void ces_dataset_free(ces_dataset* dataset) { delete dataset; }

ces_status ces_dataset_shape(const ces_dataset* dataset, size_t* rows, size_t* cols) {
  return guarded([&] {
    require(dataset, "dataset");
    if (rows) *rows = dataset->data.size();
    if (cols) *cols = dataset->data.width();
  });
}

int ces_dataset_has_confidence(const ces_dataset* dataset) {
  return dataset != nullptr && dataset->data.confidence.has_value();
}

int ces_dataset_has_correctness(const ces_dataset* dataset) {
  return dataset != nullptr && dataset->data.correctness.has_value();
}

ces_status ces_dataset_true_accuracy(const ces_dataset* dataset, double* accuracy) {
  return guarded([&] {
    require(dataset, "dataset");
    require(accuracy, "accuracy");
    *accuracy = dataset->data.true_accuracy();
  });
}

ces_status ces_synth_generate(const char* spec_path, const uint64_t* seed_override,
                              int invert_confidence, ces_dataset** out) {
  return guarded([&] {
    require(spec_path, "spec_path");
    require(out, "out");
    auto spec = cesample::read_synth_spec(spec_path);
    if (seed_override) spec.seed = *seed_override;
    if (invert_confidence) spec.invert_confidence = true;
    *out = new ces_dataset{cesample::generate_synthetic(spec)};
  });
}

ces_status ces_infer(const char* model_path, const char* inputs_path,
                     const char* labels_path, ces_dataset** out) {
  return guarded([&] {
    require(model_path, "model_path");
    require(inputs_path, "inputs_path");
    require(out, "out");
    const auto model = cesample::read_model(model_path);
    const auto inputs = cesample::read_matrix_any(inputs_path);
    auto forward = cesample::mlp_forward(model, inputs);
    std::optional<std::vector<std::uint8_t>> correctness;
    if (labels_path) {
      const auto labels = cesample::read_labels(labels_path);
      correctness = cesample::correctness_from_labels(forward.predicted_class, labels);
    }
    *out = new ces_dataset{cesample::make_dataset(std::move(forward.last_hidden),
                                                  std::move(forward.confidence),
                                                  std::move(correctness))};
  });
}

void ces_select_params_init(ces_select_params* params) {
  if (params == nullptr) return;
  const cesample::SelectionParams defaults;
  *params = ces_select_params{};
  params->sections = defaults.sections;
  params->init = defaults.init;
  params->group = defaults.group;
  params->candidates = defaults.candidates;
  params->objective = CES_OBJECTIVE_AUTO;
  params->alpha = defaults.alpha;
}

ces_status ces_select(const ces_dataset* dataset, ces_method method,
                      const ces_select_params* params, ces_selection** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(params, "params");
    require(out, "out");
    const auto m = to_method(method);
    auto p = to_params(*params);
    if (m == cesample::Method::kCes) p.validate(dataset->data.size());
    *out = new ces_selection{
        cesample::select(m, dataset->data, p, to_strat(*params))};
  });
}

ces_status ces_selection_write(const ces_selection* selection,
                               const ces_dataset* dataset, const char* path) {
  return guarded([&] {
    require(selection, "selection");
    require(dataset, "dataset");
    require(path, "path");
    cesample::write_selection(selection->data, dataset->data, path);
  });
}

ces_status ces_selection_read(const char* path, const ces_dataset* dataset,
                              ces_selection** out) {
  return guarded([&] {
    require(path, "path");
    require(dataset, "dataset");
    require(out, "out");
    *out = new ces_selection{cesample::read_selection(path, dataset->data)};
  });
}

void ces_selection_free(ces_selection* selection) { delete selection; }

ces_method ces_selection_method(const ces_selection* selection) {
  return selection ? from_method(selection->data.method) : CES_METHOD_SRS;
}

size_t ces_selection_size(const ces_selection* selection) {
  return selection ? selection->data.indices.size() : 0;
}

ces_status ces_selection_rows(const ces_selection* selection, size_t* rows,
                              size_t capacity) {
  return guarded([&] {
    require(selection, "selection");
    const auto& idx = selection->data.indices;
    if (capacity < idx.size()) {
      throw cesample::Error(cesample::ErrorCode::kInvalidArgument,
                            "row buffer too small");
    }
    require(rows, "rows");
    std::copy(idx.begin(), idx.end(), rows);
  });
}

size_t ces_selection_trace_size(const ces_selection* selection) {
  return selection ? selection->data.objective_trace.size() : 0;
}

ces_status ces_selection_trace(const ces_selection* selection, double* values,
                               size_t capacity) {
  return guarded([&] {
    require(selection, "selection");
    const auto& trace = selection->data.objective_trace;
    if (capacity < trace.size()) {
      throw cesample::Error(cesample::ErrorCode::kInvalidArgument,
                            "trace buffer too small");
    }
    if (!trace.empty()) require(values, "values");
    std::copy(trace.begin(), trace.end(), values);
  });
}

ces_status ces_estimate(const ces_dataset* dataset, const ces_selection* selection,
                        double* estimate, size_t* sample_size) {
  return guarded([&] {
    require(dataset, "dataset");
    require(selection, "selection");
    require(estimate, "estimate");
    const auto report = cesample::estimate_from_selection(dataset->data, selection->data);
    *estimate = report.estimate;
    if (sample_size) *sample_size = report.sample_size;
  });
}

void ces_experiment_config_init(ces_experiment_config* config) {
  if (config == nullptr) return;
  *config = ces_experiment_config{};
  config->repetitions = 50;
  config->threads = 1;
  ces_select_params_init(&config->params);
}

ces_status ces_evaluate(const ces_dataset* dataset, const ces_experiment_config* config,
                        ces_experiment** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(config, "config");
    require(out, "out");
    cesample::ExperimentConfig cfg;
    require(config->methods, "methods");
    cfg.methods.clear();
    for (size_t i = 0; i < config->method_count; ++i) {
      cfg.methods.push_back(to_method(config->methods[i]));
    }
    if (config->sizes) {
      cfg.sample_sizes.assign(config->sizes, config->sizes + config->size_count);
    }
    cfg.repetitions = config->repetitions;
    cfg.seed = config->seed;
    cfg.threads = config->threads;
    cfg.params = to_params(config->params);
    cfg.strat = to_strat(config->params);
    auto experiment = std::make_unique<ces_experiment>();
    experiment->data = cesample::run_experiment(dataset->data, cfg);
    for (const auto& e : experiment->data.efficiency) {
      experiment->labels.push_back(e.numerator + "/" + e.denominator);
    }
    *out = experiment.release();
  });
}

ces_status ces_experiment_write(const ces_experiment* experiment, const char* dir) {
  return guarded([&] {
    require(experiment, "experiment");
    require(dir, "dir");
    cesample::write_results(experiment->data, dir);
  });
}

double ces_experiment_true_accuracy(const ces_experiment* experiment) {
  return experiment ? experiment->data.true_accuracy : 0.0;
}

size_t ces_experiment_pair_count(const ces_experiment* experiment) {
  return experiment ? experiment->data.efficiency.size() : 0;
}

ces_status ces_experiment_pair(const ces_experiment* experiment, size_t index,
                               const char** label, double* average_e) {
  return guarded([&] {
    require(experiment, "experiment");
    if (index >= experiment->data.efficiency.size()) {
      throw cesample::Error(cesample::ErrorCode::kInvalidArgument,
                            "pair index out of range");
    }
    if (label) *label = experiment->labels[index].c_str();
    if (average_e) *average_e = experiment->data.efficiency[index].average;
  });
}

ces_status ces_experiment_mse(const ces_experiment* experiment, ces_method method,
                              size_t sample_size, double* mse) {
  return guarded([&] {
    require(experiment, "experiment");
    require(mse, "mse");
    const std::string name = cesample::method_name(to_method(method));
    for (const auto& row : experiment->data.aggregates) {
      if (row.method == name && row.sample_size == sample_size) {
        *mse = row.mse;
        return;
      }
    }
    throw cesample::Error(cesample::ErrorCode::kInvalidArgument,
                          "no aggregate for " + name + " at n=" +
                              std::to_string(sample_size));
  });
}

void ces_experiment_free(ces_experiment* experiment) { delete experiment; }

}  // extern "C"
