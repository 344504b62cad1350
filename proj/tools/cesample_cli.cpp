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

// Command-line front end. Talks to the library only through cesample.h.
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cesample/cesample.h"

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a library call fails; carries the library's message.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(ces_status status) {
  if (status != CES_OK) {
    throw DataError(std::string(ces_status_name(status)) + ": " + ces_last_error());
  }
}

// Owning wrappers so early exits release handles.
template <typename T, void (*Free)(T*)>
class Handle {
 public:
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr_); }
  T** out() { return &ptr_; }
  T* get() const { return ptr_; }

 private:
  T* ptr_ = nullptr;
};

using Dataset = Handle<ces_dataset, ces_dataset_free>;
using Selection = Handle<ces_selection, ces_selection_free>;
using Experiment = Handle<ces_experiment, ces_experiment_free>;

std::vector<double> parse_fractions(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": not a number list: '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError(std::string(flag) + " is empty");
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  unsigned long long a = 0, b = 0, step = 0;
  char c1 = 0, c2 = 0;
  std::stringstream ss(text);
  if (!(ss >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || step == 0 ||
      a > b || !(ss >> std::ws).eof()) {
    throw UsageError("--sizes must look like FIRST:LAST:STEP, got '" + text + "'");
  }
  std::vector<std::size_t> sizes;
  for (unsigned long long n = a; n <= b; n += step) sizes.push_back(n);
  return sizes;
}

ces_method parse_method(const std::string& name) {
  if (name == "srs") return CES_METHOD_SRS;
  if (name == "css") return CES_METHOD_CSS;
  if (name == "ces") return CES_METHOD_CES;
  throw UsageError("unknown method '" + name + "'");
}

const char* method_label(ces_method m) {
  switch (m) {
    case CES_METHOD_SRS: return "srs";
    case CES_METHOD_CSS: return "css";
    case CES_METHOD_CES: return "ces";
  }
  return "?";
}

// Flags shared by select and evaluate.
struct SamplerFlags {
  std::size_t k = 20;
  std::size_t init = 30;
  std::size_t group = 5;
  std::size_t candidates = 300;
  std::string objective = "auto";
  double alpha = 0.0;  // set from the library defaults
  std::string strata = "0.8,0.1,0.1";
  std::string alloc = "0.2,0.4,0.4";
  bool proportional = false;

  // Backing storage for the pointers in ces_select_params.
  std::vector<double> strata_values;
  std::vector<double> alloc_values;

  void add_to(CLI::App* app) {
    ces_select_params defaults;
    ces_select_params_init(&defaults);
    alpha = defaults.alpha;
    app->add_option("--k", k, "Sections per neuron")->capture_default_str();
    app->add_option("--init", init, "Initial random sample size p")->capture_default_str();
    app->add_option("--group", group, "Group size q")->capture_default_str();
    app->add_option("--candidates", candidates, "Candidate groups per step")
        ->capture_default_str();
    app->add_option("--objective", objective, "auto|ce|kl")
        ->check(CLI::IsMember({"auto", "ce", "kl"}))
        ->capture_default_str();
    app->add_option("--alpha", alpha, "Cross-entropy smoothing pseudo-count")
        ->capture_default_str();
    app->add_option("--strata", strata, "CSS stratum fractions, highest confidence first")
        ->capture_default_str();
    app->add_option("--alloc", alloc, "CSS budget allocation per stratum")
        ->capture_default_str();
    app->add_flag("--proportional", proportional,
                  "CSS: allocate the budget proportionally to stratum size");
  }

  ces_select_params params() {
    ces_select_params p;
    ces_select_params_init(&p);
    p.sections = k;
    p.init = init;
    p.group = group;
    p.candidates = candidates;
    p.alpha = alpha;
    p.objective = objective == "ce"   ? CES_OBJECTIVE_CROSS_ENTROPY
                  : objective == "kl" ? CES_OBJECTIVE_KL
                                      : CES_OBJECTIVE_AUTO;
    strata_values = parse_fractions(strata, "--strata");
    alloc_values = parse_fractions(alloc, "--alloc");
    p.strata = strata_values.data();
    p.strata_len = strata_values.size();
    p.alloc = alloc_values.data();
    p.alloc_len = alloc_values.size();
    p.proportional = proportional ? 1 : 0;
    return p;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operational accuracy estimation by distribution-matched test selection"};
  app.require_subcommand(1);

  // select
  auto* select = app.add_subcommand("select", "Choose rows to label");
  std::string select_method;
  std::string select_manifest;
  std::size_t budget = 0;
  std::uint64_t select_seed = 0;
  std::string select_out;
  SamplerFlags select_flags;
  select->add_option("--method", select_method, "srs|css|ces")
      ->required()
      ->check(CLI::IsMember({"srs", "css", "ces"}));
  select->add_option("--manifest", select_manifest, "Dataset manifest")->required();
  select->add_option("--budget", budget, "Number of rows to select")->required();
  select->add_option("--seed", select_seed, "RNG seed")->required();
  select->add_option("--out", select_out, "Selection file to write")->required();
  select_flags.add_to(select);

  // estimate
  auto* estimate = app.add_subcommand("estimate", "Estimate accuracy from a labeled selection");
  std::string estimate_manifest;
  std::string estimate_selection;
  estimate->add_option("--manifest", estimate_manifest, "Dataset manifest")->required();
  estimate->add_option("--selection", estimate_selection, "Selection file")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Repeated-trial MSE and E-value sweep");
  std::string eval_manifest;
  std::string eval_methods = "srs,ces";
  std::string eval_sizes = "35:180:5";
  std::size_t reps = 50;
  std::uint64_t eval_seed = 0;
  std::size_t threads = 1;
  std::string eval_out;
  SamplerFlags eval_flags;
  evaluate->add_option("--manifest", eval_manifest, "Dataset manifest")->required();
  evaluate->add_option("--methods", eval_methods, "Comma-separated methods")
      ->capture_default_str();
  evaluate->add_option("--sizes", eval_sizes, "FIRST:LAST:STEP")->capture_default_str();
  evaluate->add_option("--reps", reps, "Repetitions per size")->capture_default_str();
  evaluate->add_option("--seed", eval_seed, "Master seed")->required();
  evaluate->add_option("--threads", threads, "Worker threads")->capture_default_str();
  evaluate->add_option("--out", eval_out, "Output directory")->required();
  eval_flags.add_to(evaluate);

  // gen-synth
  auto* gen = app.add_subcommand("gen-synth", "Generate a synthetic clustered dataset");
  std::string spec_path;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  std::string gen_format = "binary";
  bool invert = false;
  gen->add_option("--spec", spec_path, "Synthetic spec file")->required();
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "Overrides the spec's seed");
  gen->add_option("--out", gen_out, "Output prefix")->required();
  gen->add_option("--format", gen_format, "binary|text")
      ->check(CLI::IsMember({"binary", "text"}))
      ->capture_default_str();
  gen->add_flag("--invert-confidence", invert, "Make confidence anti-correlated with accuracy");

  // infer
  auto* infer = app.add_subcommand("infer", "Run a dense model and capture its last hidden layer");
  std::string model_path;
  std::string inputs_path;
  std::string labels_path;
  std::string infer_out;
  std::string infer_format = "binary";
  infer->add_option("--model", model_path, "Model file")->required();
  infer->add_option("--inputs", inputs_path, "Input matrix (CSV or CESA binary)")->required();
  infer->add_option("--labels", labels_path, "True labels, one integer per line");
  infer->add_option("--out", infer_out, "Output prefix")->required();
  infer->add_option("--format", infer_format, "binary|text")
      ->check(CLI::IsMember({"binary", "text"}))
      ->capture_default_str();

  // validate
  auto* validate = app.add_subcommand("validate", "Check that a dataset loads");
  std::string validate_manifest;
  validate->add_option("--manifest", validate_manifest, "Dataset manifest")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*select) {
      const ces_method method = parse_method(select_method);
      ces_select_params params = select_flags.params();
      params.budget = budget;
      params.seed = select_seed;
      Dataset dataset;
      check(ces_dataset_load(select_manifest.c_str(), dataset.out()));
      if (method == CES_METHOD_CSS && !ces_dataset_has_confidence(dataset.get())) {
        throw DataError("missing data: manifest " + select_manifest +
                        " names no confidence file; css needs confidence values");
      }
      Selection selection;
      check(ces_select(dataset.get(), method, &params, selection.out()));
      check(ces_selection_write(selection.get(), dataset.get(), select_out.c_str()));
      std::printf("selected %zu rows with %s -> %s\n", ces_selection_size(selection.get()),
                  method_label(method), select_out.c_str());
    } else if (*estimate) {
      Dataset dataset;
      check(ces_dataset_load(estimate_manifest.c_str(), dataset.out()));
      Selection selection;
      check(ces_selection_read(estimate_selection.c_str(), dataset.get(), selection.out()));
      double value = 0.0;
      std::size_t n = 0;
      check(ces_estimate(dataset.get(), selection.get(), &value, &n));
      std::printf("estimate=%.6f\nn=%zu\nmethod=%s\n", value, n,
                  method_label(ces_selection_method(selection.get())));
    } else if (*evaluate) {
      std::vector<ces_method> methods;
      {
        std::stringstream ss(eval_methods);
        std::string item;
        while (std::getline(ss, item, ',')) methods.push_back(parse_method(item));
      }
      if (methods.empty()) throw UsageError("--methods is empty");
      const auto sizes = parse_sizes(eval_sizes);
      ces_experiment_config config;
      ces_experiment_config_init(&config);
      config.methods = methods.data();
      config.method_count = methods.size();
      config.sizes = sizes.data();
      config.size_count = sizes.size();
      config.repetitions = reps;
      config.seed = eval_seed;
      config.threads = threads;
      config.params = eval_flags.params();
      Dataset dataset;
      check(ces_dataset_load(eval_manifest.c_str(), dataset.out()));
      Experiment experiment;
      check(ces_evaluate(dataset.get(), &config, experiment.out()));
      check(ces_experiment_write(experiment.get(), eval_out.c_str()));
      std::printf("true_accuracy=%.6f\n", ces_experiment_true_accuracy(experiment.get()));
      for (std::size_t i = 0; i < ces_experiment_pair_count(experiment.get()); ++i) {
        const char* label = nullptr;
        double e = 0.0;
        check(ces_experiment_pair(experiment.get(), i, &label, &e));
        std::printf("average_e[%s]=%.6f\n", label, e);
      }
    } else if (*gen) {
      Dataset dataset;
      check(ces_synth_generate(spec_path.c_str(), gen_seed_opt->count() ? &gen_seed : nullptr,
                               invert ? 1 : 0, dataset.out()));
      check(ces_dataset_save(dataset.get(), gen_out.c_str(), gen_format.c_str()));
      std::printf("wrote %s.manifest\n", gen_out.c_str());
    } else if (*infer) {
      Dataset dataset;
      check(ces_infer(model_path.c_str(), inputs_path.c_str(),
                      labels_path.empty() ? nullptr : labels_path.c_str(), dataset.out()));
      check(ces_dataset_save(dataset.get(), infer_out.c_str(), infer_format.c_str()));
      std::printf("wrote %s.manifest\n", infer_out.c_str());
    } else if (*validate) {
      Dataset dataset;
      check(ces_dataset_load(validate_manifest.c_str(), dataset.out()));
      std::size_t rows = 0, cols = 0;
      check(ces_dataset_shape(dataset.get(), &rows, &cols));
      std::printf("ok n=%zu m=%zu confidence=%s correctness=%s\n", rows, cols,
                  ces_dataset_has_confidence(dataset.get()) ? "yes" : "no",
                  ces_dataset_has_correctness(dataset.get()) ? "yes" : "no");
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsageError;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kDataError;
  }
  return 0;
}
