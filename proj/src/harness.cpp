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

#include "cesample/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include "cesample/error.hpp"
#include "cesample/rng.hpp"

namespace cesample {

namespace fs = std::filesystem;

std::vector<std::size_t> default_sample_sizes() {
  std::vector<std::size_t> sizes;
  for (std::size_t n = 35; n <= 180; n += 5) sizes.push_back(n);
  return sizes;
}

void ExperimentConfig::validate(const OperationalDataset& dataset) const {
  if (methods.empty()) throw Error(ErrorCode::kInvalidArgument, "no methods given");
  if (sample_sizes.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no sample sizes given");
  }
  if (repetitions < 1) {
    throw Error(ErrorCode::kInvalidArgument, "repetitions must be >= 1");
  }
  for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
    if (sample_sizes[i] == 0 || sample_sizes[i] > dataset.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "sample size " + std::to_string(sample_sizes[i]) +
                      " outside [1, " + std::to_string(dataset.size()) + "]");
    }
    if (i && sample_sizes[i] <= sample_sizes[i - 1]) {
      throw Error(ErrorCode::kInvalidArgument, "sample sizes must be ascending");
    }
  }
  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (methods[i] == methods[j]) {
        throw Error(ErrorCode::kInvalidArgument,
                    std::string("method listed twice: ") + method_name(methods[i]));
      }
    }
  }
  if (!dataset.correctness) {
    throw Error(ErrorCode::kMissingData, "evaluation needs correctness values");
  }
  const bool wants_css =
      std::find(methods.begin(), methods.end(), Method::kCss) != methods.end();
  if (wants_css) {
    if (!dataset.confidence) {
      throw Error(ErrorCode::kMissingData, "css needs confidence values");
    }
    strat.validate();
  }
}

std::uint64_t trial_seed(std::uint64_t master, Method method,
                         std::size_t sample_size, std::size_t repetition) {
  std::uint64_t s = derive_seed(master, static_cast<std::uint64_t>(method) + 1);
  s = derive_seed(s, sample_size);
  return derive_seed(s, repetition);
}

ExperimentResult run_experiment(const OperationalDataset& dataset,
                                const ExperimentConfig& config) {
  config.validate(dataset);
  ExperimentResult result;
  result.config = config;
  result.true_accuracy = dataset.true_accuracy();

  std::optional<CesContext> ces;
  if (std::find(config.methods.begin(), config.methods.end(), Method::kCes) !=
      config.methods.end()) {
    ces.emplace(dataset, config.params.sections);
    for (std::size_t n : config.sample_sizes) {
      SelectionParams p = config.params;
      p.budget = n;
      p.validate(dataset.size());
    }
  }

  const std::size_t per_method = config.sample_sizes.size() * config.repetitions;
  const std::size_t total = config.methods.size() * per_method;
  result.raw.resize(total);

  auto run_trial = [&](std::size_t task) {
    const std::size_t mi = task / per_method;
    const std::size_t si = (task % per_method) / config.repetitions;
    const std::size_t rep = task % config.repetitions;
    const Method method = config.methods[mi];
    const std::size_t n = config.sample_sizes[si];
    SelectionParams params = config.params;
    params.budget = n;
    params.seed = trial_seed(config.seed, method, n, rep);
    const SampleSelection selection =
        method == Method::kCes ? ces_select(*ces, params)
                               : select(method, dataset, params, config.strat);
    result.raw[task] = {method_name(method), n, rep,
                        estimate_from_selection(dataset, selection).estimate};
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(config.threads, total));
  if (workers == 1) {
    for (std::size_t t = 0; t < total; ++t) run_trial(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < total; t = next++) {
          try {
            run_trial(t);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = total;
          }
        }
      });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }

  summarize(result);
  return result;
}

void summarize(ExperimentResult& result) {
  const auto& config = result.config;
  result.aggregates.clear();
  result.efficiency.clear();

  // Series keyed by (method, size) in config order.
  std::vector<std::vector<TrialSeries>> series(config.methods.size());
  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    for (std::size_t n : config.sample_sizes) {
      TrialSeries s;
      s.method = method_name(config.methods[mi]);
      s.sample_size = n;
      s.true_accuracy = result.true_accuracy;
      series[mi].push_back(std::move(s));
    }
  }
  for (const auto& rec : result.raw) {
    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
      if (rec.method != method_name(config.methods[mi])) continue;
      const auto it = std::find(config.sample_sizes.begin(),
                                config.sample_sizes.end(), rec.sample_size);
      if (it == config.sample_sizes.end()) {
        throw Error(ErrorCode::kInvalidValue,
                    "raw record with unexpected sample size " +
                        std::to_string(rec.sample_size));
      }
      series[mi][static_cast<std::size_t>(it - config.sample_sizes.begin())]
          .estimates.push_back(rec.estimate);
    }
  }
  for (const auto& per_size : series) {
    for (const auto& s : per_size) {
      const double e = mse(s);
      result.aggregates.push_back(
          {s.method, s.sample_size, e, std::sqrt(e), mean_estimate(s)});
    }
  }

  if (config.methods.size() < 2) return;
  std::size_t base = 0;
  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    if (config.methods[mi] == Method::kSrs) base = mi;
  }
  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    if (mi == base) continue;
    EfficiencyReport report;
    report.numerator = method_name(config.methods[mi]);
    report.denominator = method_name(config.methods[base]);
    double sum = 0.0;
    std::size_t finite = 0;
    for (std::size_t si = 0; si < config.sample_sizes.size(); ++si) {
      double e = std::numeric_limits<double>::quiet_NaN();
      if (mse(series[base][si]) > 0.0) {
        e = relative_efficiency(series[mi][si], series[base][si]);
        sum += e;
        ++finite;
      }
      report.sample_sizes.push_back(config.sample_sizes[si]);
      report.e_values.push_back(e);
    }
    report.average = finite ? sum / static_cast<double>(finite)
                            : std::numeric_limits<double>::quiet_NaN();
    result.efficiency.push_back(std::move(report));
  }
}

void write_results(const ExperimentResult& result, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("raw.csv");
    out << "method,sample_size,repetition,estimate\n";
    for (const auto& r : result.raw) {
      out << r.method << ',' << r.sample_size << ',' << r.repetition << ','
          << format_double(r.estimate) << '\n';
    }
    if (!out) throw Error(ErrorCode::kIo, "write failed for raw.csv");
  }
  {
    auto out = open("agg.csv");
    out << "method,sample_size,mse,stddev,mean_estimate\n";
    for (const auto& a : result.aggregates) {
      out << a.method << ',' << a.sample_size << ',' << format_double(a.mse) << ','
          << format_double(a.stddev) << ',' << format_double(a.mean_estimate) << '\n';
    }
    if (!result.efficiency.empty()) {
      out << "method_pair,sample_size,e_value\n";
      for (const auto& e : result.efficiency) {
        const std::string pair = e.numerator + "/" + e.denominator;
        for (std::size_t i = 0; i < e.e_values.size(); ++i) {
          out << pair << ',' << e.sample_sizes[i] << ','
              << format_double(e.e_values[i]) << '\n';
        }
        out << pair << ",average," << format_double(e.average) << '\n';
      }
    }
    if (!out) throw Error(ErrorCode::kIo, "write failed for agg.csv");
  }
}

std::vector<RawRecord> read_raw_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<RawRecord> records;
  std::string line;
  std::getline(in, line);
  if (line != "method,sample_size,repetition,estimate") {
    throw Error(ErrorCode::kParse, path.string() + ": unexpected header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    RawRecord rec;
    std::string_view rest(line);
    std::string_view fields[4];
    for (int f = 0; f < 4; ++f) {
      const auto comma = rest.find(',');
      if ((comma == std::string_view::npos) != (f == 3)) {
        throw Error(ErrorCode::kParse, path.string() + ": bad row '" + line + "'");
      }
      fields[f] = rest.substr(0, comma);
      if (f < 3) rest.remove_prefix(comma + 1);
    }
    rec.method = std::string(fields[0]);
    auto parse = [&](std::string_view t, auto& out) {
      const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
      if (ec != std::errc() || ptr != t.data() + t.size()) {
        throw Error(ErrorCode::kParse, path.string() + ": bad field '" + std::string(t) + "'");
      }
    };
    parse(fields[1], rec.sample_size);
    parse(fields[2], rec.repetition);
    parse(fields[3], rec.estimate);
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace cesample
