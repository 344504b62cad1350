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

// Helpers shared by the unit suites and the acceptance runner.

#ifndef CESAMPLE_TESTS_SUPPORT_HPP_
#define CESAMPLE_TESTS_SUPPORT_HPP_

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <functional>
#include <limits>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "cesample/binning.hpp"
#include "cesample/objective.hpp"
#include "cesample/samplers.hpp"
#include "cesample/scenario.hpp"

namespace cesample::testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("cesample-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

// Four well-separated clusters in 8 dimensions. Centers are permutations of
// {0, 3, 6, 9}, so every neuron separates every pair of clusters.
inline SynthSpec four_cluster_spec(std::size_t n, std::uint64_t seed,
                                   double spread = 0.1) {
  SynthSpec spec;
  spec.n = n;
  spec.m = 8;
  spec.seed = seed;
  spec.clusters = {
      {0.4, {0, 3, 6, 9, 0, 3, 6, 9}, spread, 0.95},
      {0.3, {3, 6, 9, 0, 9, 0, 3, 6}, spread, 0.80},
      {0.2, {6, 9, 0, 3, 6, 9, 0, 3}, spread, 0.60},
      {0.1, {9, 0, 3, 6, 3, 6, 9, 0}, spread, 0.30},
  };
  return spec;
}

// A model that is right on its confident bulk and unsure elsewhere; the
// setting where confidence-based strata pay off.
inline SynthSpec well_fitted_spec(std::size_t n, std::uint64_t seed,
                                  bool inverted) {
  SynthSpec spec;
  spec.n = n;
  spec.m = 8;
  spec.seed = seed;
  spec.invert_confidence = inverted;
  spec.clusters = {
      {0.8, {0, 3, 6, 9, 0, 3, 6, 9}, 0.1, 0.99},
      {0.1, {3, 6, 9, 0, 9, 0, 3, 6}, 0.1, 0.70},
      {0.1, {6, 9, 0, 3, 6, 9, 0, 3}, 0.1, 0.30},
  };
  return spec;
}

// Arbitrary-precision references working straight from integer tallies.
// counts are row-major m x K; alpha is taken exactly as given.
using Big = boost::multiprecision::cpp_bin_float_50;

inline Big big_total(const std::vector<std::uint64_t>& counts, std::size_t k) {
  Big t = 0;
  for (std::size_t j = 0; j < k; ++j) t += Big(counts[j]);
  return t;
}

inline double oracle_cross_entropy(const std::vector<std::uint64_t>& s,
                                   const std::vector<std::uint64_t>& t,
                                   std::size_t m, std::size_t k, double alpha) {
  const Big s_total = big_total(s, k);
  const Big t_total = big_total(t, k);
  const Big a(alpha);
  Big sum = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t c = i * k + j;
      if (s[c] == 0) continue;
      const Big ps = Big(s[c]) / s_total;
      const Big pt = (Big(t[c]) + a) / (t_total + a * Big(k));
      sum -= ps * boost::multiprecision::log(pt);
    }
  }
  return static_cast<double>(sum / Big(m));
}

inline double oracle_kl(const std::vector<std::uint64_t>& s,
                        const std::vector<std::uint64_t>& t, std::size_t m,
                        std::size_t k) {
  const Big s_total = big_total(s, k);
  const Big t_total = big_total(t, k);
  Big sum = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t c = i * k + j;
      if (t[c] == 0) continue;
      const Big ps = Big(s[c]) / s_total;
      const Big pt = Big(t[c]) / t_total;
      sum += pt * boost::multiprecision::log(pt / ps);
    }
  }
  return static_cast<double>(sum / Big(m));
}

// Replays a CES selection step by step and scores every possible group of
// each step with the batch objective (no incremental bookkeeping).
struct GreedyReplay {
  std::size_t steps = 0;
  std::size_t optimal = 0;        // chosen group attains the minimum
  std::size_t first_optimal = 0;  // ...and is the first minimiser in row order
};

inline GreedyReplay replay_greedy(const OperationalDataset& dataset,
                                  const SampleSelection& selection,
                                  const SelectionParams& params,
                                  double tolerance = 1e-12) {
  const SectionTable table(dataset, fit_binning(dataset, params.sections));
  const MarginalHistogram ps = marginals(table);
  const ObjectiveKind kind = resolve_objective(params, dataset.size());
  const auto& idx = selection.indices;

  GreedyReplay out;
  std::vector<std::size_t> current(idx.begin(), idx.begin() + params.init);
  std::size_t pos = params.init;
  while (pos < idx.size()) {
    const std::size_t g = std::min(params.group, idx.size() - pos);
    std::vector<std::size_t> chosen(idx.begin() + pos, idx.begin() + pos + g);
    std::sort(chosen.begin(), chosen.end());

    std::vector<std::size_t> pool;
    for (std::size_t r = 0; r < dataset.size(); ++r)
      if (std::find(current.begin(), current.end(), r) == current.end())
        pool.push_back(r);

    auto score = [&](const std::vector<std::size_t>& group) {
      std::vector<std::size_t> rows = current;
      rows.insert(rows.end(), group.begin(), group.end());
      return objective_value(kind, ps, marginals(table, rows));
    };
    std::vector<std::vector<std::size_t>> groups;
    std::vector<std::size_t> pick;
    std::function<void(std::size_t)> walk = [&](std::size_t from) {
      if (pick.size() == g) {
        groups.push_back(pick);
        return;
      }
      for (std::size_t i = from; i < pool.size(); ++i) {
        pick.push_back(pool[i]);
        walk(i + 1);
        pick.pop_back();
      }
    };
    walk(0);

    double best = std::numeric_limits<double>::infinity();
    std::vector<double> values;
    for (const auto& group : groups) {
      values.push_back(score(group));
      best = std::min(best, values.back());
    }
    std::size_t first = 0;
    while (values[first] > best + tolerance) ++first;

    ++out.steps;
    if (score(chosen) <= best + tolerance) ++out.optimal;
    if (groups[first] == chosen) ++out.first_optimal;
    current.insert(current.end(), chosen.begin(), chosen.end());
    pos += g;
  }
  return out;
}

}  // namespace cesample::testing

#endif  // CESAMPLE_TESTS_SUPPORT_HPP_
