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

#include "cesample/samplers.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "cesample/error.hpp"
#include "cesample/rng.hpp"

namespace cesample {

namespace {

constexpr std::uint64_t kInitStream = 0;
constexpr double kTieTolerance = 1e-12;

void check_budget(std::size_t budget, std::size_t population) {
  if (budget == 0) {
    throw Error(ErrorCode::kInvalidArgument, "budget must be positive");
  }
  if (budget > population) {
    throw Error(ErrorCode::kInvalidArgument,
                "budget " + std::to_string(budget) + " exceeds population " +
                    std::to_string(population));
  }
}

void check_fractions(const std::vector<double>& fractions, const char* what) {
  if (fractions.empty()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " is empty");
  }
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(what) + " fractions must lie in [0,1]");
    }
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " fractions must sum to 1");
  }
}

std::size_t round_to_size(double x) {
  return x <= 0.0 ? 0 : static_cast<std::size_t>(std::llround(x));
}

// Saturating binomial coefficient; returns `cap` + 1 once it exceeds `cap`.
std::uint64_t choose_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  long double acc = 1.0L;
  for (std::uint64_t i = 1; i <= k; ++i) {
    acc = acc * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    if (acc > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<std::uint64_t>(std::llround(acc));
}

// Advances `combo` (ascending positions in [0, n)) to the next combination
// in lexicographic order; false after the last one.
bool next_combination(std::vector<std::size_t>& combo, std::size_t n) {
  const std::size_t k = combo.size();
  for (std::size_t i = k; i-- > 0;) {
    if (combo[i] < n - k + i) {
      ++combo[i];
      for (std::size_t j = i + 1; j < k; ++j) combo[j] = combo[j - 1] + 1;
      return true;
    }
  }
  return false;
}

std::string join(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(values[i]);
  }
  return out;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out.push_back(',');
    out += format_double(values[i]);
  }
  return out;
}

std::vector<std::size_t> split_sizes(const std::string& text,
                                     const std::string& key) {
  std::vector<std::size_t> out;
  if (text.empty()) return out;
  std::string_view rest(text);
  for (;;) {
    const auto comma = rest.find(',');
    const auto token = rest.substr(0, comma);
    std::size_t v = 0;
    const auto [ptr, ec] =
        std::from_chars(token.data(), token.data() + token.size(), v);
    if (token.empty() || ec != std::errc() ||
        ptr != token.data() + token.size()) {
      throw Error(ErrorCode::kParse, "selection metadata '" + key +
                                         "' is not a list of integers");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

const char* method_name(Method method) {
  switch (method) {
    case Method::kSrs: return "srs";
    case Method::kCss: return "css";
    case Method::kCes: return "ces";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "srs") return Method::kSrs;
  if (name == "css") return Method::kCss;
  if (name == "ces") return Method::kCes;
  throw Error(ErrorCode::kInvalidArgument, "unknown method '" + name + "'");
}

ObjectiveChoice parse_objective_choice(const std::string& name) {
  if (name == "auto") return ObjectiveChoice::kAuto;
  if (name == "ce") return ObjectiveChoice::kCrossEntropy;
  if (name == "kl") return ObjectiveChoice::kKl;
  throw Error(ErrorCode::kInvalidArgument, "unknown objective '" + name + "'");
}

void SelectionParams::validate(std::size_t population) const {
  check_budget(budget, population);
  if (init < 1 || init > budget) {
    throw Error(ErrorCode::kInvalidArgument,
                "initial sample size must satisfy 1 <= p <= n (p=" +
                    std::to_string(init) + ", n=" + std::to_string(budget) + ")");
  }
  if (group < 1) throw Error(ErrorCode::kInvalidArgument, "group size must be >= 1");
  if (candidates < 1) {
    throw Error(ErrorCode::kInvalidArgument, "candidate count must be >= 1");
  }
  if (sections < 1) {
    throw Error(ErrorCode::kInvalidArgument, "section count must be >= 1");
  }
}

ObjectiveKind resolve_objective(const SelectionParams& params,
                                std::size_t population) {
  ObjectiveKind kind;
  switch (params.objective) {
    case ObjectiveChoice::kCrossEntropy:
      kind.tag = ObjectiveTag::kAvgCrossEntropy;
      break;
    case ObjectiveChoice::kKl:
      kind.tag = ObjectiveTag::kKlTFromS;
      break;
    case ObjectiveChoice::kAuto:
      kind.tag = population < params.kl_threshold ? ObjectiveTag::kKlTFromS
                                                  : ObjectiveTag::kAvgCrossEntropy;
      break;
  }
  kind.alpha = params.alpha;
  kind.log_base = params.log_base;
  kind.offset = params.offset;
  kind.validate();
  return kind;
}

void StratificationSpec::validate() const {
  check_fractions(strata, "strata");
  if (!proportional) {
    check_fractions(allocation, "allocation");
    if (allocation.size() != strata.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "strata and allocation differ in length");
    }
  }
}

SampleSelection srs_select(const OperationalDataset& dataset, std::size_t budget,
                           std::uint64_t seed) {
  check_budget(budget, dataset.size());
  Rng rng(derive_seed(seed, kInitStream));
  SampleSelection out;
  out.method = Method::kSrs;
  out.population = dataset.size();
  out.indices = rng.sample_without_replacement(dataset.size(), budget);
  out.metadata = {{"budget", std::to_string(budget)},
                  {"seed", std::to_string(seed)}};
  return out;
}

std::vector<std::size_t> stratum_sizes(std::size_t population,
                                       const std::vector<double>& fractions) {
  std::vector<std::size_t> sizes(fractions.size(), 0);
  std::size_t used = 0;
  for (std::size_t j = 0; j + 1 < fractions.size(); ++j) {
    sizes[j] = std::min(round_to_size(fractions[j] * population), population - used);
    used += sizes[j];
  }
  sizes.back() = population - used;
  return sizes;
}

std::vector<std::size_t> allocate_budget(std::size_t budget,
                                         const std::vector<std::size_t>& sizes,
                                         const std::vector<double>& allocation) {
  const std::size_t k = sizes.size();
  if (allocation.size() != k) {
    throw Error(ErrorCode::kInvalidArgument,
                "allocation and strata differ in length");
  }
  const std::size_t capacity = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  check_budget(budget, capacity);

  std::vector<std::size_t> draws(k, 0);
  std::size_t used = 0;
  for (std::size_t j = 0; j + 1 < k; ++j) {
    draws[j] = round_to_size(allocation[j] * budget);
    used += draws[j];
  }
  // Rounding up can overshoot with many strata; take the surplus back from
  // the later strata first.
  for (std::size_t j = k - 1; used > budget && j-- > 0;) {
    const std::size_t give = std::min(draws[j], used - budget);
    draws[j] -= give;
    used -= give;
  }
  draws.back() = budget - used;

  for (;;) {
    std::size_t excess = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if (draws[j] > sizes[j]) {
        excess += draws[j] - sizes[j];
        draws[j] = sizes[j];
      }
    }
    if (excess == 0) break;

    std::vector<double> weight(k, 0.0);
    double total_weight = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (draws[j] < sizes[j]) {
        weight[j] = allocation[j];
        total_weight += weight[j];
      }
    }
    if (total_weight == 0.0) {
      // No open stratum has allocation mass; spread by spare capacity.
      for (std::size_t j = 0; j < k; ++j) {
        weight[j] = static_cast<double>(sizes[j] - draws[j]);
        total_weight += weight[j];
      }
    }
    // Largest remainder, ties to the lower stratum index.
    std::vector<std::size_t> share(k, 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t given = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if (weight[j] == 0.0) continue;
      const double exact = static_cast<double>(excess) * weight[j] / total_weight;
      share[j] = static_cast<std::size_t>(std::floor(exact));
      given += share[j];
      remainders.emplace_back(exact - std::floor(exact), j);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; given < excess; r = (r + 1) % remainders.size()) {
      ++share[remainders[r].second];
      ++given;
    }
    for (std::size_t j = 0; j < k; ++j) draws[j] += share[j];
  }
  return draws;
}

SampleSelection css_select(const OperationalDataset& dataset, std::size_t budget,
                           std::uint64_t seed, const StratificationSpec& strat) {
  strat.validate();
  if (!dataset.confidence) {
    throw Error(ErrorCode::kMissingData,
                "confidence-based stratified sampling needs confidence values");
  }
  const std::size_t n = dataset.size();
  check_budget(budget, n);
  const auto& conf = *dataset.confidence;

  std::vector<std::size_t> ranked(n);
  std::iota(ranked.begin(), ranked.end(), std::size_t{0});
  std::sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
    if (conf[a] != conf[b]) return conf[a] > conf[b];
    return dataset.ids[a] < dataset.ids[b];
  });

  const auto sizes = stratum_sizes(n, strat.strata);
  std::vector<double> allocation = strat.allocation;
  if (strat.proportional) {
    allocation.resize(sizes.size());
    for (std::size_t j = 0; j < sizes.size(); ++j) {
      allocation[j] = static_cast<double>(sizes[j]) / static_cast<double>(n);
    }
  }
  const auto draws = allocate_budget(budget, sizes, allocation);

  SampleSelection out;
  out.method = Method::kCss;
  out.population = n;
  out.stratum_sizes = sizes;
  out.stratum_counts = draws;
  std::size_t begin = 0;
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    Rng rng(derive_seed(seed, j + 1));
    for (std::size_t pos : rng.sample_without_replacement(sizes[j], draws[j])) {
      out.indices.push_back(ranked[begin + pos]);
    }
    begin += sizes[j];
  }
  out.metadata = {{"budget", std::to_string(budget)},
                  {"seed", std::to_string(seed)},
                  {"strata", join(strat.strata)},
                  {"alloc", strat.proportional ? std::string("proportional")
                                               : join(strat.allocation)}};
  return out;
}

CesContext::CesContext(const OperationalDataset& dataset, std::size_t sections)
    : binning(fit_binning(dataset, sections)),
      table(dataset, binning),
      population(marginals(table)) {}

SampleSelection ces_select(const OperationalDataset& dataset,
                           const SelectionParams& params) {
  params.validate(dataset.size());
  return ces_select(CesContext(dataset, params.sections), params);
}

SampleSelection ces_select(const CesContext& context,
                           const SelectionParams& params) {
  const SectionTable& table = context.table;
  const std::size_t n = table.rows();
  params.validate(n);
  if (table.sections() != params.sections) {
    throw Error(ErrorCode::kInvalidArgument,
                "context was built for a different section count");
  }
  const ObjectiveKind kind = resolve_objective(params, n);

  SampleSelection out;
  out.method = Method::kCes;
  out.population = n;

  Rng init_rng(derive_seed(params.seed, kInitStream));
  out.indices = init_rng.sample_without_replacement(n, params.init);

  // Rows outside T; removal swaps with the back so the order stays a pure
  // function of the draws.
  std::vector<std::size_t> remaining;
  std::vector<std::size_t> slot(n, SIZE_MAX);
  {
    std::vector<bool> taken(n, false);
    for (std::size_t r : out.indices) taken[r] = true;
    remaining.reserve(n - params.init);
    for (std::size_t r = 0; r < n; ++r) {
      if (!taken[r]) {
        slot[r] = remaining.size();
        remaining.push_back(r);
      }
    }
  }
  auto remove_row = [&](std::size_t r) {
    const std::size_t at = slot[r];
    const std::size_t last = remaining.back();
    remaining[at] = last;
    slot[last] = at;
    remaining.pop_back();
    slot[r] = SIZE_MAX;
  };

  // Candidates are scored in nats with no offset; the reporting transform is
  // monotone, so it only touches the trace.
  ObjectiveKind scoring = kind;
  scoring.log_base = std::numbers::e;
  scoring.offset = 0.0;
  const double to_report = 1.0 / std::log(kind.log_base);
  IncrementalObjective objective(context.population, scoring);
  objective.add(table, out.indices);

  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> best;
  for (std::uint64_t step = 1; out.indices.size() < params.budget; ++step) {
    const std::size_t g = std::min(params.group, params.budget - out.indices.size());
    const std::size_t pool = remaining.size();
    groups.clear();
    if (choose_capped(pool, g, params.candidates) <= params.candidates) {
      // Fewer distinct groups exist than would be drawn: score all of them,
      // in lexicographic order of row index.
      std::vector<std::size_t> sorted = remaining;
      std::sort(sorted.begin(), sorted.end());
      std::vector<std::size_t> combo(g);
      std::iota(combo.begin(), combo.end(), std::size_t{0});
      do {
        std::vector<std::size_t> rows(g);
        for (std::size_t i = 0; i < g; ++i) rows[i] = sorted[combo[i]];
        groups.push_back(std::move(rows));
      } while (next_combination(combo, pool));
    } else {
      Rng rng(derive_seed(params.seed, step));
      groups.reserve(params.candidates);
      for (std::size_t c = 0; c < params.candidates; ++c) {
        std::vector<std::size_t> rows;
        rows.reserve(g);
        for (std::size_t pos : rng.sample_without_replacement(pool, g)) {
          rows.push_back(remaining[pos]);
        }
        groups.push_back(std::move(rows));
      }
    }

    std::size_t best_index = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < groups.size(); ++c) {
      const double v = objective.value_with(table, groups[c]);
      // Ties go to the earliest group. Values within kTieTolerance count as
      // ties, so summation-order rounding cannot reorder equal objectives.
      if (c == 0 ||
          v < best_value - kTieTolerance * std::max(1.0, std::abs(best_value))) {
        best_value = v;
        best_index = c;
      }
    }
    best = groups[best_index];
    objective.add(table, best);
    for (std::size_t r : best) {
      remove_row(r);
      out.indices.push_back(r);
    }
    out.objective_trace.push_back(objective.value() * to_report + kind.offset);
  }

  out.metadata = {{"budget", std::to_string(params.budget)},
                  {"seed", std::to_string(params.seed)},
                  {"k", std::to_string(params.sections)},
                  {"init", std::to_string(params.init)},
                  {"group", std::to_string(params.group)},
                  {"candidates", std::to_string(params.candidates)},
                  {"objective", objective_name(kind.tag)},
                  {"alpha", format_double(params.alpha)}};
  return out;
}

SampleSelection select(Method method, const OperationalDataset& dataset,
                       const SelectionParams& params,
                       const StratificationSpec& strat) {
  switch (method) {
    case Method::kSrs: return srs_select(dataset, params.budget, params.seed);
    case Method::kCss: return css_select(dataset, params.budget, params.seed, strat);
    case Method::kCes: return ces_select(dataset, params);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown method");
}

EstimateReport estimate_from_selection(const OperationalDataset& dataset,
                                       const SampleSelection& selection) {
  if (!dataset.correctness) {
    throw Error(ErrorCode::kMissingData,
                "estimation needs correctness values for the selected rows");
  }
  if (selection.indices.empty()) {
    throw Error(ErrorCode::kEmptySubset, "selection is empty");
  }
  const auto& h = *dataset.correctness;
  for (std::size_t r : selection.indices) {
    if (r >= dataset.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "selected row " + std::to_string(r) + " is out of range");
    }
  }
  EstimateReport report;
  report.method = selection.method;
  report.sample_size = selection.indices.size();

  if (selection.method != Method::kCss) {
    std::size_t hits = 0;
    for (std::size_t r : selection.indices) hits += h[r];
    report.estimate = static_cast<double>(hits) /
                      static_cast<double>(selection.indices.size());
    return report;
  }

  const auto& sizes = selection.stratum_sizes;
  const auto& counts = selection.stratum_counts;
  if (sizes.empty() || sizes.size() != counts.size() ||
      std::accumulate(counts.begin(), counts.end(), std::size_t{0}) !=
          selection.indices.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "stratified selection lacks consistent stratum sizes/counts");
  }
  const double population =
      static_cast<double>(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}));
  // Strata that received no draws are left out and the remaining weights
  // renormalized.
  double weighted = 0.0;
  double covered = 0.0;
  std::size_t begin = 0;
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    if (counts[j] > 0) {
      std::size_t hits = 0;
      for (std::size_t i = begin; i < begin + counts[j]; ++i) {
        hits += h[selection.indices[i]];
      }
      const double weight = static_cast<double>(sizes[j]) / population;
      weighted += weight * static_cast<double>(hits) / static_cast<double>(counts[j]);
      covered += weight;
    }
    begin += counts[j];
  }
  report.estimate = covered > 0.0 ? weighted / covered : 0.0;
  return report;
}

void write_selection(const SampleSelection& selection,
                     const OperationalDataset& dataset,
                     const std::filesystem::path& path) {
  std::string out;
  out += std::string("# method=") + method_name(selection.method) + "\n";
  out += "# population=" + std::to_string(selection.population) + "\n";
  out += "# n=" + std::to_string(selection.indices.size()) + "\n";
  for (const auto& [key, value] : selection.metadata) {
    out += "# " + key + "=" + value + "\n";
  }
  if (selection.method == Method::kCss) {
    out += "# stratum_sizes=" + join(selection.stratum_sizes) + "\n";
    out += "# stratum_counts=" + join(selection.stratum_counts) + "\n";
  }
  if (selection.method == Method::kCes) {
    out += "# objective_trace=" + join(selection.objective_trace) + "\n";
  }
  for (std::size_t r : selection.indices) {
    out += std::to_string(dataset.ids.at(r)) + "\n";
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  file << out;
  if (!file) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

SampleSelection read_selection(const std::filesystem::path& path,
                               const OperationalDataset& dataset) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open selection " + path.string());
  std::unordered_map<std::uint64_t, std::size_t> row_of;
  row_of.reserve(dataset.size());
  for (std::size_t r = 0; r < dataset.size(); ++r) row_of[dataset.ids[r]] = r;

  SampleSelection out;
  std::map<std::string, std::string> meta;
  bool have_method = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::string body = line.substr(1);
      body.erase(0, body.find_first_not_of(' '));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = body.substr(0, eq);
      const std::string value = body.substr(eq + 1);
      if (key == "method") {
        out.method = parse_method(value);
        have_method = true;
      } else if (key == "population") {
        out.population = split_sizes(value, key).at(0);
      } else if (key == "stratum_sizes") {
        out.stratum_sizes = split_sizes(value, key);
      } else if (key == "stratum_counts") {
        out.stratum_counts = split_sizes(value, key);
      } else if (key == "objective_trace") {
        std::string_view rest(value);
        while (!rest.empty()) {
          const auto comma = rest.find(',');
          double v = 0.0;
          const auto token = rest.substr(0, comma);
          const auto [ptr, ec] =
              std::from_chars(token.data(), token.data() + token.size(), v);
          if (ec != std::errc() || ptr != token.data() + token.size()) {
            throw Error(ErrorCode::kParse,
                        path.string() + ": malformed objective_trace");
          }
          out.objective_trace.push_back(v);
          if (comma == std::string_view::npos) break;
          rest.remove_prefix(comma + 1);
        }
      } else if (key != "n") {
        out.metadata.emplace_back(key, value);
      }
      continue;
    }
    std::uint64_t id = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), id);
    if (ec != std::errc() || ptr != line.data() + line.size()) {
      throw Error(ErrorCode::kParse, path.string() + ": line " +
                                         std::to_string(line_no) +
                                         ": bad example id '" + line + "'");
    }
    const auto it = row_of.find(id);
    if (it == row_of.end()) {
      throw Error(ErrorCode::kInvalidValue, path.string() + ": example id " +
                                                std::to_string(id) +
                                                " is not in the dataset");
    }
    out.indices.push_back(it->second);
  }
  if (!have_method) {
    throw Error(ErrorCode::kParse, path.string() + ": missing '# method=' line");
  }
  if (out.population == 0) out.population = dataset.size();
  return out;
}

}  // namespace cesample
