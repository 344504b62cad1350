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

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Scenario seeds are fixed; see README for the settings.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "cesample/binning.hpp"
#include "cesample/dataset.hpp"
#include "cesample/error.hpp"
#include "cesample/harness.hpp"
#include "cesample/objective.hpp"
#include "cesample/rng.hpp"
#include "cesample/samplers.hpp"
#include "cesample/scenario.hpp"
#include "support.hpp"

namespace {

using namespace cesample;
namespace t = cesample::testing;

std::size_t worker_count() {
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const AggregateRow& row(const ExperimentResult& r, const char* method, std::size_t n) {
  for (const auto& a : r.aggregates)
    if (a.method == method && a.sample_size == n) return a;
  throw std::runtime_error("missing aggregate");
}

std::vector<double> estimates(const ExperimentResult& r, const char* method, std::size_t n) {
  std::vector<double> out;
  for (const auto& rec : r.raw)
    if (rec.method == method && rec.sample_size == n) out.push_back(rec.estimate);
  return out;
}

double sample_variance(const std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(x.size() - 1);
}

const OperationalDataset& four_cluster() {
  static const OperationalDataset ds = generate_synthetic(t::four_cluster_spec(5000, 11));
  return ds;
}

// ---------------------------------------------------------------------------

Outcome variance_reduction() {
  ExperimentConfig cfg;
  cfg.methods = {Method::kSrs, Method::kCes};
  cfg.sample_sizes = {50, 100, 150};
  cfg.repetitions = 500;
  cfg.seed = 1;
  cfg.threads = worker_count();
  const auto result = run_experiment(four_cluster(), cfg);
  bool pass = true;
  std::string detail;
  for (std::size_t n : cfg.sample_sizes) {
    const double ces = row(result, "ces", n).mse, srs = row(result, "srs", n).mse;
    pass = pass && ces < srs;
    detail += fmt("n=%zu mse ces=%.3g srs=%.3g; ", n, ces, srs);
  }
  const double avg = result.efficiency.at(0).average;
  pass = pass && avg < 0.85;
  return {pass, detail + fmt("average E=%.4f (< 0.85)", avg)};
}

ExperimentResult unbiasedness_run() {
  ExperimentConfig cfg;
  cfg.methods = {Method::kSrs, Method::kCss, Method::kCes};
  cfg.sample_sizes = {100};
  cfg.repetitions = 2000;
  cfg.seed = 2;
  cfg.strat.proportional = true;
  cfg.threads = worker_count();
  return run_experiment(four_cluster(), cfg);
}

Outcome unbiasedness(const ExperimentResult& result) {
  bool pass = true;
  std::string detail;
  for (const char* m : {"srs", "ces", "css"}) {
    const auto est = estimates(result, m, 100);
    double mean = 0.0;
    for (double v : est) mean += v;
    mean /= static_cast<double>(est.size());
    const double bound = 3.0 * std::sqrt(sample_variance(est) / static_cast<double>(est.size()));
    const double gap = std::abs(mean - result.true_accuracy);
    pass = pass && gap < bound;
    detail += fmt("%s |bias|=%.5f bound=%.5f; ", m, gap, bound);
  }
  return {pass, detail + fmt("truth=%.4f", result.true_accuracy)};
}

Outcome srs_theory(const ExperimentResult& result) {
  const double acc = result.true_accuracy;
  const double n = 100.0, big_n = static_cast<double>(four_cluster().size());
  const double theory = acc * (1 - acc) / n * (big_n - n) / (big_n - 1);
  const double empirical = sample_variance(estimates(result, "srs", 100));
  const double rel = std::abs(empirical / theory - 1.0);
  return {rel < 0.15, fmt("var=%.6g theory=%.6g relative gap=%.3f (< 0.15)", empirical,
                          theory, rel)};
}

Outcome greedy_oracle() {
  Rng rng(4);
  std::size_t steps = 0, optimal = 0, first = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = 4 + rng.below(9);      // 4..12
    const std::size_t m = 1 + rng.below(2);      // 1..2
    const std::size_t k = 2 + rng.below(2);      // 2..3
    const bool coarse = rng.bernoulli(0.5);      // repeated values force ties
    Matrix act(n, m);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < m; ++c)
        act(r, c) = coarse ? static_cast<double>(rng.below(4)) : rng.normal();
    const auto ds = make_dataset(act);
    SelectionParams p;
    p.init = 1 + rng.below(n - 2);
    p.budget = p.init + 1 + rng.below(n - p.init);
    p.group = 2;
    p.sections = k;
    p.candidates = 100000;  // exceeds C(12, 2): every group is scored
    p.objective = rng.bernoulli(0.5) ? ObjectiveChoice::kCrossEntropy : ObjectiveChoice::kKl;
    p.seed = rng.next();
    const auto replay = t::replay_greedy(ds, ces_select(ds, p), p);
    steps += replay.steps;
    optimal += replay.optimal;
    first += replay.first_optimal;
  }
  return {steps > 0 && optimal == steps && first == steps,
          fmt("%zu merge steps over 100 instances: %zu at the exhaustive minimum, %zu also "
              "first in tie order",
              steps, optimal, first)};
}

void compositions(std::size_t total, std::size_t k,
                  const std::function<void(const std::vector<std::uint64_t>&)>& visit) {
  std::vector<std::uint64_t> parts(k, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t j, std::size_t left) {
    if (j + 1 == k) {
      parts[j] = left;
      visit(parts);
      return;
    }
    for (std::size_t c = 0; c <= left; ++c) {
      parts[j] = c;
      rec(j + 1, left - c);
    }
  };
  rec(0, total);
}

Outcome objective_correctness() {
  Rng rng(5);
  double worst = 0.0;
  for (int round = 0; round < 1000; ++round) {
    const std::size_t m = 1 + rng.below(4), k = 1 + rng.below(6);
    std::vector<std::uint64_t> s(m * k, 0), tc(m * k, 0);
    const std::uint64_t s_total = 1 + rng.below(200), t_total = 1 + rng.below(40);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::uint64_t r = 0; r < s_total; ++r) ++s[i * k + rng.below(k)];
      for (std::uint64_t r = 0; r < t_total; ++r) {
        std::size_t j;
        do j = rng.below(k); while (s[i * k + j] == 0);
        ++tc[i * k + j];
      }
    }
    const double alpha = round % 3 == 0 ? 1e-8 : round % 3 == 1 ? kDefaultAlpha
                                                                : rng.uniform(0.001, 5.0);
    const auto hs = MarginalHistogram::from_counts(m, k, s);
    const auto ht = MarginalHistogram::from_counts(m, k, tc);
    worst = std::max(worst, std::abs(avg_cross_entropy(hs, ht, alpha) -
                                     t::oracle_cross_entropy(s, tc, m, k, alpha)));
    worst = std::max(worst, std::abs(kl_t_from_s(hs, ht) - t::oracle_kl(s, tc, m, k)));
  }

  // Gibbs: every T with m <= 2, K <= 3, |T| <= 6 against a set of pS.
  std::size_t cases = 0, violations = 0;
  for (std::size_t m = 1; m <= 2; ++m) {
    for (std::size_t k = 1; k <= 3; ++k) {
      for (std::size_t tt = 1; tt <= 6; ++tt) {
        for (int variant = 0; variant < 4; ++variant) {
          // Variant 1 makes pS reachable by a T of size tt.
          std::vector<std::uint64_t> s(m * k, 0);
          const std::size_t draws = variant == 1 ? tt : 2 + rng.below(15);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t r = 0; r < draws; ++r) s[i * k + rng.below(k)] += variant == 1 ? 3 : 1;
          const std::uint64_t total = variant == 1 ? 3 * tt : draws;
          const auto hs = MarginalHistogram::from_counts(m, k, s);
          double entropy = 0.0;
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < k; ++j)
              if (s[i * k + j]) entropy -= hs.prob(i, j) * std::log(hs.prob(i, j));
          entropy /= static_cast<double>(m);

          std::vector<std::vector<std::uint64_t>> rows;
          compositions(tt, k, [&](const auto& c) { rows.push_back(c); });
          const std::size_t combos = m == 1 ? rows.size() : rows.size() * rows.size();
          for (std::size_t idx = 0; idx < combos; ++idx) {
            std::vector<std::uint64_t> tc(rows[idx % rows.size()]);
            if (m == 2) {
              const auto& second = rows[idx / rows.size()];
              tc.insert(tc.end(), second.begin(), second.end());
            }
            bool equal = true, supported = true;
            for (std::size_t c = 0; c < m * k; ++c) {
              equal = equal && tc[c] * total == s[c] * tt;
              supported = supported && (tc[c] == 0 || s[c] > 0);
            }
            const auto ht = MarginalHistogram::from_counts(m, k, tc);
            ++cases;
            const double ce = avg_cross_entropy(hs, ht, 0.0);
            if (equal ? std::abs(ce - entropy) > 1e-12 : !(ce > entropy)) ++violations;
            if (supported) {
              const double kl = kl_t_from_s(hs, ht);
              if (equal ? std::abs(kl) > 1e-12 : !(kl > 0.0)) ++violations;
            }
          }
        }
      }
    }
  }
  return {worst < 1e-10 && violations == 0 && cases > 0,
          fmt("max |impl - 50-digit oracle| over 1000 histograms = %.2e (< 1e-10); "
              "Gibbs violations %zu of %zu enumerated cases",
              worst, violations, cases)};
}

Outcome css_regimes() {
  ExperimentConfig cfg;
  cfg.methods = {Method::kSrs, Method::kCss};
  cfg.sample_sizes = {100};
  cfg.repetitions = 500;
  cfg.seed = 6;
  cfg.threads = worker_count();
  const auto truthful = run_experiment(generate_synthetic(t::well_fitted_spec(5000, 11, false)), cfg);
  const auto inverted = run_experiment(generate_synthetic(t::well_fitted_spec(5000, 11, true)), cfg);
  const double ct = row(truthful, "css", 100).mse, st = row(truthful, "srs", 100).mse;
  const double ci = row(inverted, "css", 100).mse, si = row(inverted, "srs", 100).mse;
  return {ct < st && ci > si,
          fmt("truthful css=%.3g < srs=%.3g; inverted css=%.3g > srs=%.3g", ct, st, ci, si)};
}

Outcome small_sets() {
  std::size_t wins = 0;
  double sum = 0.0;
  const std::size_t draws = 30;
  for (std::size_t d = 0; d < draws; ++d) {
    const auto ds = generate_synthetic(t::four_cluster_spec(100, derive_seed(7, d)));
    ExperimentConfig cfg;
    cfg.methods = {Method::kSrs, Method::kCes};
    cfg.sample_sizes = {30};
    cfg.repetitions = 200;
    cfg.seed = d;
    cfg.params.init = 5;
    cfg.params.objective = ObjectiveChoice::kKl;
    cfg.threads = worker_count();
    const double e = run_experiment(ds, cfg).efficiency.at(0).average;
    sum += e;
    wins += e < 1.0;
  }
  const double avg = sum / draws;
  return {avg < 1.0 && wins >= 20,
          fmt("average E=%.4f (< 1); CES beat SRS in %zu of %zu draws (>= 20)", avg, wins,
              draws)};
}

// ---------------------------------------------------------------------------

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CESAMPLE_CLI) + " " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

Outcome determinism() {
  t::TempDir dir;
  auto at = [&](const std::string& name) { return (dir / name).string(); };
  write_synth_spec(t::four_cluster_spec(2000, 11), dir / "s.spec");

  // A small model over the synthetic activations, for infer.
  Rng rng(8);
  MlpModel model;
  model.input_width = 8;
  std::vector<double> w1(8 * 6), w2(6 * 4);
  for (double& w : w1) w = rng.normal() * 0.3;
  for (double& w : w2) w = rng.normal();
  model.layers = {{Matrix(8, 6, w1), std::vector<double>(6, 0.05), Activation::kRelu},
                  {Matrix(6, 4, w2), std::vector<double>(4, 0.0), Activation::kSoftmax}};
  write_model(model, dir / "m.model");
  const auto inputs = generate_synthetic(t::four_cluster_spec(300, 12));
  write_matrix_text(inputs.activations, dir / "x.csv");
  {
    std::string labels;
    for (std::size_t r = 0; r < 300; ++r) labels += std::to_string(r % 4) + "\n";
    t::spit(dir / "y.csv", labels);
  }

  struct Command {
    std::string args;           // with {} for the run tag
    std::vector<std::string> outputs;
  };
  const std::string g = at("g") + ".manifest";
  const std::vector<Command> commands = {
      {"gen-synth --spec " + at("s.spec") + " --out " + at("gen{}"),
       {"gen{}.act.bin", "gen{}.conf.bin", "gen{}.corr.bin", "gen{}.manifest"}},
      {"infer --model " + at("m.model") + " --inputs " + at("x.csv") + " --labels " +
           at("y.csv") + " --out " + at("inf{}"),
       {"inf{}.act.bin", "inf{}.conf.bin", "inf{}.corr.bin", "inf{}.manifest"}},
      {"select --method srs --manifest " + g + " --budget 80 --seed 3 --out " + at("srs{}"),
       {"srs{}"}},
      {"select --method css --manifest " + g + " --budget 80 --seed 3 --out " + at("css{}"),
       {"css{}"}},
      {"select --method ces --manifest " + g + " --budget 80 --seed 3 --out " + at("ces{}"),
       {"ces{}"}},
      {"evaluate --manifest " + g + " --methods srs,css,ces --sizes 40:60:20 --reps 4 "
       "--seed 9 --out " + at("ev{}"),
       {"ev{}/raw.csv", "ev{}/agg.csv"}},
  };
  if (run_cli("gen-synth --spec " + at("s.spec") + " --out " + at("g")) != 0)
    return {false, "gen-synth failed"};

  auto fill = [](std::string s, const std::string& tag) {
    for (std::size_t p; (p = s.find("{}")) != std::string::npos;) s.replace(p, 2, tag);
    return s;
  };
  std::size_t files = 0, mismatches = 0;
  for (const auto& c : commands) {
    for (const char* tag : {"1", "2"})
      if (run_cli(fill(c.args, tag)) != 0) return {false, "command failed: " + fill(c.args, tag)};
    for (const auto& out : c.outputs) {
      const std::string first = fill(out, "1"), second = fill(out, "2");
      const std::string a = t::slurp(dir / first);
      std::string b = t::slurp(dir / second);
      // Manifests name their own data files; align the stems before comparing.
      const std::string stem1 = first.substr(0, first.find('.'));
      const std::string stem2 = second.substr(0, second.find('.'));
      for (std::size_t p; (p = b.find(stem2)) != std::string::npos;) b.replace(p, stem2.size(), stem1);
      ++files;
      if (a.empty() || a != b) ++mismatches;
    }
  }
  // Estimates and validation print to stdout; compare captured text.
  auto capture = [&](const std::string& args, const std::string& file) {
    const std::string cmd = std::string(CESAMPLE_CLI) + " " + args + " >" + at(file) + " 2>&1";
    return std::system(cmd.c_str()) == 0 ? t::slurp(dir / file) : std::string();
  };
  for (const char* sel : {"srs1", "css1", "ces1"}) {
    const std::string args = "estimate --manifest " + g + " --selection " + at(sel);
    ++files;
    const std::string a = capture(args, "o1"), b = capture(args, "o2");
    if (a.empty() || a != b) ++mismatches;
  }
  {
    ++files;
    const std::string args = "validate --manifest " + g;
    if (capture(args, "o1") != capture(args, "o2") || run_cli(args) != 0) ++mismatches;
  }

  // Serial against parallel repetitions.
  const std::string sweep = "evaluate --manifest " + g +
                            " --methods srs,css,ces --sizes 40:80:20 --reps 12 --seed 4";
  if (run_cli(sweep + " --threads 1 --out " + at("serial")) != 0 ||
      run_cli(sweep + " --threads 4 --out " + at("parallel")) != 0)
    return {false, "evaluate failed"};
  const bool same_raw = t::slurp(dir / "serial/raw.csv") == t::slurp(dir / "parallel/raw.csv") &&
                        !t::slurp(dir / "serial/raw.csv").empty();
  return {mismatches == 0 && same_raw,
          fmt("%zu outputs of 8 commands compared across reruns, %zu differ; raw.csv serial vs "
              "4 threads %s",
              files, mismatches, same_raw ? "identical" : "DIFFERENT")};
}

Outcome format_fidelity() {
  t::TempDir dir;
  Rng rng(9);
  std::size_t roundtrip_failures = 0, rejection_failures = 0;
  for (int round = 0; round < 1000; ++round) {
    const std::size_t n = 1 + rng.below(60), m = 1 + rng.below(12);
    Matrix act(n, m);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < m; ++c) {
        // Random finite float32 bit patterns, with some ordinary values.
        float f;
        do {
          const auto bits = static_cast<std::uint32_t>(rng.next());
          std::memcpy(&f, &bits, 4);
        } while (!std::isfinite(f));
        act(r, c) = rng.bernoulli(0.5) ? f : static_cast<float>(rng.normal());
      }
    }
    std::optional<std::vector<double>> conf;
    std::optional<std::vector<std::uint8_t>> corr;
    if (rng.bernoulli(0.7)) {
      conf.emplace(n);
      for (double& v : *conf) v = static_cast<float>(rng.uniform01());
    }
    if (rng.bernoulli(0.7)) {
      corr.emplace(n);
      for (auto& v : *corr) v = rng.bernoulli(0.5);
    }
    const auto ds = make_dataset(act, conf, corr);
    const std::string prefix = (dir / "r").string();
    save_dataset_with_prefix(ds, prefix, StorageFormat::kBinary);
    const std::string bytes = t::slurp(prefix + ".act.bin");
    const auto back = load_dataset(prefix + ".manifest");
    bool ok = std::memcmp(back.activations.data().data(), ds.activations.data().data(),
                          n * m * sizeof(double)) == 0 &&
              back.confidence == ds.confidence && back.correctness == ds.correctness;
    save_dataset_with_prefix(back, (dir / "r2").string(), StorageFormat::kBinary);
    ok = ok && t::slurp(dir / "r2.act.bin") == bytes;
    if (!ok) ++roundtrip_failures;

    // One malformation per round, each with its documented error class.
    std::string bad = bytes;
    ErrorCode expect;
    std::string target = prefix + ".act.bin";
    switch (rng.below(7)) {
      case 0:
        bad.resize(rng.below(bad.size()));
        expect = ErrorCode::kTruncated;
        break;
      case 1:
        bad[rng.below(4)] ^= static_cast<char>(1 + rng.below(255));
        expect = ErrorCode::kBadMagic;
        break;
      case 2:
        bad[4] = static_cast<char>(2 + rng.below(200));
        expect = ErrorCode::kUnsupportedVersion;
        break;
      case 3:
        bad.append(1 + rng.below(9), '\0');
        expect = ErrorCode::kDimensionMismatch;
        break;
      case 4: {
        const float nan = std::numeric_limits<float>::quiet_NaN();
        std::memcpy(&bad[14 + 4 * rng.below(n * m)], &nan, 4);
        expect = ErrorCode::kNonFinite;
        break;
      }
      case 5: {
        // Correctness outside {0,1}.
        target = prefix + ".corr.bin";
        bad = t::slurp(target);
        if (bad.empty()) {
          write_column(std::vector<double>(n, 1.0), target, StorageFormat::kBinary, true);
          t::spit(prefix + ".manifest", t::slurp(prefix + ".manifest") +
                                            "correctness=r.corr.bin\n");
          bad = t::slurp(target);
        }
        const float two = 2.0f;
        std::memcpy(&bad[10 + 4 * rng.below(n)], &two, 4);
        expect = ErrorCode::kInvalidValue;
        break;
      }
      default: {
        // Manifest disagreeing with the file header.
        target = prefix + ".manifest";
        bad = t::slurp(target);
        const std::string key = "n=" + std::to_string(n) + "\n";
        bad.replace(bad.find(key), key.size(), "n=" + std::to_string(n + 1) + "\n");
        expect = ErrorCode::kDimensionMismatch;
        break;
      }
    }
    t::spit(target, bad);
    try {
      load_dataset(prefix + ".manifest");
      ++rejection_failures;
    } catch (const Error& e) {
      if (e.code() != expect) ++rejection_failures;
    }
    for (const char* ext : {".act.bin", ".conf.bin", ".corr.bin", ".manifest"})
      std::filesystem::remove(prefix + ext);
  }
  return {roundtrip_failures == 0 && rejection_failures == 0,
          fmt("1000 rounds: %zu round-trip mismatches, %zu malformed files misclassified",
              roundtrip_failures, rejection_failures)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  ExperimentResult shared;
  bool have_shared = false;
  auto unbiased_run = [&]() -> const ExperimentResult& {
    if (!have_shared) {
      shared = unbiasedness_run();
      have_shared = true;
    }
    return shared;
  };
  const std::vector<Criterion> criteria = {
      {"1 variance reduction under dependence", variance_reduction},
      {"2 unbiasedness at n=100, R=2000", [&] { return unbiasedness(unbiased_run()); }},
      {"3 SRS variance matches finite-population theory",
       [&] { return srs_theory(unbiased_run()); }},
      {"4 greedy step equals exhaustive minimum", greedy_oracle},
      {"5 objective matches arbitrary precision; Gibbs", objective_correctness},
      {"6 CSS regime sensitivity", css_regimes},
      {"7 small-set KL variant", small_sets},
      {"8 determinism", determinism},
      {"9 binary format fidelity", format_fidelity},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
