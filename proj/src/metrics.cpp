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

#include "cesample/metrics.hpp"

#include <cmath>

#include "cesample/error.hpp"

namespace cesample {

namespace {

void check_series(const TrialSeries& series) {
  if (series.estimates.empty()) {
    throw Error(ErrorCode::kEmptySubset,
                "trial series for " + series.method + " has no estimates");
  }
}

}  // namespace

double mse(const TrialSeries& series) {
  check_series(series);
  double sum = 0.0;
  for (double e : series.estimates) {
    const double d = e - series.true_accuracy;
    sum += d * d;
  }
  return sum / static_cast<double>(series.estimates.size());
}

double rmse(const TrialSeries& series) { return std::sqrt(mse(series)); }

double mean_estimate(const TrialSeries& series) {
  check_series(series);
  double sum = 0.0;
  for (double e : series.estimates) sum += e;
  return sum / static_cast<double>(series.estimates.size());
}

double relative_efficiency(const TrialSeries& numerator,
                           const TrialSeries& denominator) {
  if (numerator.sample_size != denominator.sample_size ||
      numerator.true_accuracy != denominator.true_accuracy) {
    throw Error(ErrorCode::kInvalidArgument,
                "relative efficiency needs series at the same size and truth");
  }
  const double denom = mse(denominator);
  if (denom == 0.0) {
    throw Error(ErrorCode::kInvalidValue,
                "denominator series has zero MSE at n=" +
                    std::to_string(denominator.sample_size));
  }
  return mse(numerator) / denom;
}

EfficiencyReport efficiency_report(const std::vector<TrialSeries>& numerator,
                                   const std::vector<TrialSeries>& denominator) {
  if (numerator.size() != denominator.size() || numerator.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "efficiency report needs matching, non-empty size sweeps");
  }
  EfficiencyReport report;
  report.numerator = numerator.front().method;
  report.denominator = denominator.front().method;
  double sum = 0.0;
  for (std::size_t i = 0; i < numerator.size(); ++i) {
    const double e = relative_efficiency(numerator[i], denominator[i]);
    report.sample_sizes.push_back(numerator[i].sample_size);
    report.e_values.push_back(e);
    sum += e;
  }
  report.average = sum / static_cast<double>(report.e_values.size());
  return report;
}

}  // namespace cesample
