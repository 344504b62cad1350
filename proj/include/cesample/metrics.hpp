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

#ifndef CESAMPLE_METRICS_HPP_
#define CESAMPLE_METRICS_HPP_

#include <cstddef>
#include <string>
#include <vector>

namespace cesample {

// R repeated estimates of one method at one sample size.
struct TrialSeries {
  std::string method;
  std::size_t sample_size = 0;
  std::vector<double> estimates;
  double true_accuracy = 0.0;
};

// (1/R) * sum (estimate - truth)^2
double mse(const TrialSeries& series);

// sqrt(mse); the estimators are unbiased, so this is their standard deviation.
double rmse(const TrialSeries& series);

double mean_estimate(const TrialSeries& series);

// MSE(numerator) / MSE(denominator). Values below 1 mean the numerator
// needs proportionally fewer labels for the same precision.
double relative_efficiency(const TrialSeries& numerator,
                           const TrialSeries& denominator);

struct EfficiencyReport {
  std::string numerator;
  std::string denominator;
  std::vector<std::size_t> sample_sizes;
  std::vector<double> e_values;
  double average = 0.0;  // unweighted mean over sizes
};

EfficiencyReport efficiency_report(const std::vector<TrialSeries>& numerator,
                                   const std::vector<TrialSeries>& denominator);

}  // namespace cesample

#endif  // CESAMPLE_METRICS_HPP_
