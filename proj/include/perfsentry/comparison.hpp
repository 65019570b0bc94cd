// Copyright 2026 The perfsentry Authors
//
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

// Paired comparison of two variants of the same benchmark.
//
// Orientation: a is the baseline, b the candidate, diff = log(a) - log(b).
// exp(mean diff) > 1 therefore means the candidate is faster.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "perfsentry/changepoint.hpp"
#include "perfsentry/stats.hpp"
#include "perfsentry/store.hpp"

namespace perfsentry {

struct PairedDiffSeries {
  MetricKey label_a;
  MetricKey label_b;
  std::vector<Date> dates;
  std::vector<double> diffs;
  // Raw seconds behind each paired date, for the per-side summaries.
  std::vector<std::vector<double>> samples_a;
  std::vector<std::vector<double>> samples_b;

  std::size_t size() const { return diffs.size(); }
};

struct ComparisonSegment {
  Segment segment;  // on the diff scale; geo_mean is the segment speedup
  stats::RatioEstimate speedup;
};

struct ComparisonSegments {
  DetectionResult detection;
  std::vector<ComparisonSegment> segments;
};

struct ComparisonSummary {
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  std::size_t n_paired = 0;
  Date from;
  Date to;
  double mean_a = 0.0;  // seconds
  double mean_b = 0.0;
  double std_a = 0.0;
  double std_b = 0.0;
  stats::RatioEstimate speedup;
  double t_statistic = 0.0;
  std::size_t dof = 0;
  double standard_error = 0.0;
  double p_value = 1.0;
};

// Intersects the two histories by date. A date with several samples is
// reduced to the mean of its logs first. Throws EmptyIntersection.
PairedDiffSeries pair_by_date(const MetricSeries& a, const MetricSeries& b);

// Changepoint segmentation of the diff series with a 99% speedup interval
// per segment.
ComparisonSegments comparison_segments(const PairedDiffSeries& paired,
                                       const DetectionConfig& config);

// Paired t-test over the dates since the last changepoint of the diff series.
ComparisonSummary latest_relative_performance(const PairedDiffSeries& paired,
                                              const DetectionConfig& config);

// ((t1 / dof1) / (tn / dofn)) / nodes * 100.
double weak_scaling_efficiency(double t1, double dof1, double tn, double dofn, double nodes_n);

}  // namespace perfsentry
