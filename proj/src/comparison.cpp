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

#include "perfsentry/comparison.hpp"

#include <cmath>
#include <map>

#include "perfsentry/errors.hpp"

namespace perfsentry {
namespace {

std::map<Date, std::vector<double>> by_date(const MetricSeries& s) {
  std::map<Date, std::vector<double>> out;
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    const auto& r = s.records[i];
    if (!(r.value > 0.0)) throw NonPositiveSample(i);
    out[r.date].push_back(r.value);
  }
  return out;
}

double mean_log(const std::vector<double>& seconds) {
  return stats::moments(stats::log_transform(seconds)).mean;
}

std::size_t last_origin(const DetectionResult& detection) {
  return detection.changepoints.empty() ? 0 : detection.changepoints.back().global_index;
}

}  // namespace

PairedDiffSeries pair_by_date(const MetricSeries& a, const MetricSeries& b) {
  const auto da = by_date(a);
  const auto db = by_date(b);
  PairedDiffSeries out;
  out.label_a = a.key;
  out.label_b = b.key;
  for (const auto& [date, va] : da) {
    const auto it = db.find(date);
    if (it == db.end()) continue;
    out.dates.push_back(date);
    out.diffs.push_back(mean_log(va) - mean_log(it->second));
    out.samples_a.push_back(va);
    out.samples_b.push_back(it->second);
  }
  if (out.diffs.empty()) throw EmptyIntersection();
  return out;
}

ComparisonSegments comparison_segments(const PairedDiffSeries& paired,
                                       const DetectionConfig& config) {
  if (paired.size() < config.min_observations) {
    throw InsufficientData("comparison needs at least " +
                           std::to_string(config.min_observations) + " paired dates, have " +
                           std::to_string(paired.size()));
  }
  ComparisonSegments out;
  out.detection = detect_on_scale(paired.diffs, paired.dates, config, true);
  for (const auto& seg : out.detection.segments) {
    const stats::Moments m{seg.log_mean, seg.log_std * seg.log_std, seg.n};
    out.segments.push_back({seg, stats::ratio_from_log_diff(stats::mean_interval(m, 0.99))});
  }
  return out;
}

ComparisonSummary latest_relative_performance(const PairedDiffSeries& paired,
                                              const DetectionConfig& config) {
  if (paired.size() < 2) throw InsufficientData("need at least 2 paired dates");
  const auto detection = detect_on_scale(paired.diffs, paired.dates, config, true);
  const std::size_t origin = last_origin(detection);
  const std::size_t count = paired.size() - origin;
  if (count < 2) {
    throw InsufficientData("need at least 2 paired dates since the last changepoint");
  }
  const std::span<const double> tail(paired.diffs.data() + origin, count);

  ComparisonSummary s;
  s.n_paired = count;
  s.from = paired.dates[origin];
  s.to = paired.dates.back();
  try {
    const auto test = stats::paired_t_test(tail, 0.99);
    s.speedup = stats::ratio_from_log_diff(test.interval);
    s.t_statistic = test.test.t_statistic;
    s.dof = test.test.dof;
    s.standard_error = test.standard_error;
    s.p_value = test.p_value;
  } catch (const DegenerateVariance&) {
    // Identical timings on every date: no difference and nothing to test.
    s.speedup = {1.0, 1.0, 1.0, 0.99};
    s.t_statistic = 0.0;
    s.dof = count - 1;
    s.standard_error = 0.0;
    s.p_value = 1.0;
  }

  std::vector<double> raw_a;
  std::vector<double> raw_b;
  for (std::size_t i = origin; i < paired.size(); ++i) {
    raw_a.insert(raw_a.end(), paired.samples_a[i].begin(), paired.samples_a[i].end());
    raw_b.insert(raw_b.end(), paired.samples_b[i].begin(), paired.samples_b[i].end());
  }
  const auto ma = stats::moments(raw_a);
  const auto mb = stats::moments(raw_b);
  s.n_a = ma.n;
  s.n_b = mb.n;
  s.mean_a = ma.mean;
  s.mean_b = mb.mean;
  s.std_a = std::sqrt(ma.variance);
  s.std_b = std::sqrt(mb.variance);
  return s;
}

double weak_scaling_efficiency(double t1, double dof1, double tn, double dofn, double nodes_n) {
  for (double v : {t1, dof1, tn, dofn, nodes_n}) {
    if (!(v > 0.0)) throw ZeroInput("weak scaling inputs must all be positive");
  }
  // Same quantity as ((t1/dof1)/(tn/dofn))/nodes, arranged so that exact
  // integer inputs stay exact.
  return (t1 * dofn) / (tn * dof1 * nodes_n) * 100.0;
}

}  // namespace perfsentry
