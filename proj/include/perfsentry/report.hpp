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

#pragma once

#include <string>
#include <vector>

#include "perfsentry/changepoint.hpp"
#include "perfsentry/comparison.hpp"
#include "perfsentry/store.hpp"

namespace perfsentry {

enum class LatestStatus { kStable, kRegressed, kImproved };
const char* to_string(LatestStatus s);

struct MetricReport {
  MetricKey key;
  std::size_t observations = 0;
  bool log_scale = true;
  std::vector<Segment> segments;
  std::vector<Changepoint> changepoints;
  LatestStatus latest_status = LatestStatus::kStable;
  DetectionConfig config_echo;

  // Changepoints whose confirmation happened on the newest observation.
  std::vector<const Changepoint*> newly_confirmed() const;
  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

struct Alert {
  MetricKey key;
  Classification classification = Classification::kRegression;
  double ratio = 1.0;
  double ci_low = 1.0;
  double ci_high = 1.0;
  Date changepoint_date;
  friend bool operator==(const Alert&, const Alert&) = default;
};

struct AlertManifest {
  std::string generated_at;  // ISO-8601 UTC timestamp
  std::vector<Alert> alerts;
};

MetricReport build_report(const MetricSeries& series, const DetectionResult& result,
                          const DetectionConfig& config);

std::string render_json(const MetricReport& report);
MetricReport parse_report_json(const std::string& text);

// Deterministic: identical reports render byte-identical text.
std::string render_markdown(const MetricReport& report);

// Standalone SVG: samples, per-segment geometric mean, +-2 sigma bands,
// log-scaled y axis.
std::string render_svg(const MetricSeries& series, const MetricReport& report);

// "1.15 (1.14, 1.16)": two decimals, more only when needed to tell the
// three numbers apart.
std::string format_ratio_ci(const stats::RatioEstimate& r);
// "+15.0%"
std::string format_percent_change(double ratio);

std::string render_alerts_json(const AlertManifest& manifest);
std::string now_utc_timestamp();

struct ComparisonReport {
  MetricKey baseline;
  MetricKey candidate;
  std::size_t paired_dates = 0;
  ComparisonSegments segments;
  ComparisonSummary summary;
  DetectionConfig config_echo;
};

std::string render_comparison_json(const ComparisonReport& report);
std::string render_comparison_markdown(const ComparisonReport& report);

}  // namespace perfsentry
