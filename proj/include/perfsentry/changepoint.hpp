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

// Changepoint detection on timing series.
//
// A single pass ranks split points by the size of the jump between adjacent
// observations, keeps the k largest, and t-tests the data before and after
// each one against a Bonferroni-corrected critical value. The sequential
// detector replays a series one observation at a time over a bounded
// lookback window, confirms a split point once it has been detected on m
// consecutive steps, and never looks behind a confirmed changepoint again.
//
// Indices are 0-based throughout. A split point `nu` means the second
// sample starts at position `nu`, so window candidates lie in [1, n).

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "perfsentry/stats.hpp"
#include "perfsentry/store.hpp"

namespace perfsentry {

enum class Direction { kLowerIsBetter, kHigherIsBetter };
enum class Classification { kRegression, kImprovement };

const char* to_string(Direction d);
const char* to_string(Classification c);

struct DetectionConfig {
  double alpha = 0.005;
  std::size_t max_tests_k = 10;
  std::size_t confirmations_m = 3;
  std::size_t lookback_w = 30;
  std::size_t min_observations = 5;
  stats::OutlierPolicy outliers{};
  Direction direction = Direction::kLowerIsBetter;
  bool use_log = true;
  // Recompute the critical value per candidate from the post-outlier dof
  // instead of the window size.
  bool exact_dof = false;

  // Throws InvalidArgument when the invariants do not hold.
  void validate() const;
  friend bool operator==(const DetectionConfig&, const DetectionConfig&) = default;
};

struct CandidateSet {
  std::vector<std::size_t> candidates;      // in ranked (test) order
  std::map<std::size_t, double> t_stats;    // nu -> t
};

struct Segment {
  std::size_t start_index = 0;  // inclusive
  std::size_t end_index = 0;    // inclusive
  std::size_t n = 0;
  double log_mean = 0.0;
  double log_std = 0.0;
  double geo_mean = 1.0;
  double band_low = 1.0;
  double band_high = 1.0;
  Date start_date;
  Date end_date;
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct Changepoint {
  std::size_t global_index = 0;
  Date date;
  double t_statistic = 0.0;      // at confirmation; may be +-infinity
  std::size_t confirmed_at = 0;  // replay step (series position) of confirmation
  Date confirmed_date;
  Segment before;
  Segment after;
  stats::RatioEstimate ratio;
  Classification classification = Classification::kRegression;
  friend bool operator==(const Changepoint&, const Changepoint&) = default;
};

struct PendingCandidate {
  std::size_t global_index = 0;
  std::size_t consecutive = 0;
  friend bool operator==(const PendingCandidate&, const PendingCandidate&) = default;
};

struct DetectionResult {
  std::vector<Changepoint> changepoints;
  std::vector<Segment> segments;
  std::optional<PendingCandidate> pending;
  friend bool operator==(const DetectionResult&, const DetectionResult&) = default;
};

struct ClassifiedRatio {
  std::optional<Classification> classification;  // empty when ratio == 1
  stats::RatioEstimate ratio;
};

// Split points 1..n-1 by descending |x[nu] - x[nu-1]|, ties to smaller nu.
std::vector<std::size_t> jump_ranked_candidates(std::span<const double> window);

// Critical value t^{1 - alpha / (2k)} with `dof` degrees of freedom.
double critical_t(double alpha, std::size_t k, std::size_t dof);

// One pass over a window already on the working scale (log seconds when
// config.use_log).
CandidateSet single_pass_detect(std::span<const double> window, const DetectionConfig& config);

// Sequential replay over values already on the working scale. `dates` must
// be as long as `values` and non-decreasing. When `log_scale` is false the
// segment statistics are reported on the linear scale.
DetectionResult detect_on_scale(std::span<const double> values, std::span<const Date> dates,
                                const DetectionConfig& config, bool log_scale);

// Full replay of a stored series; log-transforms first when config.use_log.
DetectionResult sequential_detect(const MetricSeries& series, const DetectionConfig& config);

// Segments between changepoints on the working scale. `log_scale` decides
// whether geo_mean and the bands are exp-back-transformed.
std::vector<Segment> segmentize(std::span<const double> values, std::span<const Date> dates,
                                std::span<const std::size_t> changepoints, bool log_scale);
std::vector<Segment> segmentize(const MetricSeries& series,
                                std::span<const std::size_t> changepoints);

ClassifiedRatio classify_changepoint(const Segment& before, const Segment& after,
                                     Direction direction, bool log_scale = true);

}  // namespace perfsentry
