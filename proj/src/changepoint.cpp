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

#include "perfsentry/changepoint.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "perfsentry/errors.hpp"

namespace perfsentry {

const char* to_string(Direction d) {
  return d == Direction::kLowerIsBetter ? "LOWER_IS_BETTER" : "HIGHER_IS_BETTER";
}

const char* to_string(Classification c) {
  return c == Classification::kRegression ? "REGRESSION" : "IMPROVEMENT";
}

void DetectionConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (max_tests_k < 1) throw InvalidArgument("max_tests_k must be at least 1");
  if (confirmations_m < 1) throw InvalidArgument("confirmations_m must be at least 1");
  if (min_observations < 3) throw InvalidArgument("min_observations must be at least 3");
  if (lookback_w < min_observations) {
    throw InvalidArgument("lookback_w must be at least min_observations");
  }
  if (!(outliers.threshold > 0.0)) throw InvalidArgument("outlier threshold must be positive");
  if (!(outliers.max_fraction >= 0.0 && outliers.max_fraction <= 1.0)) {
    throw InvalidArgument("outlier max_fraction must lie in [0, 1]");
  }
}

std::vector<std::size_t> jump_ranked_candidates(std::span<const double> window) {
  const std::size_t n = window.size();
  if (n < 2) throw WindowTooShort(n, 2);
  std::vector<std::size_t> order(n - 1);
  std::iota(order.begin(), order.end(), std::size_t{1});
  std::vector<double> jump(n, 0.0);
  for (std::size_t nu = 1; nu < n; ++nu) jump[nu] = std::fabs(window[nu] - window[nu - 1]);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return jump[l] > jump[r]; });
  return order;
}

double critical_t(double alpha, std::size_t k, std::size_t dof) {
  return stats::t_quantile(1.0 - alpha / (2.0 * static_cast<double>(k)),
                           static_cast<double>(dof));
}

namespace {

// Critical values repeat across replay steps; memoized per (k, dof).
class CriticalCache {
 public:
  explicit CriticalCache(double alpha) : alpha_(alpha) {}
  double get(std::size_t k, std::size_t dof) {
    const auto key = std::make_pair(k, dof);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const double v = critical_t(alpha_, k, dof);
    cache_.emplace(key, v);
    return v;
  }

 private:
  double alpha_;
  std::map<std::pair<std::size_t, std::size_t>, double> cache_;
};

CandidateSet single_pass(std::span<const double> window, const DetectionConfig& config,
                         CriticalCache& critical) {
  const std::size_t n = window.size();
  const std::size_t need = std::max<std::size_t>(config.min_observations, 3);
  if (n < need) throw WindowTooShort(n, need);

  const std::size_t k = std::min(config.max_tests_k, n - 1);
  const double t_star = critical.get(k, n - 2);
  const auto ranked = jump_ranked_candidates(window);

  CandidateSet out;
  std::vector<double> a;
  std::vector<double> b;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t nu = ranked[i];
    const auto before = window.first(nu);
    const auto after = window.subspan(nu);
    const auto mask = stats::two_sided_outlier_mask(before, after, config.outliers);
    a.clear();
    b.clear();
    for (std::size_t j = 0; j < before.size(); ++j) {
      if (!mask.a[j]) a.push_back(before[j]);
    }
    for (std::size_t j = 0; j < after.size(); ++j) {
      if (!mask.b[j]) b.push_back(after[j]);
    }
    if (a.empty() || b.empty() || a.size() + b.size() < 3) continue;

    stats::TTestResult test;
    try {
      test = stats::pooled_t_test(a, b);
    } catch (const DegenerateVariance&) {
      continue;
    }
    const double threshold = config.exact_dof ? critical.get(k, test.dof) : t_star;
    if (std::fabs(test.t_statistic) > threshold) {
      out.candidates.push_back(nu);
      out.t_stats.emplace(nu, test.t_statistic);
    }
  }
  return out;
}

void require_ordered(std::span<const Date> dates) {
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (dates[i] < dates[i - 1]) throw UnsortedSeries(i);
  }
}

Segment make_segment(std::span<const double> values, std::span<const Date> dates,
                     std::size_t start, std::size_t end, bool log_scale) {
  const auto slice = values.subspan(start, end - start + 1);
  const auto m = stats::moments(slice);
  Segment s;
  s.start_index = start;
  s.end_index = end;
  s.n = m.n;
  s.log_mean = m.mean;
  s.log_std = std::sqrt(m.variance);
  if (log_scale) {
    s.geo_mean = std::exp(s.log_mean);
    s.band_low = std::exp(s.log_mean - 2.0 * s.log_std);
    s.band_high = std::exp(s.log_mean + 2.0 * s.log_std);
  } else {
    s.geo_mean = s.log_mean;
    s.band_low = s.log_mean - 2.0 * s.log_std;
    s.band_high = s.log_mean + 2.0 * s.log_std;
  }
  s.start_date = dates[start];
  s.end_date = dates[end];
  return s;
}

}  // namespace

CandidateSet single_pass_detect(std::span<const double> window, const DetectionConfig& config) {
  config.validate();
  CriticalCache critical(config.alpha);
  return single_pass(window, config, critical);
}

std::vector<Segment> segmentize(std::span<const double> values, std::span<const Date> dates,
                                std::span<const std::size_t> changepoints, bool log_scale) {
  if (dates.size() != values.size()) throw InvalidArgument("dates and values differ in length");
  const std::size_t n = values.size();
  std::size_t prev = 0;
  for (const std::size_t cp : changepoints) {
    if (cp <= prev || cp >= n) {
      throw IndexOutOfRange("changepoint index " + std::to_string(cp) +
                            " is not strictly increasing within [1, " + std::to_string(n) + ")");
    }
    prev = cp;
  }
  std::vector<Segment> out;
  if (n == 0) return out;
  std::size_t start = 0;
  for (const std::size_t cp : changepoints) {
    out.push_back(make_segment(values, dates, start, cp - 1, log_scale));
    start = cp;
  }
  out.push_back(make_segment(values, dates, start, n - 1, log_scale));
  return out;
}

std::vector<Segment> segmentize(const MetricSeries& series,
                                std::span<const std::size_t> changepoints) {
  const auto logs = stats::log_transform(series.values());
  const auto dates = series.dates();
  return segmentize(logs, dates, changepoints, true);
}

ClassifiedRatio classify_changepoint(const Segment& before, const Segment& after,
                                     Direction direction, bool log_scale) {
  if (before.n == 0 || after.n == 0) throw EmptySegment();
  const stats::Moments mb{before.log_mean, before.log_std * before.log_std, before.n};
  const stats::Moments ma{after.log_mean, after.log_std * after.log_std, after.n};
  stats::IntervalEstimate diff;
  if (before.n + after.n < 3) {
    const double c = after.log_mean - before.log_mean;
    diff = {c, c, c, 0.99};
  } else {
    diff = stats::mean_diff_interval(mb, ma, 0.99);
  }

  ClassifiedRatio out;
  if (log_scale) {
    out.ratio = stats::ratio_from_log_diff(diff);
  } else {
    const double base = before.log_mean;
    if (base == 0.0) throw InvalidArgument("linear-scale ratio needs a non-zero baseline mean");
    out.ratio = {after.log_mean / base, 1.0 + diff.lower / base, 1.0 + diff.upper / base, 0.99};
    if (out.ratio.lower > out.ratio.upper) std::swap(out.ratio.lower, out.ratio.upper);
  }
  if (diff.center != 0.0) {
    const bool grew = diff.center > 0.0;
    const bool worse = (direction == Direction::kLowerIsBetter) ? grew : !grew;
    out.classification = worse ? Classification::kRegression : Classification::kImprovement;
  }
  return out;
}

DetectionResult detect_on_scale(std::span<const double> values, std::span<const Date> dates,
                                const DetectionConfig& config, bool log_scale) {
  config.validate();
  if (dates.size() != values.size()) throw InvalidArgument("dates and values differ in length");
  require_ordered(dates);

  struct Confirmed {
    std::size_t index;
    double t;
    std::size_t step;
  };
  struct Tracked {
    std::size_t count;
    double t;
  };

  CriticalCache critical(config.alpha);
  std::vector<Confirmed> confirmed;
  std::map<std::size_t, Tracked> tracked;  // global index -> consecutive detections
  std::size_t origin = 0;

  for (std::size_t step = 0; step < values.size(); ++step) {
    const std::size_t available = step - origin + 1;
    const std::size_t len = std::min(config.lookback_w, available);
    if (len < config.min_observations) continue;
    const std::size_t start = step + 1 - len;
    const auto found = single_pass(values.subspan(start, len), config, critical);

    std::map<std::size_t, Tracked> next;
    for (const std::size_t nu : found.candidates) {
      const std::size_t g = start + nu;
      const auto prev = tracked.find(g);
      const std::size_t count = (prev == tracked.end() ? 0 : prev->second.count) + 1;
      next.emplace(g, Tracked{count, found.t_stats.at(nu)});
    }
    tracked = std::move(next);

    // Among candidates reaching m on this step the largest |t| wins, then
    // the smaller index (map order).
    std::optional<std::pair<std::size_t, Tracked>> winner;
    for (const auto& [g, tr] : tracked) {
      if (tr.count < config.confirmations_m) continue;
      if (!winner || std::fabs(tr.t) > std::fabs(winner->second.t)) winner.emplace(g, tr);
    }
    if (winner) {
      confirmed.push_back({winner->first, winner->second.t, step});
      origin = winner->first;
      tracked.clear();
    }
  }

  DetectionResult result;
  std::vector<std::size_t> indices;
  indices.reserve(confirmed.size());
  for (const auto& c : confirmed) indices.push_back(c.index);
  result.segments = segmentize(values, dates, indices, log_scale);

  for (std::size_t i = 0; i < confirmed.size(); ++i) {
    Changepoint cp;
    cp.global_index = confirmed[i].index;
    cp.date = dates[cp.global_index];
    cp.t_statistic = confirmed[i].t;
    cp.confirmed_at = confirmed[i].step;
    cp.confirmed_date = dates[cp.confirmed_at];
    cp.before = result.segments[i];
    cp.after = result.segments[i + 1];
    const auto cls = classify_changepoint(cp.before, cp.after, config.direction, log_scale);
    cp.ratio = cls.ratio;
    if (cls.classification) {
      cp.classification = *cls.classification;
    } else {
      // t = mean_before - mean_after, so t < 0 means the metric grew.
      const bool grew = cp.t_statistic < 0.0;
      const bool worse = (config.direction == Direction::kLowerIsBetter) ? grew : !grew;
      cp.classification = worse ? Classification::kRegression : Classification::kImprovement;
    }
    result.changepoints.push_back(std::move(cp));
  }

  for (const auto& [g, tr] : tracked) {
    if (!result.pending || tr.count > result.pending->consecutive) {
      result.pending = PendingCandidate{g, tr.count};
    }
  }
  return result;
}

DetectionResult sequential_detect(const MetricSeries& series, const DetectionConfig& config) {
  const auto dates = series.dates();
  require_ordered(dates);
  const auto raw = series.values();
  if (config.use_log) {
    const auto logs = stats::log_transform(raw);
    return detect_on_scale(logs, dates, config, true);
  }
  return detect_on_scale(raw, dates, config, false);
}

}  // namespace perfsentry
