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

#include "perfsentry/stats.hpp"

#include <math.h>  // lgamma_r

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace perfsentry::stats {
namespace {

double log_gamma(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

// Continued fraction for I_x(a, b), modified Lentz. Converges quickly for
// x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

// I_x(a, b) where the caller supplies both x and 1 - x, so that neither has
// to be formed by cancellation.
double incomplete_beta_split(double a, double b, double x, double one_minus_x) {
  if (x <= 0.0) return 0.0;
  if (one_minus_x <= 0.0) return 1.0;
  const double log_front = log_gamma(a + b) - log_gamma(a) - log_gamma(b) +
                           a * std::log(x) + b * std::log(one_minus_x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, one_minus_x) / b;
}

void require_dof(double dof) {
  if (!(dof > 0.0)) throw InvalidArgument("degrees of freedom must be positive");
}

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return lower + (upper - lower) / 2.0;
}

// Pooled variance and standard-error factor shared by the two-sample routines.
struct Pooled {
  std::size_t dof;
  double variance;
  double se;
};

Pooled pool(const Moments& a, const Moments& b) {
  if (a.n == 0 || b.n == 0) throw EmptySample();
  if (a.n + b.n < 3) {
    throw InsufficientData("two-sample test needs at least 3 observations");
  }
  const std::size_t dof = a.n + b.n - 2;
  const double ss = static_cast<double>(a.n - 1) * a.variance +
                    static_cast<double>(b.n - 1) * b.variance;
  const double variance = ss / static_cast<double>(dof);
  const double scale = 1.0 / static_cast<double>(a.n) + 1.0 / static_cast<double>(b.n);
  return {dof, variance, std::sqrt(variance * scale)};
}

}  // namespace

std::vector<double> log_transform(Samples seconds) {
  std::vector<double> out;
  out.reserve(seconds.size());
  for (std::size_t i = 0; i < seconds.size(); ++i) {
    const double v = seconds[i];
    if (!(v > 0.0) || !std::isfinite(v)) throw NonPositiveSample(i);
    out.push_back(std::log(v));
  }
  return out;
}

Moments moments(Samples values) {
  if (values.empty()) throw EmptySample();
  const std::size_t n = values.size();
  // Shift by the first value: constant input then yields exactly (c, 0).
  const double shift = values[0];
  double sum = 0.0;
  for (double v : values) sum += v - shift;
  const double mean = shift + sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) {
    const double d = v - mean;
    ss += d * d;
  }
  const double variance = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
  return {mean, variance, n};
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("beta parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return incomplete_beta_split(a, b, x, 1.0 - x);
}

double t_sf(double x, double dof) {
  require_dof(dof);
  if (std::isnan(x)) return x;
  if (x == 0.0) return 0.5;
  if (std::isinf(x)) return x > 0 ? 0.0 : 1.0;
  const double x2 = x * x;
  const double denom = dof + x2;
  const double tail = 0.5 * incomplete_beta_split(dof / 2.0, 0.5, dof / denom, x2 / denom);
  return x > 0.0 ? tail : 1.0 - tail;
}

double t_cdf(double x, double dof) {
  require_dof(dof);
  if (std::isnan(x)) return x;
  if (x == 0.0) return 0.5;
  return x > 0.0 ? 1.0 - t_sf(x, dof) : t_sf(-x, dof);
}

double t_upper_quantile(double q, double dof) {
  require_dof(dof);
  if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("tail probability must lie in (0, 1)");
  if (q == 0.5) return 0.0;
  if (q > 0.5) return -t_upper_quantile(1.0 - q, dof);

  double lo = 0.0;
  double hi = 1.0;
  while (t_sf(hi, dof) > q) {
    lo = hi;
    hi *= 2.0;
  }
  // Bisect until the bracket cannot shrink any further.
  for (int i = 0; i < 2000; ++i) {
    const double mid = lo + (hi - lo) / 2.0;
    if (mid <= lo || mid >= hi) break;
    if (t_sf(mid, dof) > q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo + (hi - lo) / 2.0;
}

double t_quantile(double p, double dof) {
  require_dof(dof);
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("probability must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  if (p > 0.5) return t_upper_quantile(1.0 - p, dof);
  return -t_upper_quantile(p, dof);
}

std::vector<double> modified_z_scores(Samples values) {
  if (values.empty()) return {};
  const std::vector<double> copy(values.begin(), values.end());
  const double med = median_of(copy);
  std::vector<double> dev(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) dev[i] = std::fabs(values[i] - med);

  std::vector<double> scores(values.size(), 0.0);
  const double mad = median_of(dev);
  if (mad > 0.0) {
    for (std::size_t i = 0; i < dev.size(); ++i) scores[i] = 0.6745 * dev[i] / mad;
    return scores;
  }
  const double mean_ad =
      std::accumulate(dev.begin(), dev.end(), 0.0) / static_cast<double>(dev.size());
  if (mean_ad > 0.0) {
    for (std::size_t i = 0; i < dev.size(); ++i) scores[i] = 0.7979 * dev[i] / mean_ad;
  }
  return scores;
}

std::size_t outlier_cap(double max_fraction, std::size_t pool) {
  if (max_fraction <= 0.0) return 0;
  // The epsilon absorbs representation error in products like 0.29 * 100.
  const double raw = std::floor(max_fraction * static_cast<double>(pool) + 1e-9);
  return std::min(pool, static_cast<std::size_t>(raw));
}

namespace {

struct Flag {
  double score;
  std::size_t position;
};

// Keeps the top `cap` flags by descending score, earlier position first.
void apply_cap(std::vector<Flag>& flags, std::size_t cap) {
  std::stable_sort(flags.begin(), flags.end(), [](const Flag& l, const Flag& r) {
    if (l.score != r.score) return l.score > r.score;
    return l.position < r.position;
  });
  if (flags.size() > cap) flags.resize(cap);
}

void collect(Samples values, double threshold, std::size_t offset,
             std::vector<Flag>& out) {
  const auto scores = modified_z_scores(values);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > threshold) out.push_back({scores[i], offset + i});
  }
}

}  // namespace

std::vector<bool> mad_outlier_mask(Samples values, const OutlierPolicy& policy,
                                   std::size_t cap_pool) {
  std::vector<bool> mask(values.size(), false);
  if (!policy.enabled || values.empty()) return mask;
  std::vector<Flag> flags;
  collect(values, policy.threshold, 0, flags);
  apply_cap(flags, outlier_cap(policy.max_fraction, cap_pool));
  for (const auto& f : flags) mask[f.position] = true;
  return mask;
}

TwoSidedMask two_sided_outlier_mask(Samples a, Samples b, const OutlierPolicy& policy) {
  TwoSidedMask mask{std::vector<bool>(a.size(), false), std::vector<bool>(b.size(), false)};
  if (!policy.enabled) return mask;
  std::vector<Flag> flags;
  collect(a, policy.threshold, 0, flags);
  collect(b, policy.threshold, a.size(), flags);
  apply_cap(flags, outlier_cap(policy.max_fraction, a.size() + b.size()));
  for (const auto& f : flags) {
    if (f.position < a.size()) {
      mask.a[f.position] = true;
    } else {
      mask.b[f.position - a.size()] = true;
    }
  }
  return mask;
}

TTestResult pooled_t_test(const Moments& a, const Moments& b) {
  const Pooled p = pool(a, b);
  TTestResult r;
  r.dof = p.dof;
  r.mean_a = a.mean;
  r.mean_b = b.mean;
  r.pooled_variance = p.variance;
  r.n_a_used = a.n;
  r.n_b_used = b.n;
  const double diff = a.mean - b.mean;
  if (p.variance == 0.0) {
    if (diff == 0.0) throw DegenerateVariance(0.0);
    r.t_statistic = diff > 0.0 ? kInfiniteT : -kInfiniteT;
  } else {
    r.t_statistic = diff / p.se;
  }
  return r;
}

TTestResult pooled_t_test(Samples a, Samples b) {
  if (a.empty() || b.empty()) throw EmptySample();
  return pooled_t_test(moments(a), moments(b));
}

IntervalEstimate mean_diff_interval(const Moments& a, const Moments& b, double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw InvalidArgument("confidence must lie in (0, 1)");
  }
  const Pooled p = pool(a, b);
  const double center = b.mean - a.mean;
  if (p.variance == 0.0) return {center, center, center, confidence};
  const double half = t_quantile((1.0 + confidence) / 2.0, static_cast<double>(p.dof)) * p.se;
  return {center, center - half, center + half, confidence};
}

IntervalEstimate mean_diff_interval(Samples a, Samples b, double confidence) {
  if (a.empty() || b.empty()) throw EmptySample();
  return mean_diff_interval(moments(a), moments(b), confidence);
}

IntervalEstimate mean_interval(const Moments& m, double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw InvalidArgument("confidence must lie in (0, 1)");
  }
  if (m.n == 0) throw EmptySample();
  if (m.n == 1 || m.variance == 0.0) return {m.mean, m.mean, m.mean, confidence};
  const double se = std::sqrt(m.variance / static_cast<double>(m.n));
  const double half =
      t_quantile((1.0 + confidence) / 2.0, static_cast<double>(m.n - 1)) * se;
  return {m.mean, m.mean - half, m.mean + half, confidence};
}

double exp_ratio(double log_value) {
  return log_value >= 0.0 ? std::exp(log_value) : 1.0 / std::exp(-log_value);
}

RatioEstimate ratio_from_log_diff(const IntervalEstimate& interval) {
  return {exp_ratio(interval.center), exp_ratio(interval.lower), exp_ratio(interval.upper),
          interval.confidence};
}

PairedTTest paired_t_test(Samples diffs, double confidence) {
  if (diffs.empty()) throw EmptySample();
  if (diffs.size() < 2) throw InsufficientData("paired t-test needs at least 2 differences");
  const Moments m = moments(diffs);
  if (m.variance == 0.0 && m.mean == 0.0) throw DegenerateVariance(0.0);

  PairedTTest out;
  out.test.dof = m.n - 1;
  out.test.mean_a = m.mean;
  out.test.mean_b = 0.0;
  out.test.pooled_variance = m.variance;
  out.test.n_a_used = m.n;
  out.test.n_b_used = 0;
  out.interval = mean_interval(m, confidence);
  if (m.variance == 0.0) {
    out.test.t_statistic = m.mean > 0.0 ? kInfiniteT : -kInfiniteT;
    out.p_value = 0.0;
    out.standard_error = 0.0;
    return out;
  }
  out.standard_error = std::sqrt(m.variance / static_cast<double>(m.n));
  out.test.t_statistic = m.mean / out.standard_error;
  out.p_value = std::min(1.0, 2.0 * t_sf(std::fabs(out.test.t_statistic),
                                         static_cast<double>(out.test.dof)));
  return out;
}

}  // namespace perfsentry::stats
