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

// Statistical primitives used by the changepoint detector: Student-t
// distribution, pooled and paired t-tests, MAD outlier masking and
// log-scale interval estimates. Everything here is a pure function.

#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "perfsentry/errors.hpp"

namespace perfsentry::stats {

using Samples = std::span<const double>;

// The t statistic of a test whose pooled variance is exactly zero but whose
// means differ. It compares greater than every finite critical value.
inline constexpr double kInfiniteT = std::numeric_limits<double>::infinity();

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased, 0 when n == 1
  std::size_t n = 0;
};

struct TTestResult {
  double t_statistic = 0.0;  // sign follows mean_a - mean_b; may be +-kInfiniteT
  std::size_t dof = 0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double pooled_variance = 0.0;
  std::size_t n_a_used = 0;
  std::size_t n_b_used = 0;
};

struct IntervalEstimate {
  double center = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double confidence = 0.99;
  friend bool operator==(const IntervalEstimate&, const IntervalEstimate&) = default;
};

struct RatioEstimate {
  double ratio = 1.0;
  double lower = 1.0;
  double upper = 1.0;
  double confidence = 0.99;
  friend bool operator==(const RatioEstimate&, const RatioEstimate&) = default;
};

struct OutlierPolicy {
  double threshold = 3.0;     // modified z-score cutoff
  double max_fraction = 0.10; // of the combined two-sided pool
  bool enabled = true;
  friend bool operator==(const OutlierPolicy&, const OutlierPolicy&) = default;
};

struct PairedTTest {
  TTestResult test;
  IntervalEstimate interval;
  double p_value = 1.0;
  double standard_error = 0.0;
};

// Element-wise natural log. Throws NonPositiveSample on the first value <= 0
// (or NaN).
std::vector<double> log_transform(Samples seconds);

// Mean and unbiased variance. Constant input gives exactly (c, 0).
Moments moments(Samples values);

// Student-t distribution with `dof` degrees of freedom, via the regularized
// incomplete beta function.
double t_cdf(double x, double dof);
// Upper tail P(T > x); keeps full relative precision far into the tail.
double t_sf(double x, double dof);
// Inverse of t_cdf by bisection; p must lie in (0, 1).
double t_quantile(double p, double dof);
// Inverse of t_sf: the x with P(T > x) = q, q in (0, 1).
double t_upper_quantile(double q, double dof);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Modified z-scores 0.6745 |x - median| / MAD. When MAD is zero the mean
// absolute deviation about the median is used with constant 0.7979; when
// that is zero too every score is zero.
std::vector<double> modified_z_scores(Samples values);

// Marks values whose modified z-score exceeds policy.threshold, keeping at
// most floor(max_fraction * cap_pool) marks (highest scores first, earlier
// index on ties).
std::vector<bool> mad_outlier_mask(Samples values, const OutlierPolicy& policy,
                                   std::size_t cap_pool);

// Scores each side on its own, then applies one shared cap of
// floor(max_fraction * (|a| + |b|)) across both. Positions in `a` rank
// before positions in `b` on ties.
struct TwoSidedMask {
  std::vector<bool> a;
  std::vector<bool> b;
};
TwoSidedMask two_sided_outlier_mask(Samples a, Samples b,
                                    const OutlierPolicy& policy);

std::size_t outlier_cap(double max_fraction, std::size_t pool);

// Equal-variance two-sample t-test with dof n_a + n_b - 2.
TTestResult pooled_t_test(Samples a, Samples b);
TTestResult pooled_t_test(const Moments& a, const Moments& b);

// CI for mean_b - mean_a using the pooled t-test standard error.
IntervalEstimate mean_diff_interval(Samples a, Samples b, double confidence);
IntervalEstimate mean_diff_interval(const Moments& a, const Moments& b,
                                    double confidence);
// One-sample CI for the mean; degenerate for n == 1 or zero variance.
IntervalEstimate mean_interval(const Moments& m, double confidence);

// exp of a log-scale estimate. exp_ratio(-x) == 1 / exp_ratio(x) exactly.
double exp_ratio(double log_value);
RatioEstimate ratio_from_log_diff(const IntervalEstimate& interval);

// One-sample t-test of mean(diffs) against zero, dof n - 1.
PairedTTest paired_t_test(Samples diffs, double confidence);

}  // namespace perfsentry::stats
