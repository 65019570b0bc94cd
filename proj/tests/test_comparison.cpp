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

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "perfsentry/bench.hpp"
#include "perfsentry/comparison.hpp"

using namespace perfsentry;
using Catch::Approx;

namespace {

MetricSeries make(const std::string& bench, const std::vector<double>& values,
                  const std::string& start = "2022-01-01") {
  MetricSeries s;
  s.key = {bench, "Total Fill", "blake"};
  Date d = Date::parse(start);
  for (double v : values) {
    s.records.push_back({d, bench, "Total Fill", "blake", v, {}});
    d = d.plus_days(1);
  }
  return s;
}

PairedDiffSeries diff_series(const std::vector<double>& diffs) {
  PairedDiffSeries p;
  p.label_a = {"a", "t", "p"};
  p.label_b = {"b", "t", "p"};
  Date d = Date::parse("2022-01-01");
  for (double x : diffs) {
    p.dates.push_back(d);
    p.diffs.push_back(x);
    p.samples_a.push_back({std::exp(x)});
    p.samples_b.push_back({1.0});
    d = d.plus_days(1);
  }
  return p;
}

std::vector<double> lognormal(std::size_t n, double gm, double sigma, std::uint64_t seed) {
  SynthSpec spec;
  spec.segments = {{n, gm, sigma}};
  spec.seed = seed;
  return synth_generate(spec).values();
}

}  // namespace

TEST_CASE("pair_by_date", "[comparison]") {
  const auto a = make("a", lognormal(20, 3.0, 0.1, 1));
  const auto self = pair_by_date(a, a);
  CHECK(self.size() == 20);
  for (double d : self.diffs) CHECK(d == 0.0);

  auto half = a;
  half.key.benchmark = "b";
  for (auto& r : half.records) r.value /= 2.0;
  const auto p = pair_by_date(a, half);
  for (double d : p.diffs) CHECK(d == Approx(std::log(2.0)).epsilon(1e-14));
  const auto summary = latest_relative_performance(p, DetectionConfig{});
  CHECK(summary.speedup.ratio == Approx(2.0).epsilon(1e-12));

  const auto late = make("c", lognormal(10, 3.0, 0.1, 2), "2023-01-01");
  CHECK_THROWS_AS(pair_by_date(a, late), EmptyIntersection);
}

TEST_CASE("pair_by_date collapses same-date samples to a geometric mean", "[comparison]") {
  auto a = make("a", {2.0, 8.0, 3.0});
  a.records[1].date = a.records[0].date;  // two samples on day 1
  a.records[2].date = a.records[0].date.plus_days(1);
  const auto b = make("b", {1.0, 1.5});
  const auto p = pair_by_date(a, b);
  REQUIRE(p.size() == 2);
  CHECK(p.diffs[0] == Approx(std::log(4.0)).epsilon(1e-14));  // sqrt(2 * 8) / 1
  CHECK(p.diffs[1] == Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(p.samples_a[0].size() == 2);
}

TEST_CASE("pairing ignores storage order", "[comparison][property]") {
  std::mt19937_64 rng(4);
  const auto a = make("a", lognormal(30, 1.0, 0.2, 5));
  const auto b = make("b", lognormal(30, 0.8, 0.2, 6));
  const auto expect = pair_by_date(a, b);
  for (int trial = 0; trial < 20; ++trial) {
    auto sa = a;
    auto sb = b;
    std::shuffle(sa.records.begin(), sa.records.end(), rng);
    std::shuffle(sb.records.begin(), sb.records.end(), rng);
    const auto got = pair_by_date(sa, sb);
    CHECK(got.dates == expect.dates);
    CHECK(got.diffs == expect.diffs);
  }
}

TEST_CASE("comparison_segments", "[comparison]") {
  const double ln2 = std::log(2.0);
  const double ln7 = std::log(7.0);
  const auto flat = comparison_segments(diff_series(std::vector<double>(20, ln2)), DetectionConfig{});
  REQUIRE(flat.segments.size() == 1);
  CHECK(flat.segments[0].speedup.ratio == 2.0);
  CHECK(flat.segments[0].speedup.lower == 2.0);
  CHECK(flat.segments[0].speedup.upper == 2.0);

  std::vector<double> step(30, ln2);
  step.resize(50, ln7);
  const auto two = comparison_segments(diff_series(step), DetectionConfig{});
  REQUIRE(two.segments.size() == 2);
  REQUIRE(two.detection.changepoints.size() == 1);
  CHECK(two.detection.changepoints[0].global_index == 30);
  CHECK(two.segments[0].speedup.ratio == Approx(2.0).epsilon(1e-14));
  CHECK(two.segments[1].speedup.ratio == Approx(7.0).epsilon(1e-14));

  CHECK_THROWS_AS(comparison_segments(diff_series({ln2, ln2}), DetectionConfig{}),
                  InsufficientData);
}

TEST_CASE("latest_relative_performance", "[comparison]") {
  const auto zero = latest_relative_performance(diff_series(std::vector<double>(12, 0.0)),
                                                DetectionConfig{});
  CHECK(zero.speedup.ratio == 1.0);
  CHECK(zero.p_value == 1.0);

  const auto exact = latest_relative_performance(
      diff_series(std::vector<double>(10, std::log(2.0))), DetectionConfig{});
  CHECK(exact.speedup.ratio == 2.0);
  CHECK(std::isinf(exact.t_statistic));
  CHECK(exact.p_value == 0.0);
  CHECK(exact.n_paired == 10);

  // Only the dates after the last changepoint count.
  std::vector<double> step(30, std::log(2.0));
  step.resize(45, std::log(3.0));
  const auto after = latest_relative_performance(diff_series(step), DetectionConfig{});
  CHECK(after.n_paired == 15);
  CHECK(after.n_a == 15);
  CHECK(after.mean_a == Approx(3.0).epsilon(1e-13));
  CHECK(after.std_b == 0.0);
  CHECK(after.speedup.ratio == Approx(3.0).epsilon(1e-13));

  CHECK_THROWS_AS(latest_relative_performance(diff_series({0.1}), DetectionConfig{}),
                  InsufficientData);
}

TEST_CASE("latest speedup interval covers the truth", "[comparison][montecarlo]") {
  SynthSpec spec;
  spec.segments = {{30, 2.0, 0.05}};
  int in_range = 0;
  int covered = 0;
  constexpr int kSeeds = 500;
  for (int seed = 0; seed < kSeeds; ++seed) {
    spec.seed = static_cast<std::uint64_t>(seed);
    const auto values = synth_generate(spec).values();
    std::vector<double> diffs;
    for (double v : values) diffs.push_back(std::log(v));  // N(ln 2, 0.05^2)
    const auto s = latest_relative_performance(diff_series(diffs), DetectionConfig{});
    if (s.speedup.ratio >= 1.9 && s.speedup.ratio <= 2.1) ++in_range;
    if (s.speedup.lower <= 2.0 && 2.0 <= s.speedup.upper) ++covered;
  }
  CHECK(in_range >= 0.95 * kSeeds);
  CHECK(covered >= 0.95 * kSeeds);
}

TEST_CASE("speedup is antisymmetric", "[comparison][property]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = make("a", lognormal(25, 5.0, 0.1, seed));
    auto b = make("b", lognormal(25, 4.0, 0.1, seed + 100));
    const auto ab = latest_relative_performance(pair_by_date(a, b), DetectionConfig{});
    const auto ba = latest_relative_performance(pair_by_date(b, a), DetectionConfig{});
    // Whichever orientation is above 1 is inverted exactly by the other.
    const auto& hi = ab.speedup.ratio >= 1.0 ? ab.speedup : ba.speedup;
    const auto& lo = ab.speedup.ratio >= 1.0 ? ba.speedup : ab.speedup;
    CHECK(lo.ratio == 1.0 / hi.ratio);
    CHECK(lo.lower == Approx(1.0 / hi.upper).epsilon(1e-15));
    CHECK(lo.upper == Approx(1.0 / hi.lower).epsilon(1e-15));
    CHECK(ab.p_value == ba.p_value);
  }
}

TEST_CASE("scaling one side shifts every diff", "[comparison][property]") {
  const auto a = make("a", lognormal(40, 1.0, 0.03, 1));
  std::vector<double> bv = lognormal(20, 0.5, 0.03, 2);
  const auto tail = lognormal(20, 0.25, 0.03, 3);
  bv.insert(bv.end(), tail.begin(), tail.end());
  const auto b = make("b", bv);
  const auto base = comparison_segments(pair_by_date(a, b), DetectionConfig{});
  for (double c : {0.25, 3.0}) {
    auto scaled = b;
    for (auto& r : scaled.records) r.value *= c;
    const auto got = comparison_segments(pair_by_date(a, scaled), DetectionConfig{});
    REQUIRE(got.detection.changepoints.size() == base.detection.changepoints.size());
    for (std::size_t i = 0; i < got.detection.changepoints.size(); ++i) {
      CHECK(got.detection.changepoints[i].global_index ==
            base.detection.changepoints[i].global_index);
    }
    for (std::size_t i = 0; i < got.segments.size(); ++i) {
      CHECK(got.segments[i].speedup.ratio == Approx(base.segments[i].speedup.ratio / c).epsilon(1e-12));
    }
  }
}

TEST_CASE("self comparison has no changepoints", "[comparison]") {
  const auto a = make("a", lognormal(60, 1.0, 0.3, 9));
  const auto segs = comparison_segments(pair_by_date(a, a), DetectionConfig{});
  CHECK(segs.detection.changepoints.empty());
  CHECK(segs.segments.at(0).speedup.ratio == 1.0);
}

TEST_CASE("weak_scaling_efficiency", "[comparison]") {
  for (double n : {1.0, 4.0, 16.0, 256.0}) {
    CHECK(weak_scaling_efficiency(1, 100, 1, 100 * n, n) == 100.0);
  }
  CHECK(weak_scaling_efficiency(2, 1e6, 3, 4e6, 4) == Approx(200.0 / 3.0).epsilon(1e-14));
  CHECK(weak_scaling_efficiency(2, 1e6, 3, 4e6, 4) == Approx(66.667).margin(1e-3));
  CHECK_THROWS_AS(weak_scaling_efficiency(0, 1, 1, 1, 1), ZeroInput);
  CHECK_THROWS_AS(weak_scaling_efficiency(1, 1, 1, 1, -2), ZeroInput);
}
