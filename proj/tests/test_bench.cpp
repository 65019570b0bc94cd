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

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "perfsentry/bench.hpp"

using namespace perfsentry;

TEST_CASE("run_command times a process", "[bench]") {
  RunSpec spec;
  spec.command = {"sleep", "0.1"};
  spec.repeats = 3;
  spec.key = {"sleep", "Total Time", "local"};
  spec.date_override = Date::parse("2024-05-06");
  const auto records = run_command(spec);
  REQUIRE(records.size() == 3);
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].value >= 0.09);
    CHECK(records[i].value <= 0.5);
    CHECK(records[i].date == Date::parse("2024-05-06"));
    CHECK(records[i].key() == spec.key);
    CHECK(records[i].meta.at("exit_status") == "0");
    CHECK(records[i].meta.at("repeat") == std::to_string(i));
    CHECK(records[i].meta.contains("host"));
  }

  spec.repeats = 1;
  spec.warmups = 2;
  spec.command = {"true"};
  CHECK(run_command(spec).size() == 1);
}

TEST_CASE("run_command failures", "[bench]") {
  RunSpec spec;
  spec.key = {"b", "t", "p"};
  spec.command = {"false"};
  try {
    run_command(spec);
    FAIL("expected NonZeroExit");
  } catch (const NonZeroExit& e) {
    CHECK(e.code() == 1);
  }
  spec.command = {"sh", "-c", "exit 7"};
  try {
    run_command(spec);
    FAIL("expected NonZeroExit");
  } catch (const NonZeroExit& e) {
    CHECK(e.code() == 7);
  }
  // A failing warmup aborts before any timed repeat.
  spec.warmups = 1;
  CHECK_THROWS_AS(run_command(spec), NonZeroExit);
  spec.warmups = 0;
  spec.command = {"/nonexistent/perfsentry-no-such-binary"};
  CHECK_THROWS_AS(run_command(spec), SpawnError);
  spec.command = {};
  CHECK_THROWS_AS(run_command(spec), Error);
}

TEST_CASE("SplitMix64 matches the reference recurrence", "[bench]") {
  SplitMix64 ours(42);
  oracle::SplitMix ref{42};
  for (int i = 0; i < 1000; ++i) CHECK(ours.next() == ref());
  SplitMix64 u(7);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK(x > 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("synthetic stream, seed 42", "[bench]") {
  SynthSpec spec;
  spec.segments = {{2, 1.0, 1.0}};
  spec.seed = 42;
  const auto s = synth_generate(spec);
  // Frozen from an independent Box-Muller over the same splitmix64 stream.
  CHECK(s.records[0].value == Catch::Approx(1.5139463984091144).epsilon(1e-15));
  CHECK(s.records[1].value == Catch::Approx(1.9206837110412132).epsilon(1e-15));
}

TEST_CASE("synthetic stream follows the documented draw order", "[bench]") {
  SynthSpec spec;
  spec.segments = {{17, 2.0, 0.3}, {12, 5.0, 0.1}};
  spec.outlier_rate = 0.2;
  spec.outlier_factor = 10.0;
  spec.seed = 123;
  const auto s = synth_generate(spec);

  oracle::SplitMix rng{123};
  auto u = [&] { return oracle::open_uniform(rng()); };
  bool cached = false;
  double spare = 0.0;
  std::size_t i = 0;
  int outliers = 0;
  for (const auto& seg : spec.segments) {
    for (std::size_t j = 0; j < seg.length; ++j, ++i) {
      double z;
      if (cached) {
        z = spare;
        cached = false;
      } else {
        const double u1 = u();
        const double u2 = u();
        const double r = std::sqrt(-2.0 * std::log(u1));
        z = r * std::cos(2.0 * std::numbers::pi * u2);
        spare = r * std::sin(2.0 * std::numbers::pi * u2);
        cached = true;
      }
      double v = seg.geo_mean * std::exp(seg.sigma_log * z);
      if (u() < spec.outlier_rate) {
        v *= spec.outlier_factor;
        ++outliers;
      }
      CHECK(s.records[i].value == Catch::Approx(v).epsilon(1e-15));
    }
  }
  CHECK(outliers > 0);
  CHECK(s.records.front().date == Date::parse("2022-01-01"));
  CHECK(s.records.back().date == Date::parse("2022-01-01").plus_days(28));
}

TEST_CASE("synthetic generator determinism and noiseless segments", "[bench]") {
  SynthSpec spec;
  spec.segments = {{30, 1.0, 0.0}, {30, 1.15, 0.0}};
  const auto flat = synth_generate(spec).values();
  for (std::size_t i = 0; i < 30; ++i) CHECK(flat[i] == 1.0);
  for (std::size_t i = 30; i < 60; ++i) CHECK(flat[i] == 1.15);

  spec.segments = {{100, 3.0, 0.2}};
  spec.outlier_rate = 0.05;
  spec.seed = 9;
  const auto a = synth_generate(spec).values();
  const auto b = synth_generate(spec).values();
  CHECK(a == b);
  spec.seed = 10;
  CHECK(synth_generate(spec).values() != a);
}

TEST_CASE("synthetic spec JSON", "[bench]") {
  const auto spec = synth_spec_from_json(R"({
    "segments": [{"length": 30, "geo_mean": 1.0, "sigma_log": 0.02},
                 {"length": 30, "geo_mean": 1.15, "sigma_log": 0.02}],
    "outlier_rate": 0.01, "seed": 5, "start_date": "2023-02-01",
    "benchmark": "nbody", "platform": "blake"})");
  REQUIRE(spec.segments.size() == 2);
  CHECK(spec.segments[1].geo_mean == 1.15);
  CHECK(spec.seed == 5);
  CHECK(spec.outlier_factor == 10.0);
  CHECK(spec.key.benchmark == "nbody");
  CHECK(spec.key.timer == "Total Time");
  CHECK(spec.start_date == Date::parse("2023-02-01"));

  CHECK_THROWS_AS(synth_spec_from_json("{"), ParseError);
  CHECK_THROWS_AS(synth_spec_from_json(R"({"segments": []})"), InvalidArgument);
  CHECK_THROWS_AS(synth_spec_from_json(R"({"segments": [{"length": 3, "geo_mean": -1}]})"),
                  InvalidArgument);
  CHECK_THROWS_AS(synth_spec_from_json(R"({"nothing": 1})"), ParseError);
}
