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

// Producers of timing records: wall-clock measurement of an external
// command, and a seeded generator of synthetic log-normal series.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "perfsentry/store.hpp"

namespace perfsentry {

struct RunSpec {
  std::vector<std::string> command;
  std::size_t repeats = 1;
  std::size_t warmups = 0;
  MetricKey key;
  std::optional<Date> date_override;
};

// Runs spec.command warmups + repeats times and returns one record per
// timed repeat (end-to-end process wall time, steady clock). Throws
// SpawnError if the command cannot start and NonZeroExit on failure; no
// records are returned in either case.
std::vector<MetricRecord> run_command(const RunSpec& spec);

struct SynthSegment {
  std::size_t length = 1;
  double geo_mean = 1.0;
  double sigma_log = 0.0;
};

struct SynthSpec {
  std::vector<SynthSegment> segments;
  double outlier_rate = 0.0;
  double outlier_factor = 10.0;
  std::uint64_t seed = 0;
  Date start_date = Date::parse("2022-01-01");
  MetricKey key{"synthetic", "Total Time", "local"};

  // Throws InvalidArgument when a field is out of range.
  void validate() const;
};

// splitmix64, as published by Steele, Lea and Flood.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  // (top 53 bits + 0.5) * 2^-53: strictly inside (0, 1).
  double uniform();

 private:
  std::uint64_t state_;
};

// Stream order per observation i:
//   1. z_i: when no normal is cached, draw u1 then u2 and form the pair
//      sqrt(-2 ln u1) * (cos 2pi u2, sin 2pi u2); use the cos value now and
//      cache the sin value for observation i + 1.
//   2. one uniform u; the observation is an outlier iff u < outlier_rate.
// value_i = geo_mean * exp(sigma_log * z_i), times outlier_factor for
// outliers. Dates advance one day per observation from start_date.
MetricSeries synth_generate(const SynthSpec& spec);

// JSON document with the SynthSpec fields; "benchmark", "timer" and
// "platform" are optional.
SynthSpec synth_spec_from_json(const std::string& text);

}  // namespace perfsentry
