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

#include "perfsentry/bench.hpp"

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstring>
#include <numbers>

#include "json.hpp"
#include "perfsentry/errors.hpp"

extern char** environ;

namespace perfsentry {
namespace {

// Spawns argv and waits; returns the exit status.
int spawn_and_wait(const std::vector<std::string>& command) {
  std::vector<char*> argv;
  argv.reserve(command.size() + 1);
  for (const auto& arg : command) argv.push_back(const_cast<char*>(arg.c_str()));
  argv.push_back(nullptr);

  pid_t pid = 0;
  const int rc = ::posix_spawnp(&pid, argv[0], nullptr, nullptr, argv.data(), environ);
  if (rc != 0) throw SpawnError("cannot start '" + command[0] + "': " + std::strerror(rc));

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw SpawnError(std::string("waitpid failed: ") + std::strerror(errno));
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

std::string host_name() {
  char buf[256] = {};
  if (::gethostname(buf, sizeof buf - 1) != 0) return "unknown";
  return buf;
}

}  // namespace

std::vector<MetricRecord> run_command(const RunSpec& spec) {
  if (spec.command.empty()) throw InvalidArgument("no command given");
  if (spec.repeats < 1) throw InvalidArgument("repeats must be at least 1");
  const Date date = spec.date_override.value_or(Date::today_utc());
  const std::string host = host_name();

  for (std::size_t i = 0; i < spec.warmups; ++i) {
    if (const int code = spawn_and_wait(spec.command); code != 0) throw NonZeroExit(code);
  }

  std::vector<MetricRecord> out;
  out.reserve(spec.repeats);
  for (std::size_t i = 0; i < spec.repeats; ++i) {
    const auto start = std::chrono::steady_clock::now();
    const int code = spawn_and_wait(spec.command);
    const auto stop = std::chrono::steady_clock::now();
    if (code != 0) throw NonZeroExit(code);
    MetricRecord r;
    r.date = date;
    r.benchmark = spec.key.benchmark;
    r.timer = spec.key.timer;
    r.platform = spec.key.platform;
    r.value = std::chrono::duration<double>(stop - start).count();
    r.meta = {{"exit_status", std::to_string(code)}, {"host", host},
              {"repeat", std::to_string(i)}};
    out.push_back(std::move(r));
  }
  return out;
}

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() {
  return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

void SynthSpec::validate() const {
  if (segments.empty()) throw InvalidArgument("synthetic spec needs at least one segment");
  for (const auto& s : segments) {
    if (s.length < 1) throw InvalidArgument("segment length must be at least 1");
    if (!(s.geo_mean > 0.0)) throw InvalidArgument("segment geo_mean must be positive");
    if (!(s.sigma_log >= 0.0)) throw InvalidArgument("segment sigma_log must be non-negative");
  }
  if (!(outlier_rate >= 0.0 && outlier_rate <= 1.0)) {
    throw InvalidArgument("outlier_rate must lie in [0, 1]");
  }
  if (!(outlier_factor > 0.0)) throw InvalidArgument("outlier_factor must be positive");
  if (key.benchmark.empty() || key.timer.empty() || key.platform.empty()) {
    throw InvalidArgument("synthetic key components must be non-empty");
  }
}

MetricSeries synth_generate(const SynthSpec& spec) {
  spec.validate();
  SplitMix64 rng(spec.seed);
  bool have_cached = false;
  double cached = 0.0;

  MetricSeries series;
  series.key = spec.key;
  Date date = spec.start_date;
  for (const auto& seg : spec.segments) {
    for (std::size_t i = 0; i < seg.length; ++i) {
      double z;
      if (have_cached) {
        z = cached;
        have_cached = false;
      } else {
        const double u1 = rng.uniform();
        const double u2 = rng.uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        z = radius * std::cos(angle);
        cached = radius * std::sin(angle);
        have_cached = true;
      }
      const bool outlier = rng.uniform() < spec.outlier_rate;

      MetricRecord r;
      r.date = date;
      r.benchmark = spec.key.benchmark;
      r.timer = spec.key.timer;
      r.platform = spec.key.platform;
      r.value = seg.geo_mean * std::exp(seg.sigma_log * z);
      if (outlier) r.value *= spec.outlier_factor;
      series.records.push_back(std::move(r));
      date = date.plus_days(1);
    }
  }
  return series;
}

SynthSpec synth_spec_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed synthetic spec: ") + e.what(), {}, 0);
  }
  SynthSpec spec;
  try {
    for (const auto& s : doc.at("segments")) {
      spec.segments.push_back({s.at("length").get<std::size_t>(), s.at("geo_mean").get<double>(),
                               s.value("sigma_log", 0.0)});
    }
    spec.outlier_rate = doc.value("outlier_rate", 0.0);
    spec.outlier_factor = doc.value("outlier_factor", 10.0);
    spec.seed = doc.value("seed", std::uint64_t{0});
    if (doc.contains("start_date")) {
      spec.start_date = Date::parse(doc.at("start_date").get<std::string>());
    }
    spec.key.benchmark = doc.value("benchmark", spec.key.benchmark);
    spec.key.timer = doc.value("timer", spec.key.timer);
    spec.key.platform = doc.value("platform", spec.key.platform);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid synthetic spec: ") + e.what(), {}, 0);
  }
  spec.validate();
  return spec;
}

}  // namespace perfsentry
