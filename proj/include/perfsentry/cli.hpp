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

// Subcommand implementations behind the perfsentry executable. Each returns
// the process exit code and writes human-readable progress to `log`.

#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "perfsentry/changepoint.hpp"
#include "perfsentry/store.hpp"

namespace perfsentry::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kRegression = 3,
  kImprovement = 4,
};

struct DetectOptions {
  std::filesystem::path data;
  std::optional<std::string> benchmark;
  std::optional<std::string> timer;
  std::optional<std::string> platform;
  DetectionConfig config;
  std::filesystem::path out;
  bool svg = false;
  // Per-key detection on OpenMP threads; off runs the serial path.
  bool parallel = true;
};

struct CompareOptions {
  std::filesystem::path data;
  MetricKey baseline;
  MetricKey candidate;
  DetectionConfig config;
  std::filesystem::path out;
};

struct RunOptions {
  std::filesystem::path data;
  MetricKey key;
  std::size_t repeats = 1;
  std::size_t warmups = 0;
  std::vector<std::string> command;
  std::optional<Date> date;
};

// Writes <out>/<platform>/<benchmark>/<timer>.report.{json,md} (and .svg),
// <out>/summary.md and <out>/alerts.json. Exit 3 when a regression was
// confirmed on the newest observation of any series, else 4 when only
// improvements were, else 0; 2 on data errors.
int cmd_detect(const DetectOptions& options, std::ostream& log);

// Writes <out>/compare.json and <out>/compare.md. Exit 0 on success.
int cmd_compare(const CompareOptions& options, std::ostream& log);

int cmd_ingest(const std::filesystem::path& data, const std::filesystem::path& file,
               std::ostream& log);
int cmd_run(const RunOptions& options, std::ostream& log);
int cmd_simulate(const std::filesystem::path& spec, const std::filesystem::path& out,
                 std::ostream& log);

// Parses argv and dispatches; usage errors return 1.
int run_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace perfsentry::cli
