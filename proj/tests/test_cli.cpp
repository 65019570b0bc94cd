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

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "perfsentry/bench.hpp"
#include "perfsentry/cli.hpp"
#include "perfsentry/store.hpp"
#include "json.hpp"

using namespace perfsentry;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path = fs::temp_directory_path() / ("perfsentry-cli-" + std::to_string(rng()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void store_series(const fs::path& root, const MetricKey& key, std::vector<SynthSegment> segments,
                  std::uint64_t seed = 0) {
  SynthSpec spec;
  spec.key = key;
  spec.segments = std::move(segments);
  spec.seed = seed;
  Store(root).append(synth_generate(spec).records);
}

int run(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "perfsentry");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run_main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("detect exit codes", "[cli]") {
  TempDir dir;
  const auto data = (dir.path / "data").string();
  const auto out = (dir.path / "out").string();

  SECTION("constant series is stable") {
    store_series(data, {"flat", "Total Time", "blake"}, {{40, 1.0, 0.0}});
    CHECK(run({"detect", "--data", data, "--out", out, "--svg"}) == cli::kOk);
    const auto report = read_json(fs::path(out) / "blake" / "flat" / "Total Time.report.json");
    CHECK(report["latest_status"] == "STABLE");
    CHECK(fs::exists(fs::path(out) / "blake" / "flat" / "Total Time.report.md"));
    CHECK(fs::exists(fs::path(out) / "blake" / "flat" / "Total Time.svg"));
    CHECK(read_json(fs::path(out) / "alerts.json")["alerts"].empty());
    CHECK(fs::exists(fs::path(out) / "summary.md"));
  }
  SECTION("fresh regression") {
    store_series(data, {"nbody", "Total Fill", "blake"}, {{30, 1.0, 0.0}, {3, 1.15, 0.0}});
    CHECK(run({"detect", "--data", data, "--out", out}) == cli::kRegression);
    const auto alerts = read_json(fs::path(out) / "alerts.json");
    REQUIRE(alerts["alerts"].size() == 1);
    CHECK(alerts["alerts"][0]["classification"] == "REGRESSION");
    CHECK(alerts["alerts"][0]["ratio"].get<double>() == Catch::Approx(1.15).epsilon(1e-12));
    CHECK(alerts["alerts"][0]["changepoint_date"] == "2022-01-31");
    CHECK(read_json(fs::path(out) / "blake" / "nbody" / "Total Fill.report.json")["latest_status"] ==
          "REGRESSED");
  }
  SECTION("old regression is not re-alerted") {
    store_series(data, {"nbody", "Total Fill", "blake"}, {{30, 1.0, 0.0}, {10, 1.15, 0.0}});
    CHECK(run({"detect", "--data", data, "--out", out}) == cli::kOk);
    CHECK(read_json(fs::path(out) / "alerts.json")["alerts"].empty());
  }
  SECTION("fresh improvement") {
    store_series(data, {"nbody", "Total Fill", "blake"}, {{30, 1.0, 0.0}, {3, 0.8, 0.0}});
    CHECK(run({"detect", "--data", data, "--out", out}) == cli::kImprovement);
    CHECK(run({"detect", "--data", data, "--out", out, "--higher-is-better"}) ==
          cli::kRegression);
  }
  SECTION("regression outranks improvement") {
    store_series(data, {"a", "T", "p"}, {{30, 1.0, 0.0}, {3, 0.8, 0.0}});
    store_series(data, {"b", "T", "p"}, {{30, 1.0, 0.0}, {3, 1.2, 0.0}});
    CHECK(run({"detect", "--data", data, "--out", out, "--serial"}) == cli::kRegression);
    CHECK(read_json(fs::path(out) / "alerts.json")["alerts"].size() == 2);
    CHECK(run({"detect", "--data", data, "--out", out, "--benchmark", "a"}) ==
          cli::kImprovement);
  }
  SECTION("data errors") {
    CHECK(run({"detect", "--data", data, "--out", out}) == cli::kDataError);
    fs::create_directories(data);
    std::string msg;
    CHECK(run({"detect", "--data", data, "--out", out, "--benchmark", "x"}, &msg) ==
          cli::kDataError);
    CHECK(msg.find("no matching series") != std::string::npos);
    store_series(data, {"x", "T", "p"}, {{30, 1.0, 0.0}});
    CHECK(run({"detect", "--data", data, "--out", out, "--platform", "q"}) == cli::kDataError);
    std::ofstream(fs::path(data) / "p" / "x.jsonl", std::ios::app) << "garbage\n";
    CHECK(run({"detect", "--data", data, "--out", out}) == cli::kDataError);
  }
  SECTION("usage errors") {
    CHECK(run({}) == cli::kUsage);
    CHECK(run({"detect", "--data", data}) == cli::kUsage);
    CHECK(run({"detect", "--data", data, "--out", out, "--alpha", "2"}) == cli::kUsage);
    CHECK(run({"detect", "--data", data, "--out", out, "--window", "abc"}) == cli::kUsage);
    CHECK(run({"bogus"}) == cli::kUsage);
    CHECK(run({"compare", "--data", data, "--baseline", "a/b", "--candidate", "a/b/c", "--out",
               out}) == cli::kUsage);
    CHECK(run({"--help"}) == cli::kOk);
  }
}

TEST_CASE("exit code agrees with the alert manifest", "[cli][property]") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> tail(0, 6);
  std::uniform_int_distribution<int> kind(0, 2);
  for (int trial = 0; trial < 30; ++trial) {
    TempDir dir;
    const auto data = (dir.path / "data").string();
    const auto out = (dir.path / "out").string();
    for (int s = 0; s < 3; ++s) {
      const double level = std::array{1.0, 1.3, 0.7}[kind(rng)];
      store_series(data, {"b" + std::to_string(s), "T", "p"},
                   {{30, 1.0, 0.01}, {static_cast<std::size_t>(1 + tail(rng)), level, 0.01}},
                   static_cast<std::uint64_t>(trial * 10 + s));
    }
    const int code = run({"detect", "--data", data, "--out", out});
    bool reg = false;
    bool imp = false;
    const auto manifest = read_json(fs::path(out) / "alerts.json");
    for (const auto& a : manifest["alerts"]) {
      (a["classification"] == "REGRESSION" ? reg : imp) = true;
    }
    const int expect = reg ? cli::kRegression : imp ? cli::kImprovement : cli::kOk;
    CHECK(code == expect);
  }
}

TEST_CASE("compare", "[cli]") {
  TempDir dir;
  const auto data = (dir.path / "data").string();
  const auto out = (dir.path / "out").string();
  SynthSpec spec;
  spec.key = {"tet", "Total Time", "cpu"};
  spec.segments = {{30, 4.0, 0.05}};
  spec.seed = 3;
  auto base = synth_generate(spec);
  auto fast = base;
  for (auto& r : fast.records) {
    r.benchmark = "tet-memo";
    r.value /= 2.0;
  }
  Store(data).append(base.records);
  Store(data).append(fast.records);

  CHECK(run({"compare", "--data", data, "--baseline", "tet/Total Time/cpu", "--candidate",
             "tet-memo/Total Time/cpu", "--out", out}) == cli::kOk);
  const auto doc = read_json(fs::path(out) / "compare.json");
  CHECK(doc["latest"]["speedup"]["ratio"].get<double>() == Catch::Approx(2.0).epsilon(1e-12));
  CHECK(doc["latest"]["speedup"]["lower"].get<double>() == Catch::Approx(2.0).epsilon(1e-12));
  CHECK(doc["paired_dates"] == 30);
  CHECK(slurp(fs::path(out) / "compare.md").find("2.00 (2.00, 2.00)") != std::string::npos);

  CHECK(run({"compare", "--data", data, "--baseline", "tet/Total Time/cpu", "--candidate",
             "tet/Total Time/cpu", "--out", out}) == cli::kOk);
  const auto self = read_json(fs::path(out) / "compare.json");
  CHECK(self["latest"]["speedup"]["ratio"].get<double>() == 1.0);
  CHECK(self["latest"]["p_value"].get<double>() == 1.0);

  spec.key = {"late", "Total Time", "cpu"};
  spec.start_date = Date::parse("2030-01-01");
  Store(data).append(synth_generate(spec).records);
  CHECK(run({"compare", "--data", data, "--baseline", "tet/Total Time/cpu", "--candidate",
             "late/Total Time/cpu", "--out", out}) == cli::kDataError);
}

TEST_CASE("ingest, simulate and run", "[cli]") {
  TempDir dir;
  const auto data = (dir.path / "data").string();
  const auto spec = dir.path / "spec.json";
  std::ofstream(spec) << R"({"segments":[{"length":12,"geo_mean":2.0,"sigma_log":0.1}],"seed":4,)"
                      << R"("benchmark":"sim","platform":"local"})";
  const auto jsonl = dir.path / "sim.jsonl";
  CHECK(run({"simulate", "--spec", spec.string(), "--out", jsonl.string()}) == cli::kOk);
  CHECK(read_records_file(jsonl).size() == 12);
  CHECK(run({"ingest", "--data", data, "--file", jsonl.string()}) == cli::kOk);
  CHECK(Store(data).load({"sim", "Total Time", "local"}).size() == 12);

  std::ofstream(dir.path / "bad.jsonl") << "{}\n";
  CHECK(run({"ingest", "--data", data, "--file", (dir.path / "bad.jsonl").string()}) ==
        cli::kDataError);
  CHECK(Store(data).load({"sim", "Total Time", "local"}).size() == 12);

  CHECK(run({"run", "--data", data, "--benchmark", "true", "--timer", "Total Time", "--platform",
             "local", "--repeats", "2", "--date", "2024-01-01", "--", "true"}) == cli::kOk);
  const auto timed = Store(data).load({"true", "Total Time", "local"});
  REQUIRE(timed.size() == 2);
  CHECK(timed.records[0].date == Date::parse("2024-01-01"));
  CHECK(run({"run", "--data", data, "--benchmark", "f", "--timer", "T", "--platform", "local",
             "--repeats", "1", "--", "false"}) == cli::kDataError);
  CHECK(Store(data).load({"f", "T", "local"}).empty());
}

TEST_CASE("installed executable", "[cli]") {
  const char* exe = std::getenv("PERFSENTRY_CLI");
  if (!exe) SKIP("PERFSENTRY_CLI not set");
  const auto status = std::system((std::string("\"") + exe + "\" > /dev/null 2>&1").c_str());
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == cli::kUsage);
  const auto help = std::system((std::string("\"") + exe + "\" --help > /dev/null").c_str());
  CHECK(WEXITSTATUS(help) == cli::kOk);
}
