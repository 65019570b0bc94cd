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

// Serial reference vs OpenMP kernel for detection over many series.

#include <benchmark/benchmark.h>

#include <vector>

#include "perfsentry/batch.hpp"
#include "perfsentry/bench.hpp"

namespace {

std::vector<perfsentry::MetricSeries> corpus(std::size_t count, std::size_t length) {
  std::vector<perfsentry::MetricSeries> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    perfsentry::SynthSpec spec;
    spec.seed = i;
    spec.outlier_rate = 0.01;
    spec.segments = {{length / 2, 1.0, 0.03}, {length - length / 2, 1.0 + 0.1 * (i % 3), 0.03}};
    out.push_back(perfsentry::synth_generate(spec));
  }
  return out;
}

void BM_DetectSerial(benchmark::State& state) {
  const auto series = corpus(static_cast<std::size_t>(state.range(0)), 200);
  for (auto _ : state) {
    benchmark::DoNotOptimize(perfsentry::detect_batch_serial(series, {}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_DetectParallel(benchmark::State& state) {
  const auto series = corpus(static_cast<std::size_t>(state.range(0)), 200);
  for (auto _ : state) {
    benchmark::DoNotOptimize(perfsentry::detect_batch_parallel(series, {}));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = perfsentry::max_threads();
}

BENCHMARK(BM_DetectSerial)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DetectParallel)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
