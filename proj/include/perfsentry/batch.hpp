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

// Detection over many independent series. The OpenMP kernel and the serial
// reference must produce identical results element for element; the serial
// path stays as the test oracle and benchmark baseline.

#pragma once

#include <exception>
#include <functional>
#include <span>
#include <vector>

#include "perfsentry/changepoint.hpp"

namespace perfsentry {

// One slot per input series. `error` is set instead of `result` when that
// series failed (bad data); other series are unaffected.
struct BatchItem {
  DetectionResult result;
  std::exception_ptr error;
};

std::vector<BatchItem> detect_batch_serial(std::span<const MetricSeries> series,
                                           const DetectionConfig& config);
std::vector<BatchItem> detect_batch_parallel(std::span<const MetricSeries> series,
                                             const DetectionConfig& config);

// Runs fn(i) for i in [0, count) across OpenMP threads; fn must only
// write to state owned by index i.
void parallel_for_index(std::size_t count, const std::function<void(std::size_t)>& fn);

int max_threads();

}  // namespace perfsentry
