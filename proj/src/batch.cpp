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

#include "perfsentry/batch.hpp"

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace perfsentry {
namespace {

BatchItem detect_one(const MetricSeries& series, const DetectionConfig& config) {
  BatchItem item;
  try {
    item.result = sequential_detect(series, config);
  } catch (...) {
    item.error = std::current_exception();
  }
  return item;
}

}  // namespace

std::vector<BatchItem> detect_batch_serial(std::span<const MetricSeries> series,
                                           const DetectionConfig& config) {
  config.validate();
  std::vector<BatchItem> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = detect_one(series[i], config);
  return out;
}

std::vector<BatchItem> detect_batch_parallel(std::span<const MetricSeries> series,
                                             const DetectionConfig& config) {
  config.validate();
  std::vector<BatchItem> out(series.size());
  const auto n = static_cast<std::int64_t>(series.size());
  // Series lengths vary widely across keys, hence dynamic scheduling.
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = detect_one(series[static_cast<std::size_t>(i)], config);
  }
  return out;
}

void parallel_for_index(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const auto n = static_cast<std::int64_t>(count);
  std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace perfsentry
