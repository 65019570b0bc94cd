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

// Timing records and the append-only JSON-lines store that holds them.
//
// Layout: <root>/<platform>/<benchmark>.jsonl, one record per line:
//   {"date":"YYYY-MM-DD","benchmark":"..","timer":"..","platform":"..",
//    "value":<seconds>,"meta":{"k":"v",...}}

#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "perfsentry/errors.hpp"

namespace perfsentry {

// Calendar day, ISO-8601 on the wire.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days days) : days_(days) {}

  // Throws InvalidArgument unless `text` is a valid YYYY-MM-DD date.
  static Date parse(std::string_view text);
  static Date today_utc();

  std::string iso() const;
  std::chrono::sys_days days() const { return days_; }
  Date plus_days(int n) const { return Date(days_ + std::chrono::days(n)); }

  friend auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

struct MetricKey {
  std::string benchmark;
  std::string timer;
  std::string platform;

  // "benchmark/timer/platform"
  std::string str() const;
  static MetricKey parse(std::string_view slashed);

  friend auto operator<=>(const MetricKey&, const MetricKey&) = default;
};

struct MetricRecord {
  Date date;
  std::string benchmark;
  std::string timer;
  std::string platform;
  double value = 0.0;  // seconds, > 0
  std::map<std::string, std::string> meta;

  MetricKey key() const { return {benchmark, timer, platform}; }
  friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

// Records for one key, ordered by date then by stored order.
struct MetricSeries {
  MetricKey key;
  std::vector<MetricRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  std::vector<double> values() const;
  std::vector<Date> dates() const;
};

struct DateRange {
  std::optional<Date> from;  // inclusive
  std::optional<Date> to;    // inclusive
  bool contains(const Date& d) const {
    return (!from || *from <= d) && (!to || d <= *to);
  }
};

struct KeyCount {
  MetricKey key;
  std::size_t count = 0;
};

// Parses one canonical line. `file`/`line` only decorate error messages.
MetricRecord parse_record(std::string_view line, const std::string& file = {},
                          std::size_t line_no = 0);
std::string serialize_record(const MetricRecord& record);

// Parses a CSV document with header date,benchmark,timer,platform,value.
std::vector<MetricRecord> parse_csv(std::string_view text, const std::string& file = {});
// Reads a .csv or .jsonl file into records.
std::vector<MetricRecord> read_records_file(const std::filesystem::path& path);

// Throws ValidationError if the record breaks an invariant.
void validate_record(const MetricRecord& record, const std::string& file = {},
                     std::size_t line_no = 0);

class Store {
 public:
  explicit Store(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path file_for(const MetricRecord& record) const;

  // Appends in the given order; duplicates are kept. Returns the count.
  std::size_t append(const std::vector<MetricRecord>& records) const;
  MetricSeries load(const MetricKey& key, const DateRange& range = {}) const;
  // Distinct keys in lexicographic (benchmark, timer, platform) order.
  std::vector<KeyCount> list_keys() const;

 private:
  std::filesystem::path root_;
};

// Stable sort by date; used by the store and by in-memory producers.
void sort_by_date(std::vector<MetricRecord>& records);

}  // namespace perfsentry
