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

#include "perfsentry/store.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"
#include "perfsentry/errors.hpp"

namespace perfsentry {
namespace fs = std::filesystem;
using nlohmann::json;

Date Date::parse(std::string_view text) {
  auto bad = [&] { return InvalidArgument("invalid date '" + std::string(text) + "'"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
  auto digits = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(text[i]))) throw bad();
      v = v * 10 + (text[i] - '0');
    }
    return v;
  };
  const std::chrono::year_month_day ymd{std::chrono::year(digits(0, 4)),
                                        std::chrono::month(static_cast<unsigned>(digits(5, 2))),
                                        std::chrono::day(static_cast<unsigned>(digits(8, 2)))};
  if (!ymd.ok()) throw bad();
  return Date(std::chrono::sys_days(ymd));
}

Date Date::today_utc() {
  return Date(std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now()));
}

std::string Date::iso() const {
  const std::chrono::year_month_day ymd{days_};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string MetricKey::str() const { return benchmark + "/" + timer + "/" + platform; }

MetricKey MetricKey::parse(std::string_view slashed) {
  const auto first = slashed.find('/');
  const auto last = slashed.rfind('/');
  if (first == std::string_view::npos || first == last) {
    throw InvalidArgument("expected benchmark/timer/platform, got '" + std::string(slashed) + "'");
  }
  MetricKey key{std::string(slashed.substr(0, first)),
                std::string(slashed.substr(first + 1, last - first - 1)),
                std::string(slashed.substr(last + 1))};
  if (key.benchmark.empty() || key.timer.empty() || key.platform.empty()) {
    throw InvalidArgument("empty component in key '" + std::string(slashed) + "'");
  }
  return key;
}

std::vector<double> MetricSeries::values() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.value);
  return out;
}

std::vector<Date> MetricSeries::dates() const {
  std::vector<Date> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.date);
  return out;
}

namespace {

bool usable_path_component(const std::string& s) {
  return s != "." && s != ".." && s.find('/') == std::string::npos &&
         s.find('\0') == std::string::npos;
}

std::string required_string(const json& obj, const char* field, const std::string& file,
                            std::size_t line_no) {
  const auto it = obj.find(field);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + field + "'", file, line_no);
  if (!it->is_string()) {
    throw ParseError(std::string("field '") + field + "' must be a string", file, line_no);
  }
  return it->get<std::string>();
}

}  // namespace

void validate_record(const MetricRecord& r, const std::string& file, std::size_t line_no) {
  if (!(r.value > 0.0) || !std::isfinite(r.value)) {
    throw ValidationError("value must be a positive finite number of seconds", file, line_no);
  }
  if (r.benchmark.empty() || r.timer.empty() || r.platform.empty()) {
    throw ValidationError("benchmark, timer and platform must be non-empty", file, line_no);
  }
  if (!usable_path_component(r.benchmark) || !usable_path_component(r.platform)) {
    throw ValidationError("benchmark and platform must not contain '/' or be '.'/'..'", file,
                          line_no);
  }
}

MetricRecord parse_record(std::string_view line, const std::string& file, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), file, line_no);
  }
  if (!obj.is_object()) throw ParseError("record must be a JSON object", file, line_no);

  MetricRecord r;
  const std::string date = required_string(obj, "date", file, line_no);
  try {
    r.date = Date::parse(date);
  } catch (const InvalidArgument& e) {
    throw ValidationError(e.what(), file, line_no);
  }
  r.benchmark = required_string(obj, "benchmark", file, line_no);
  r.timer = required_string(obj, "timer", file, line_no);
  r.platform = required_string(obj, "platform", file, line_no);

  const auto value = obj.find("value");
  if (value == obj.end()) throw ParseError("missing field 'value'", file, line_no);
  if (!value->is_number()) throw ParseError("field 'value' must be a number", file, line_no);
  r.value = value->get<double>();

  if (const auto meta = obj.find("meta"); meta != obj.end() && !meta->is_null()) {
    if (!meta->is_object()) throw ParseError("field 'meta' must be an object", file, line_no);
    for (const auto& [k, v] : meta->items()) {
      if (!v.is_string()) {
        throw ParseError("meta value for '" + k + "' must be a string", file, line_no);
      }
      r.meta.emplace(k, v.get<std::string>());
    }
  }
  validate_record(r, file, line_no);
  return r;
}

std::string serialize_record(const MetricRecord& r) {
  nlohmann::ordered_json obj;
  obj["date"] = r.date.iso();
  obj["benchmark"] = r.benchmark;
  obj["timer"] = r.timer;
  obj["platform"] = r.platform;
  obj["value"] = r.value;
  if (!r.meta.empty()) {
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.meta) meta[k] = v;
    obj["meta"] = std::move(meta);
  }
  return obj.dump();
}

namespace {

std::vector<std::string> split_csv_row(const std::string& row) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < row.size(); ++i) {
    const char c = row[i];
    if (quoted) {
      if (c == '"' && i + 1 < row.size() && row[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

std::vector<MetricRecord> parse_csv(std::string_view text, const std::string& file) {
  std::istringstream in{std::string(text)};
  std::string row;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, row)) {
    ++line_no;
    row = trim(row);
    if (row.empty()) continue;
    for (auto& h : split_csv_row(row)) header.push_back(trim(h));
  }
  if (header.empty()) return {};

  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column[header[i]] = i;
  for (const char* required : {"date", "benchmark", "timer", "platform", "value"}) {
    if (!column.contains(required)) {
      throw ParseError(std::string("CSV header is missing column '") + required + "'", file,
                       line_no);
    }
  }

  std::vector<MetricRecord> out;
  while (std::getline(in, row)) {
    ++line_no;
    if (trim(row).empty()) continue;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    auto cells = split_csv_row(row);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " columns, got " +
                           std::to_string(cells.size()),
                       file, line_no);
    }
    MetricRecord r;
    try {
      r.date = Date::parse(trim(cells[column["date"]]));
    } catch (const InvalidArgument& e) {
      throw ValidationError(e.what(), file, line_no);
    }
    r.benchmark = cells[column["benchmark"]];
    r.timer = cells[column["timer"]];
    r.platform = cells[column["platform"]];
    const std::string value = trim(cells[column["value"]]);
    std::size_t used = 0;
    try {
      r.value = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) {
      throw ParseError("value '" + value + "' is not a number", file, line_no);
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
      const auto& name = header[i];
      if (name != "date" && name != "benchmark" && name != "timer" && name != "platform" &&
          name != "value") {
        r.meta.emplace(name, cells[i]);
      }
    }
    validate_record(r, file, line_no);
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

std::vector<MetricRecord> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<MetricRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    out.push_back(parse_record(line, path.string(), line_no));
  }
  if (in.bad()) throw IoError("error reading " + path.string());
  return out;
}

}  // namespace

std::vector<MetricRecord> read_records_file(const fs::path& path) {
  if (path.extension() == ".csv") {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), path.string());
  }
  return read_jsonl(path);
}

void sort_by_date(std::vector<MetricRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const MetricRecord& a, const MetricRecord& b) { return a.date < b.date; });
}

fs::path Store::file_for(const MetricRecord& record) const {
  return root_ / record.platform / (record.benchmark + ".jsonl");
}

std::size_t Store::append(const std::vector<MetricRecord>& records) const {
  if (records.empty()) return 0;
  // Group by destination file while keeping input order within each file.
  std::vector<std::pair<fs::path, std::string>> batches;
  for (const auto& r : records) {
    validate_record(r);
    const auto path = file_for(r);
    auto it = std::find_if(batches.begin(), batches.end(),
                           [&](const auto& b) { return b.first == path; });
    if (it == batches.end()) {
      batches.emplace_back(path, std::string());
      it = std::prev(batches.end());
    }
    it->second += serialize_record(r);
    it->second += '\n';
  }
  for (const auto& [path, text] : batches) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for append");
    out << text;
    out.flush();
    if (!out) throw IoError("write failed on " + path.string());
  }
  return records.size();
}

MetricSeries Store::load(const MetricKey& key, const DateRange& range) const {
  MetricSeries series{key, {}};
  const fs::path path = root_ / key.platform / (key.benchmark + ".jsonl");
  std::error_code ec;
  if (!fs::exists(path, ec)) {
    if (ec) throw IoError("cannot stat " + path.string() + ": " + ec.message());
    return series;
  }
  for (auto& r : read_jsonl(path)) {
    if (r.key() == key && range.contains(r.date)) series.records.push_back(std::move(r));
  }
  sort_by_date(series.records);
  return series;
}

std::vector<KeyCount> Store::list_keys() const {
  std::error_code ec;
  if (!fs::is_directory(root_, ec)) throw IoError("store root " + root_.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& platform : fs::directory_iterator(root_, ec)) {
    if (!platform.is_directory()) continue;
    for (const auto& file : fs::directory_iterator(platform.path(), ec)) {
      if (file.is_regular_file() && file.path().extension() == ".jsonl") {
        files.push_back(file.path());
      }
    }
  }
  if (ec) throw IoError("cannot scan " + root_.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());

  std::map<MetricKey, std::size_t> counts;
  for (const auto& f : files) {
    for (const auto& r : read_jsonl(f)) ++counts[r.key()];
  }
  std::vector<KeyCount> out;
  out.reserve(counts.size());
  for (const auto& [k, n] : counts) out.push_back({k, n});
  return out;
}

}  // namespace perfsentry
