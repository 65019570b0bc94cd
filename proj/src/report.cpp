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

#include "perfsentry/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <sstream>

#include "json.hpp"
#include "perfsentry/errors.hpp"

namespace perfsentry {
namespace {

using ojson = nlohmann::ordered_json;

// JSON has no infinity; t statistics of exact steps are written as strings.
ojson number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

double read_number(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw ParseError("expected a number, got '" + s + "'", {}, 0);
  }
  return j.get<double>();
}

ojson key_json(const MetricKey& k) {
  return {{"benchmark", k.benchmark}, {"timer", k.timer}, {"platform", k.platform}};
}

MetricKey key_from(const nlohmann::json& j) {
  return {j.at("benchmark").get<std::string>(), j.at("timer").get<std::string>(),
          j.at("platform").get<std::string>()};
}

ojson ratio_json(const stats::RatioEstimate& r) {
  return {{"ratio", number(r.ratio)},
          {"lower", number(r.lower)},
          {"upper", number(r.upper)},
          {"confidence", r.confidence}};
}

stats::RatioEstimate ratio_from(const nlohmann::json& j) {
  return {read_number(j.at("ratio")), read_number(j.at("lower")), read_number(j.at("upper")),
          j.at("confidence").get<double>()};
}

ojson segment_json(const Segment& s) {
  return {{"start_index", s.start_index}, {"end_index", s.end_index},
          {"start_date", s.start_date.iso()}, {"end_date", s.end_date.iso()},
          {"n", s.n},
          {"log_mean", number(s.log_mean)},
          {"log_std", number(s.log_std)},
          {"geo_mean", number(s.geo_mean)},
          {"band_low", number(s.band_low)},
          {"band_high", number(s.band_high)}};
}

Segment segment_from(const nlohmann::json& j) {
  Segment s;
  s.start_index = j.at("start_index").get<std::size_t>();
  s.end_index = j.at("end_index").get<std::size_t>();
  s.start_date = Date::parse(j.at("start_date").get<std::string>());
  s.end_date = Date::parse(j.at("end_date").get<std::string>());
  s.n = j.at("n").get<std::size_t>();
  s.log_mean = read_number(j.at("log_mean"));
  s.log_std = read_number(j.at("log_std"));
  s.geo_mean = read_number(j.at("geo_mean"));
  s.band_low = read_number(j.at("band_low"));
  s.band_high = read_number(j.at("band_high"));
  return s;
}

ojson changepoint_json(const Changepoint& c) {
  return {{"index", c.global_index},
          {"date", c.date.iso()},
          {"classification", to_string(c.classification)},
          {"ratio", ratio_json(c.ratio)},
          {"percent_change", number((c.ratio.ratio - 1.0) * 100.0)},
          {"t_statistic", number(c.t_statistic)},
          {"confirmed_at", c.confirmed_at},
          {"confirmed_date", c.confirmed_date.iso()},
          {"before", segment_json(c.before)},
          {"after", segment_json(c.after)}};
}

Classification classification_from(const std::string& s) {
  if (s == "REGRESSION") return Classification::kRegression;
  if (s == "IMPROVEMENT") return Classification::kImprovement;
  throw ParseError("unknown classification '" + s + "'", {}, 0);
}

Changepoint changepoint_from(const nlohmann::json& j) {
  Changepoint c;
  c.global_index = j.at("index").get<std::size_t>();
  c.date = Date::parse(j.at("date").get<std::string>());
  c.classification = classification_from(j.at("classification").get<std::string>());
  c.ratio = ratio_from(j.at("ratio"));
  c.t_statistic = read_number(j.at("t_statistic"));
  c.confirmed_at = j.at("confirmed_at").get<std::size_t>();
  c.confirmed_date = Date::parse(j.at("confirmed_date").get<std::string>());
  c.before = segment_from(j.at("before"));
  c.after = segment_from(j.at("after"));
  return c;
}

ojson config_json(const DetectionConfig& c) {
  return {{"alpha", c.alpha},
          {"max_tests_k", c.max_tests_k},
          {"confirmations_m", c.confirmations_m},
          {"lookback_w", c.lookback_w},
          {"min_observations", c.min_observations},
          {"outlier_threshold", c.outliers.threshold},
          {"outlier_max_fraction", c.outliers.max_fraction},
          {"outliers_enabled", c.outliers.enabled},
          {"direction", to_string(c.direction)},
          {"use_log", c.use_log},
          {"exact_dof", c.exact_dof}};
}

DetectionConfig config_from(const nlohmann::json& j) {
  DetectionConfig c;
  c.alpha = j.at("alpha").get<double>();
  c.max_tests_k = j.at("max_tests_k").get<std::size_t>();
  c.confirmations_m = j.at("confirmations_m").get<std::size_t>();
  c.lookback_w = j.at("lookback_w").get<std::size_t>();
  c.min_observations = j.at("min_observations").get<std::size_t>();
  c.outliers.threshold = j.at("outlier_threshold").get<double>();
  c.outliers.max_fraction = j.at("outlier_max_fraction").get<double>();
  c.outliers.enabled = j.at("outliers_enabled").get<bool>();
  const auto dir = j.at("direction").get<std::string>();
  if (dir == "LOWER_IS_BETTER") {
    c.direction = Direction::kLowerIsBetter;
  } else if (dir == "HIGHER_IS_BETTER") {
    c.direction = Direction::kHigherIsBetter;
  } else {
    throw ParseError("unknown direction '" + dir + "'", {}, 0);
  }
  c.use_log = j.at("use_log").get<bool>();
  c.exact_dof = j.at("exact_dof").get<bool>();
  return c;
}

LatestStatus status_from(const std::string& s) {
  if (s == "STABLE") return LatestStatus::kStable;
  if (s == "REGRESSED") return LatestStatus::kRegressed;
  if (s == "IMPROVED") return LatestStatus::kImproved;
  throw ParseError("unknown status '" + s + "'", {}, 0);
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string general(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string md_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

const char* to_string(LatestStatus s) {
  switch (s) {
    case LatestStatus::kStable: return "STABLE";
    case LatestStatus::kRegressed: return "REGRESSED";
    case LatestStatus::kImproved: return "IMPROVED";
  }
  return "STABLE";
}

std::vector<const Changepoint*> MetricReport::newly_confirmed() const {
  std::vector<const Changepoint*> out;
  if (observations == 0) return out;
  for (const auto& c : changepoints) {
    if (c.confirmed_at + 1 == observations) out.push_back(&c);
  }
  return out;
}

MetricReport build_report(const MetricSeries& series, const DetectionResult& result,
                          const DetectionConfig& config) {
  MetricReport r;
  r.key = series.key;
  r.observations = series.size();
  r.log_scale = config.use_log;
  r.segments = result.segments;
  r.changepoints = result.changepoints;
  r.config_echo = config;
  if (!r.changepoints.empty()) {
    r.latest_status = r.changepoints.back().classification == Classification::kRegression
                          ? LatestStatus::kRegressed
                          : LatestStatus::kImproved;
  }
  return r;
}

std::string render_json(const MetricReport& r) {
  ojson doc;
  doc["key"] = key_json(r.key);
  doc["observations"] = r.observations;
  doc["log_scale"] = r.log_scale;
  doc["latest_status"] = to_string(r.latest_status);
  ojson segs = ojson::array();
  for (const auto& s : r.segments) segs.push_back(segment_json(s));
  doc["segments"] = std::move(segs);
  ojson cps = ojson::array();
  for (const auto& c : r.changepoints) cps.push_back(changepoint_json(c));
  doc["changepoints"] = std::move(cps);
  doc["config"] = config_json(r.config_echo);
  return doc.dump(2) + "\n";
}

MetricReport parse_report_json(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    MetricReport r;
    r.key = key_from(doc.at("key"));
    r.observations = doc.at("observations").get<std::size_t>();
    r.log_scale = doc.at("log_scale").get<bool>();
    r.latest_status = status_from(doc.at("latest_status").get<std::string>());
    for (const auto& s : doc.at("segments")) r.segments.push_back(segment_from(s));
    for (const auto& c : doc.at("changepoints")) r.changepoints.push_back(changepoint_from(c));
    r.config_echo = config_from(doc.at("config"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid report: ") + e.what(), {}, 0);
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid report: ") + e.what(), {}, 0);
  }
}

std::string format_ratio_ci(const stats::RatioEstimate& r) {
  int decimals = 2;
  for (; decimals < 6; ++decimals) {
    const auto mid = fixed(r.ratio, decimals);
    const auto lo = fixed(r.lower, decimals);
    const auto hi = fixed(r.upper, decimals);
    const bool collapsed = (lo == mid && r.lower != r.ratio) || (hi == mid && r.upper != r.ratio);
    const bool hides_change = mid == fixed(1.0, decimals) && r.ratio != 1.0;
    if (!collapsed && !hides_change) break;
  }
  return fixed(r.ratio, decimals) + " (" + fixed(r.lower, decimals) + ", " +
         fixed(r.upper, decimals) + ")";
}

std::string format_percent_change(double ratio) {
  const double pct = (ratio - 1.0) * 100.0;
  return (pct >= 0.0 ? "+" : "") + fixed(pct, 1) + "%";
}

std::string render_markdown(const MetricReport& r) {
  std::ostringstream md;
  md << "# " << md_escape(r.key.benchmark) << " / " << md_escape(r.key.timer) << " / "
     << md_escape(r.key.platform) << "\n\n";
  md << "Status: **" << to_string(r.latest_status) << "** over " << r.observations
     << " observations";
  if (!r.segments.empty()) {
    md << " (" << r.segments.front().start_date.iso() << " to "
       << r.segments.back().end_date.iso() << ")";
  }
  md << "\n\n";
  const auto& c = r.config_echo;
  md << "Detection: alpha=" << general(c.alpha) << ", k=" << c.max_tests_k
     << ", m=" << c.confirmations_m << ", w=" << c.lookback_w
     << ", min_obs=" << c.min_observations << ", " << to_string(c.direction)
     << (c.use_log ? ", log scale" : ", linear scale") << (c.exact_dof ? ", exact dof" : "")
     << ". Ratios are after/before geometric means with 99% CI (LL, UL).\n\n";

  md << "## Segments\n\n";
  md << "| from | to | n | geo mean | -2 sigma | +2 sigma |\n";
  md << "|---|---|---:|---:|---:|---:|\n";
  for (const auto& s : r.segments) {
    md << "| " << s.start_date.iso() << " | " << s.end_date.iso() << " | " << s.n << " | "
       << general(s.geo_mean) << " | " << general(s.band_low) << " | " << general(s.band_high)
       << " |\n";
  }

  if (!r.changepoints.empty()) {
    md << "\n## Changepoints\n\n";
    md << "| date | index | ratio (99% CI) | change | t | confirmed |\n";
    md << "|---|---:|---|---:|---:|---|\n";
    for (const auto& cp : r.changepoints) {
      md << "| " << cp.date.iso() << " | " << cp.global_index << " | "
         << format_ratio_ci(cp.ratio) << " " << to_string(cp.classification) << " | "
         << format_percent_change(cp.ratio.ratio) << " | " << general(cp.t_statistic) << " | "
         << cp.confirmed_date.iso() << " |\n";
    }
  }
  return md.str();
}

std::string render_svg(const MetricSeries& series, const MetricReport& report) {
  constexpr double kWidth = 800.0;
  constexpr double kHeight = 400.0;
  constexpr double kLeft = 70.0;
  constexpr double kRight = 20.0;
  constexpr double kTop = 40.0;
  constexpr double kBottom = 50.0;

  const auto values = series.values();
  if (values.empty()) throw InvalidArgument("cannot chart an empty series");

  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  for (const auto& s : report.segments) {
    if (s.band_low > 0.0) lo = std::min(lo, s.band_low);
    hi = std::max(hi, s.band_high);
  }
  if (!(lo > 0.0)) lo = hi / 10.0;
  double log_lo = std::log10(lo);
  double log_hi = std::log10(hi);
  const double pad = std::max((log_hi - log_lo) * 0.05, 0.02);
  log_lo -= pad;
  log_hi += pad;

  const std::size_t n = values.size();
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double i) {
    return n == 1 ? kLeft + plot_w / 2.0 : kLeft + plot_w * i / static_cast<double>(n - 1);
  };
  auto py = [&](double v) {
    const double lv = std::log10(std::max(v, std::pow(10.0, log_lo)));
    return kTop + plot_h * (log_hi - lv) / (log_hi - log_lo);
  };
  auto num = [](double v) { return fixed(v, 2); };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(report.key.str()) << "</text>\n";

  // Axes and decade-ish ticks on the log axis.
  svg << "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop + plot_h << "\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << kTop + plot_h << "\"/>\n";
  svg << "</g>\n";
  svg << "<g font-size=\"10\" text-anchor=\"end\">\n";
  for (int t = 0; t <= 4; ++t) {
    const double lv = log_lo + (log_hi - log_lo) * t / 4.0;
    const double y = kTop + plot_h * (log_hi - lv) / (log_hi - log_lo);
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(y + 3) << "\">"
        << general(std::pow(10.0, lv)) << "</text>\n";
  }
  svg << "</g>\n";
  svg << "<g font-size=\"10\" text-anchor=\"middle\">\n";
  svg << "<text x=\"" << num(px(0)) << "\" y=\"" << kTop + plot_h + 16 << "\">"
      << series.records.front().date.iso() << "</text>\n";
  if (n > 1) {
    svg << "<text x=\"" << num(px(static_cast<double>(n - 1))) << "\" y=\""
        << kTop + plot_h + 16 << "\">" << series.records.back().date.iso() << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10
      << "\">observation date</text>\n";
  svg << "</g>\n";

  svg << "<g fill=\"#1f77b4\">\n";
  for (std::size_t i = 0; i < n; ++i) {
    svg << "<circle cx=\"" << num(px(static_cast<double>(i))) << "\" cy=\"" << num(py(values[i]))
        << "\" r=\"2.5\"/>\n";
  }
  svg << "</g>\n";

  svg << "<g stroke=\"#d62728\" stroke-width=\"1.5\" fill=\"none\">\n";
  for (const auto& s : report.segments) {
    // Single-observation segments still get a visible line.
    const double x1 = px(static_cast<double>(s.start_index)) - (s.n == 1 ? 3.0 : 0.0);
    const double x2 = px(static_cast<double>(s.end_index)) + (s.n == 1 ? 3.0 : 0.0);
    svg << "<line class=\"mean\" x1=\"" << num(x1) << "\" y1=\"" << num(py(s.geo_mean))
        << "\" x2=\"" << num(x2) << "\" y2=\"" << num(py(s.geo_mean)) << "\"/>\n";
    for (const double band : {s.band_low, s.band_high}) {
      svg << "<line class=\"band\" stroke-dasharray=\"4 3\" x1=\"" << num(x1) << "\" y1=\""
          << num(py(band)) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(py(band)) << "\"/>\n";
    }
  }
  svg << "</g>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::string now_utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  ::gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string render_alerts_json(const AlertManifest& m) {
  ojson doc;
  doc["generated_at"] = m.generated_at;
  ojson alerts = ojson::array();
  for (const auto& a : m.alerts) {
    alerts.push_back({{"key", key_json(a.key)},
                      {"classification", to_string(a.classification)},
                      {"ratio", number(a.ratio)},
                      {"ci_low", number(a.ci_low)},
                      {"ci_high", number(a.ci_high)},
                      {"changepoint_date", a.changepoint_date.iso()}});
  }
  doc["alerts"] = std::move(alerts);
  return doc.dump(2) + "\n";
}

std::string render_comparison_json(const ComparisonReport& r) {
  ojson doc;
  doc["baseline"] = key_json(r.baseline);
  doc["candidate"] = key_json(r.candidate);
  doc["orientation"] = "diff = log(baseline) - log(candidate); speedup > 1 means candidate is faster";
  doc["paired_dates"] = r.paired_dates;
  ojson segs = ojson::array();
  for (const auto& s : r.segments.segments) {
    ojson j = segment_json(s.segment);
    j["speedup"] = ratio_json(s.speedup);
    segs.push_back(std::move(j));
  }
  doc["segments"] = std::move(segs);
  ojson cps = ojson::array();
  for (const auto& c : r.segments.detection.changepoints) {
    cps.push_back({{"index", c.global_index},
                   {"date", c.date.iso()},
                   {"t_statistic", number(c.t_statistic)},
                   {"confirmed_date", c.confirmed_date.iso()}});
  }
  doc["changepoints"] = std::move(cps);
  const auto& s = r.summary;
  doc["latest"] = {{"from", s.from.iso()},
                   {"to", s.to.iso()},
                   {"n_paired", s.n_paired},
                   {"n_a", s.n_a},
                   {"n_b", s.n_b},
                   {"mean_a", number(s.mean_a)},
                   {"mean_b", number(s.mean_b)},
                   {"std_a", number(s.std_a)},
                   {"std_b", number(s.std_b)},
                   {"speedup", ratio_json(s.speedup)},
                   {"t_statistic", number(s.t_statistic)},
                   {"dof", s.dof},
                   {"standard_error", number(s.standard_error)},
                   {"p_value", number(s.p_value)}};
  doc["config"] = config_json(r.config_echo);
  return doc.dump(2) + "\n";
}

std::string render_comparison_markdown(const ComparisonReport& r) {
  std::ostringstream md;
  md << "# " << md_escape(r.candidate.str()) << " vs " << md_escape(r.baseline.str()) << "\n\n";
  md << "Baseline a = `" << md_escape(r.baseline.str()) << "`, candidate b = `"
     << md_escape(r.candidate.str())
     << "`. Speedup = exp(mean(log a - log b)); above 1 means the candidate is faster. "
     << r.paired_dates << " paired dates.\n\n";
  md << "## Segments\n\n";
  md << "| from | to | n | speedup (99% CI) |\n";
  md << "|---|---|---:|---|\n";
  for (const auto& s : r.segments.segments) {
    md << "| " << s.segment.start_date.iso() << " | " << s.segment.end_date.iso() << " | "
       << s.segment.n << " | " << format_ratio_ci(s.speedup) << " |\n";
  }
  const auto& s = r.summary;
  md << "\n## Since last changepoint\n\n";
  md << "| | baseline | candidate |\n|---|---:|---:|\n";
  md << "| samples | " << s.n_a << " | " << s.n_b << " |\n";
  md << "| mean (s) | " << general(s.mean_a) << " | " << general(s.mean_b) << " |\n";
  md << "| std (s) | " << general(s.std_a) << " | " << general(s.std_b) << " |\n\n";
  md << "Speedup " << format_ratio_ci(s.speedup) << " over " << s.from.iso() << " to "
     << s.to.iso() << " (" << s.n_paired << " dates), standard error "
     << general(s.standard_error) << ", p-value " << general(s.p_value) << ".\n";
  return md.str();
}

}  // namespace perfsentry
