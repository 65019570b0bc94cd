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

#include "perfsentry/cli.hpp"

#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "perfsentry/batch.hpp"
#include "perfsentry/bench.hpp"
#include "perfsentry/comparison.hpp"
#include "perfsentry/errors.hpp"
#include "perfsentry/report.hpp"

namespace perfsentry::cli {
namespace fs = std::filesystem;
namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed on " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Timer names are free text; only the path separator needs replacing.
std::string file_stem(std::string s) {
  for (char& c : s) {
    if (c == '/') c = '_';
  }
  return s;
}

bool matches(const DetectOptions& o, const MetricKey& k) {
  return (!o.benchmark || *o.benchmark == k.benchmark) && (!o.timer || *o.timer == k.timer) &&
         (!o.platform || *o.platform == k.platform);
}

}  // namespace

int cmd_detect(const DetectOptions& o, std::ostream& log) {
  try {
    o.config.validate();
  } catch (const InvalidArgument& e) {
    log << "error: " << e.what() << "\n";
    return kUsage;
  }

  std::vector<MetricSeries> series;
  try {
    const Store store(o.data);
    for (const auto& kc : store.list_keys()) {
      if (matches(o, kc.key)) series.push_back(store.load(kc.key));
    }
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kDataError;
  }
  if (series.empty()) {
    log << "error: no matching series\n";
    return kDataError;
  }

  const auto results = o.parallel ? detect_batch_parallel(series, o.config)
                                  : detect_batch_serial(series, o.config);

  bool data_error = false;
  bool regression = false;
  bool improvement = false;
  AlertManifest manifest;
  manifest.generated_at = now_utc_timestamp();
  std::ostringstream summary;
  summary << "# Detection summary\n\n";
  summary << "| series | observations | status | changepoints | new |\n";
  summary << "|---|---:|---|---:|---|\n";

  try {
    for (std::size_t i = 0; i < series.size(); ++i) {
      const auto& s = series[i];
      if (results[i].error) {
        try {
          std::rethrow_exception(results[i].error);
        } catch (const std::exception& e) {
          log << "error: " << s.key.str() << ": " << e.what() << "\n";
        }
        data_error = true;
        continue;
      }
      const auto report = build_report(s, results[i].result, o.config);
      const fs::path dir = o.out / s.key.platform / s.key.benchmark;
      const std::string stem = file_stem(s.key.timer);
      write_text(dir / (stem + ".report.json"), render_json(report));
      write_text(dir / (stem + ".report.md"), render_markdown(report));
      if (o.svg && !s.empty()) write_text(dir / (stem + ".svg"), render_svg(s, report));

      std::string fresh;
      for (const Changepoint* cp : report.newly_confirmed()) {
        manifest.alerts.push_back({s.key, cp->classification, cp->ratio.ratio, cp->ratio.lower,
                                   cp->ratio.upper, cp->date});
        if (cp->classification == Classification::kRegression) {
          regression = true;
        } else {
          improvement = true;
        }
        fresh += std::string(to_string(cp->classification)) + " " +
                 format_ratio_ci(cp->ratio) + " ";
      }
      summary << "| " << s.key.str() << " | " << report.observations << " | "
              << to_string(report.latest_status) << " | " << report.changepoints.size() << " | "
              << fresh << "|\n";
      log << s.key.str() << ": " << to_string(report.latest_status) << ", "
          << report.changepoints.size() << " changepoint(s)"
          << (fresh.empty() ? "" : ", new: " + fresh) << "\n";
    }
    write_text(o.out / "summary.md", summary.str());
    write_text(o.out / "alerts.json", render_alerts_json(manifest));
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kDataError;
  }

  if (data_error) return kDataError;
  if (regression) return kRegression;
  if (improvement) return kImprovement;
  return kOk;
}

int cmd_compare(const CompareOptions& o, std::ostream& log) {
  try {
    o.config.validate();
  } catch (const InvalidArgument& e) {
    log << "error: " << e.what() << "\n";
    return kUsage;
  }
  try {
    const Store store(o.data);
    const auto a = store.load(o.baseline);
    const auto b = store.load(o.candidate);
    const auto paired = pair_by_date(a, b);

    ComparisonReport report;
    report.baseline = o.baseline;
    report.candidate = o.candidate;
    report.paired_dates = paired.size();
    report.segments = comparison_segments(paired, o.config);
    report.summary = latest_relative_performance(paired, o.config);
    report.config_echo = o.config;

    write_text(o.out / "compare.json", render_comparison_json(report));
    write_text(o.out / "compare.md", render_comparison_markdown(report));
    log << "speedup of " << o.candidate.str() << " over " << o.baseline.str() << ": "
        << format_ratio_ci(report.summary.speedup) << ", p=" << report.summary.p_value << "\n";
    return kOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kDataError;
  }
}

int cmd_ingest(const fs::path& data, const fs::path& file, std::ostream& log) {
  try {
    const auto records = read_records_file(file);
    const std::size_t n = Store(data).append(records);
    log << "ingested " << n << " record(s)\n";
    return kOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kDataError;
  }
}

int cmd_run(const RunOptions& o, std::ostream& log) {
  try {
    RunSpec spec{o.command, o.repeats, o.warmups, o.key, o.date};
    const auto records = run_command(spec);
    Store(o.data).append(records);
    for (const auto& r : records) log << r.value << "\n";
    return kOk;
  } catch (const InvalidArgument& e) {
    log << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kDataError;
  }
}

int cmd_simulate(const fs::path& spec_path, const fs::path& out, std::ostream& log) {
  try {
    const auto spec = synth_spec_from_json(read_text(spec_path));
    const auto series = synth_generate(spec);
    std::string text;
    for (const auto& r : series.records) text += serialize_record(r) + "\n";
    write_text(out, text);
    log << "wrote " << series.size() << " record(s) to " << out.string() << "\n";
    return kOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kDataError;
  }
}

namespace {

struct DetectionFlags {
  double alpha = 0.005;
  std::size_t max_tests = 10;
  std::size_t confirm = 3;
  std::size_t window = 30;
  std::size_t min_obs = 5;
  bool exact_dof = false;
  bool higher_is_better = false;

  void attach(CLI::App& app) {
    app.add_option("--alpha", alpha, "significance level")->capture_default_str();
    app.add_option("--max-tests", max_tests, "largest jumps tested per pass")
        ->capture_default_str();
    app.add_option("--confirm", confirm, "consecutive detections to confirm")
        ->capture_default_str();
    app.add_option("--window", window, "lookback window")->capture_default_str();
    app.add_option("--min-obs", min_obs, "minimum window size")->capture_default_str();
    app.add_flag("--exact-dof", exact_dof, "critical value from post-outlier dof");
    app.add_flag("--higher-is-better", higher_is_better, "metric improves upward");
  }

  DetectionConfig config() const {
    DetectionConfig c;
    c.alpha = alpha;
    c.max_tests_k = max_tests;
    c.confirmations_m = confirm;
    c.lookback_w = window;
    c.min_observations = min_obs;
    c.exact_dof = exact_dof;
    c.direction = higher_is_better ? Direction::kHigherIsBetter : Direction::kLowerIsBetter;
    return c;
  }
};

}  // namespace

int run_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"perfsentry: changepoint-based performance regression detection"};
  app.require_subcommand(1);

  std::string data;
  std::string file;
  auto* ingest = app.add_subcommand("ingest", "append JSON-lines or CSV records to the store");
  ingest->add_option("--data", data, "store root")->required();
  ingest->add_option("--file", file, "input .jsonl or .csv")->required();

  RunOptions run_opts;
  std::string run_date;
  auto* run = app.add_subcommand("run", "time a command and store the samples");
  run->add_option("--data", data, "store root")->required();
  run->add_option("--benchmark", run_opts.key.benchmark)->required();
  run->add_option("--timer", run_opts.key.timer)->required();
  run->add_option("--platform", run_opts.key.platform)->required();
  run->add_option("--repeats", run_opts.repeats)->required();
  run->add_option("--warmups", run_opts.warmups)->capture_default_str();
  run->add_option("--date", run_date, "record date (YYYY-MM-DD), default today UTC");
  run->add_option("command", run_opts.command, "command to time, after --")->required();

  std::string spec;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "generate a seeded synthetic series");
  simulate->add_option("--spec", spec, "synthetic spec JSON")->required();
  simulate->add_option("--out", sim_out, "output .jsonl")->required();

  DetectOptions detect_opts;
  DetectionFlags detect_flags;
  std::string benchmark, timer, platform, detect_out;
  bool serial = false;
  auto* detect = app.add_subcommand("detect", "detect changepoints in stored series");
  detect->add_option("--data", data, "store root")->required();
  detect->add_option("--benchmark", benchmark);
  detect->add_option("--timer", timer);
  detect->add_option("--platform", platform);
  detect_flags.attach(*detect);
  detect->add_option("--out", detect_out, "report directory")->required();
  detect->add_flag("--svg", detect_opts.svg, "also write an SVG chart per series");
  detect->add_flag("--serial", serial, "run detection on one thread");

  DetectionFlags compare_flags;
  std::string baseline, candidate, compare_out;
  auto* compare = app.add_subcommand("compare", "paired comparison of two series");
  compare->add_option("--data", data, "store root")->required();
  compare->add_option("--baseline", baseline, "benchmark/timer/platform")->required();
  compare->add_option("--candidate", candidate, "benchmark/timer/platform")->required();
  compare_flags.attach(*compare);
  compare->add_option("--out", compare_out, "report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(data, file, err);
    if (simulate->parsed()) return cmd_simulate(spec, sim_out, err);
    if (run->parsed()) {
      run_opts.data = data;
      if (!run_date.empty()) run_opts.date = Date::parse(run_date);
      return cmd_run(run_opts, out);
    }
    if (detect->parsed()) {
      detect_opts.data = data;
      if (!benchmark.empty()) detect_opts.benchmark = benchmark;
      if (!timer.empty()) detect_opts.timer = timer;
      if (!platform.empty()) detect_opts.platform = platform;
      detect_opts.config = detect_flags.config();
      detect_opts.out = detect_out;
      detect_opts.parallel = !serial;
      return cmd_detect(detect_opts, out);
    }
    if (compare->parsed()) {
      CompareOptions o{data, MetricKey::parse(baseline), MetricKey::parse(candidate),
                       compare_flags.config(), compare_out};
      return cmd_compare(o, out);
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace perfsentry::cli
