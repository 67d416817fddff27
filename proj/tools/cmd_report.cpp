#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include "casad/byte_series.hpp"
#include "casad/errors.hpp"
#include "casad/frame.hpp"
#include "casad/model_io.hpp"
#include "casad/scores_io.hpp"
#include "common.hpp"

namespace casadcli {

namespace {

struct ReportArgs {
  std::string scores_file;
  std::string log_file;
  std::string annotations_file;
  std::string model_file;
  std::size_t lag = 0;
  std::string plot_out;
  std::size_t plot_rows = 10000;
};

void run_report(const ReportArgs& args, const CLI::App*) {
  if (args.scores_file.empty() || args.log_file.empty()) {
    throw casad::InvalidConfig("--scores and --log are required");
  }
  std::size_t lag = args.lag;
  if (!args.model_file.empty()) {
    lag = casad::load_model(args.model_file).lag();
  }
  if (lag == 0) {
    throw casad::InvalidConfig(
        "--L or --model is needed to attribute alarms to windows");
  }

  const casad::DepartureSeries scores =
      casad::read_scores_csv(args.scores_file);
  const casad::FrameLog log = casad::read_log(args.log_file);
  const casad::ByteSeries series = casad::extract_byte_series(log);
  std::vector<casad::Annotation> annotations;
  if (!args.annotations_file.empty()) {
    annotations = casad::read_annotations(args.annotations_file);
  }
  const auto intervals =
      casad::annotation_byte_intervals(log, series, annotations);
  if (scores.end_index() > series.size()) {
    throw casad::DimensionMismatch(
        "score csv indexes beyond the log's byte count");
  }

  // An alarm counts toward a window when its L-byte span overlaps it;
  // alarms whose whole window is attack-free are false alarms.
  auto overlaps = [&](std::size_t alarm_idx,
                      const std::pair<std::size_t, std::size_t>& iv) {
    const std::size_t window_first = alarm_idx >= lag - 1 ? alarm_idx - (lag - 1) : 0;
    return window_first < iv.second && alarm_idx >= iv.first;
  };

  std::size_t false_alarms = 0;
  std::vector<std::size_t> first_alarm(intervals.size(), SIZE_MAX);
  for (std::size_t i = 0; i < scores.alarms.size(); ++i) {
    if (!scores.alarms[i]) continue;
    const std::size_t idx = scores.start_index + i;
    bool attributed = false;
    for (std::size_t w = 0; w < intervals.size(); ++w) {
      if (overlaps(idx, intervals[w])) {
        attributed = true;
        if (idx >= intervals[w].first && first_alarm[w] == SIZE_MAX) {
          first_alarm[w] = idx;
        }
      }
    }
    if (!attributed) ++false_alarms;
  }

  for (std::size_t w = 0; w < intervals.size(); ++w) {
    const auto& [ws, we] = intervals[w];
    const std::string label =
        w < annotations.size() ? annotations[w].label : "attack";
    std::cout << "attack " << w << " (" << label << "): bytes [" << ws << ", "
              << we << ")";
    if (first_alarm[w] == SIZE_MAX) {
      std::cout << " -> NOT DETECTED\n";
      continue;
    }
    const double t_alarm = casad::byte_timestamp(log, series, first_alarm[w]);
    const double t_start = casad::byte_timestamp(log, series, ws);
    std::cout << " -> first alarm at byte " << first_alarm[w] << " (latency "
              << first_alarm[w] - ws << " bytes, "
              << t_alarm - t_start << " s)\n";
  }
  std::cout << "false alarms: " << false_alarms << "\n";

  if (!args.plot_out.empty()) {
    std::ofstream out(args.plot_out);
    if (!out) {
      throw casad::EmptyResult("cannot open plot data file: " + args.plot_out);
    }
    const std::size_t n = scores.scores.size();
    const std::size_t stride = std::max<std::size_t>(1, n / args.plot_rows);
    out << "byte_index,byte,score,alarm\n";
    char buf[96];
    for (std::size_t i = 0; i < n; i += stride) {
      const std::size_t idx = scores.start_index + i;
      std::snprintf(buf, sizeof(buf), "%zu,%u,%.17g,%d\n", idx,
                    static_cast<unsigned>(series.values[idx]),
                    scores.scores[i],
                    scores.alarms.empty() ? 0 : scores.alarms[i]);
      out << buf;
    }
    std::cout << "plot data: " << args.plot_out << "\n";
  }
}

}  // namespace

void register_report(CLI::App& app) {
  auto args = std::make_shared<ReportArgs>();
  CLI::App* cmd = app.add_subcommand(
      "report", "Summarize detection latency and false alarms from a score CSV");
  cmd->add_option("--scores", args->scores_file, "Score CSV from detect");
  cmd->add_option("--log", args->log_file, "The log the scores were computed on");
  cmd->add_option("--annotations", args->annotations_file,
                  "Attack window annotation CSV");
  cmd->add_option("--model", args->model_file,
                  "Model file (supplies L for alarm attribution)");
  cmd->add_option("--L", args->lag, "Lag used for the scores (if no --model)");
  cmd->add_option("--plot-data", args->plot_out,
                  "Write a downsampled byte/score CSV for external plotting");
  cmd->add_option("--plot-rows", args->plot_rows,
                  "Target row count for --plot-data")
      ->capture_default_str();
  cmd->callback([args, cmd] { run_report(*args, cmd); });
}

}  // namespace casadcli
