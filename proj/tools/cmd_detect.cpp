#include <iostream>
#include <memory>
#include <optional>

#include "casad/byte_series.hpp"
#include "casad/errors.hpp"
#include "casad/frame.hpp"
#include "casad/model_io.hpp"
#include "casad/scores_io.hpp"
#include "casad/ssa.hpp"
#include "common.hpp"

namespace casadcli {

namespace {

struct DetectArgs {
  std::string log_file;
  std::string model_file;
  std::string config_file;
  std::string out = "scores.csv";
  double threshold = 0.0;
  bool threshold_given = false;
  std::string tuning_file;
  std::size_t start_byte = 0;
  std::string id_filter;
  bool skip_bad_lines = false;
};

void run_detect(const DetectArgs& args, const CLI::App* cmd) {
  DetectArgs a = args;
  if (!a.config_file.empty()) {
    const ConfigSection cfg = ConfigSection::load(a.config_file, "detect");
    cfg.apply_string(cmd, "--log", "log", a.log_file);
    cfg.apply_string(cmd, "--model", "model", a.model_file);
    cfg.apply_string(cmd, "--out", "out", a.out);
    cfg.apply_size(cmd, "--start-byte", "start_byte", a.start_byte);
  }
  if (a.log_file.empty()) throw casad::InvalidConfig("--log is required");
  if (a.model_file.empty()) throw casad::InvalidConfig("--model is required");
  if (a.threshold_given && !a.tuning_file.empty()) {
    throw casad::InvalidConfig("--threshold and --tuning are exclusive");
  }

  std::optional<double> threshold;
  if (a.threshold_given) threshold = a.threshold;
  if (!a.tuning_file.empty()) {
    const auto kv = casad::read_result_kv(a.tuning_file);
    const auto it = kv.count("theta_star") ? kv.find("theta_star")
                                           : kv.find("theta");
    if (it == kv.end()) {
      throw casad::InvalidConfig("tuning file carries neither theta_star nor theta");
    }
    threshold = std::stod(it->second);
  }

  const casad::SsaModel model = casad::load_model(a.model_file);

  casad::ReadOptions opts;
  opts.skip_bad_lines = a.skip_bad_lines;
  std::vector<std::string> skipped;
  const casad::FrameLog log = casad::read_log(a.log_file, opts, &skipped);
  for (const auto& s : skipped) log_warn("skipped " + s);

  std::optional<std::set<std::uint32_t>> filter;
  if (!a.id_filter.empty()) filter = parse_id_list(a.id_filter);
  const casad::ByteSeries series = casad::extract_byte_series(log, filter);
  if (series.size() < model.lag()) {
    throw casad::SeriesTooShort("log provides " + std::to_string(series.size()) +
                                " bytes but the model needs L=" +
                                std::to_string(model.lag()));
  }

  const casad::DepartureSeries scores =
      casad::score_series(model, series.values, threshold, a.start_byte);
  casad::write_scores_csv(scores, a.out);

  std::cout << "scored windows: " << scores.scores.size() << "\n"
            << "first scored byte index: " << scores.start_index << "\n";
  if (threshold) {
    std::cout << "threshold: " << *threshold << "\n"
              << "alarms: " << scores.alarm_count() << "\n";
    bool found = false;
    for (std::size_t i = 0; i < scores.alarms.size(); ++i) {
      if (scores.alarms[i]) {
        const std::size_t idx = scores.start_index + i;
        std::cout << "first alarm byte index: " << idx << "\n"
                  << "first alarm time: "
                  << casad::byte_timestamp(log, series, idx) << " s\n";
        found = true;
        break;
      }
    }
    if (!found) std::cout << "first alarm: none\n";
  } else {
    std::cout << "threshold: none (scores only)\n";
  }
  std::cout << "scores: " << a.out << "\n";
}

}  // namespace

void register_detect(CLI::App& app) {
  auto args = std::make_shared<DetectArgs>();
  CLI::App* cmd = app.add_subcommand(
      "detect", "Stream a log through a trained model and score every byte");
  cmd->add_option("--log", args->log_file, "Input log (candump or CSV)");
  cmd->add_option("--model", args->model_file, "Trained model file");
  cmd->add_option("--config", args->config_file, "casad-config file");
  cmd->add_option("--out", args->out, "Output score CSV")
      ->capture_default_str();
  cmd->add_option("--threshold", args->threshold, "Alarm threshold")
      ->each([args](const std::string&) { args->threshold_given = true; });
  cmd->add_option("--tuning", args->tuning_file,
                  "Read the threshold from a tuning/threshold result file");
  cmd->add_option("--start-byte", args->start_byte,
                  "Score windows ending at or after this byte index "
                  "(earlier bytes serve as warm-up)");
  cmd->add_option("--id-filter", args->id_filter,
                  "Only monitor these frame ids (comma separated)");
  cmd->add_flag("--skip-bad-lines", args->skip_bad_lines,
                "Skip unparseable log lines instead of aborting");
  cmd->callback([args, cmd] { run_detect(*args, cmd); });
}

}  // namespace casadcli
