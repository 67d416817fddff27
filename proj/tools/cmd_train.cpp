#include <iostream>
#include <memory>
#include <optional>

#include "casad/byte_series.hpp"
#include "casad/errors.hpp"
#include "casad/frame.hpp"
#include "casad/model_io.hpp"
#include "casad/scores_io.hpp"
#include "casad/ssa.hpp"
#include "casad/tuner.hpp"
#include "common.hpp"

namespace casadcli {

namespace {

struct TrainArgs {
  std::string log_file;
  std::string config_file;
  std::string out = "model.casad";
  std::size_t train_length = 0;  // N
  std::size_t lag = 0;           // L
  std::size_t r = 0;
  double energy = 0.90;
  std::string id_filter;
  bool skip_bad_lines = false;

  std::size_t validate_bytes = 0;  // 0 = no validation pass
  double margin = 0.10;
  std::string threshold_out;
};

void run_train(const TrainArgs& args, const CLI::App* cmd) {
  TrainArgs a = args;
  if (!a.config_file.empty()) {
    const ConfigSection cfg = ConfigSection::load(a.config_file, "train");
    cfg.apply_string(cmd, "--log", "log", a.log_file);
    cfg.apply_string(cmd, "--out", "out", a.out);
    cfg.apply_size(cmd, "--N", "N", a.train_length);
    cfg.apply_size(cmd, "--L", "L", a.lag);
    cfg.apply_size(cmd, "--r", "r", a.r);
    cfg.apply_double(cmd, "--energy", "energy", a.energy);
    cfg.apply_double(cmd, "--margin", "margin", a.margin);
  }
  if (a.log_file.empty()) throw casad::InvalidConfig("--log is required");
  if (a.train_length == 0) throw casad::InvalidConfig("--N is required");
  if (a.lag == 0) throw casad::InvalidConfig("--L is required");

  casad::LagConfig config;
  config.train_length = a.train_length;
  config.lag = a.lag;
  config.rule = a.r > 0 ? casad::DimensionRule::explicit_r(a.r)
                        : casad::DimensionRule::energy_fraction(a.energy);
  config.validate();  // fail before file work begins

  casad::ReadOptions opts;
  opts.skip_bad_lines = a.skip_bad_lines;
  std::vector<std::string> skipped;
  const casad::FrameLog log = casad::read_log(a.log_file, opts, &skipped);
  for (const auto& s : skipped) log_warn("skipped " + s);

  std::optional<std::set<std::uint32_t>> filter;
  if (!a.id_filter.empty()) filter = parse_id_list(a.id_filter);
  const casad::ByteSeries series = casad::extract_byte_series(log, filter);

  const casad::SsaModel model = casad::train(series.values, config);
  casad::save_model(model, a.out);

  std::cout << "bytes available: " << series.size() << "\n"
            << "L: " << model.lag() << "\n"
            << "r: " << model.dimension() << "\n"
            << "leading eigenvalue share: "
            << (model.total_energy() > 0.0
                    ? model.eigenvalues()[0] / model.total_energy()
                    : 0.0)
            << "\n"
            << "training score max: " << model.training_score_max() << "\n"
            << "model: " << a.out << "\n";

  if (a.validate_bytes > 0 || !a.threshold_out.empty()) {
    std::size_t want = a.validate_bytes > 0 ? a.validate_bytes
                                            : 2 * config.train_length;
    const std::size_t avail = series.size() - config.train_length;
    if (want > avail) {
      log_warn("validation shortened to " + std::to_string(avail) +
               " bytes (log exhausted)");
      want = avail;
    }
    std::span<const std::uint8_t> validation(
        series.values.data() + config.train_length, want);
    const casad::ValidationThreshold vt =
        casad::validation_threshold(model, validation, a.margin);
    if (vt.validation_short) {
      log_warn("validation series shorter than 2N; the threshold may sit low");
    }
    if (vt.degenerate) {
      log_warn("all validation scores are zero; threshold is degenerate");
    }
    std::cout << "validation bytes: " << want << "\n"
              << "validation score max: " << vt.max_score << "\n"
              << "suggested threshold: " << vt.threshold << "\n";
    if (!a.threshold_out.empty()) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", vt.threshold);
      casad::write_result_kv(
          {{"theta", buf}, {"margin", std::to_string(a.margin)}},
          a.threshold_out);
      std::cout << "threshold file: " << a.threshold_out << "\n";
    }
  }
}

}  // namespace

void register_train(CLI::App& app) {
  auto args = std::make_shared<TrainArgs>();
  CLI::App* cmd = app.add_subcommand(
      "train", "Learn the normal-traffic model from a log prefix");
  cmd->add_option("--log", args->log_file, "Input log (candump or CSV)");
  cmd->add_option("--config", args->config_file, "casad-config file");
  cmd->add_option("--out", args->out, "Output model file")
      ->capture_default_str();
  cmd->add_option("--N", args->train_length, "Training length in bytes");
  cmd->add_option("--L", args->lag, "Lag parameter (window length)");
  cmd->add_option("--r", args->r,
                  "Statistical dimension (overrides --energy)");
  cmd->add_option("--energy", args->energy,
                  "Energy fraction for choosing r")
      ->capture_default_str();
  cmd->add_option("--id-filter", args->id_filter,
                  "Only monitor these frame ids (comma separated)");
  cmd->add_flag("--skip-bad-lines", args->skip_bad_lines,
                "Skip unparseable log lines instead of aborting");
  cmd->add_option("--validate-bytes", args->validate_bytes,
                  "Run the validation threshold rule on this many post-"
                  "training bytes (default 2N when --threshold-out is set)");
  cmd->add_option("--margin", args->margin,
                  "Validation threshold margin above the max score")
      ->capture_default_str();
  cmd->add_option("--threshold-out", args->threshold_out,
                  "Write the suggested threshold as a key-value file");
  cmd->callback([args, cmd] { run_train(*args, cmd); });
}

}  // namespace casadcli
