#include <cstdio>
#include <future>
#include <iostream>
#include <memory>

#include "casad/byte_series.hpp"
#include "casad/errors.hpp"
#include "casad/frame.hpp"
#include "casad/scores_io.hpp"
#include "casad/ssa.hpp"
#include "casad/tuner.hpp"
#include "common.hpp"

namespace casadcli {

namespace {

struct TuneArgs {
  std::string log_file;
  std::string annotations_file;
  std::string config_file;
  std::string lag_list;
  std::size_t train_length = 0;
  std::size_t r = 0;
  double energy = 0.90;
  std::size_t count = 1000;
  double delta_budget = 0.05;
  std::string out_dir = ".";
  std::string id_filter;
  bool skip_bad_lines = false;
};

struct PerLag {
  casad::ThresholdCurve curve;
  std::size_t alarm_eligible = 0;
};

void run_tune(const TuneArgs& args, const CLI::App* cmd) {
  TuneArgs a = args;
  if (!a.config_file.empty()) {
    const ConfigSection cfg = ConfigSection::load(a.config_file, "tune");
    cfg.apply_string(cmd, "--log", "log", a.log_file);
    cfg.apply_string(cmd, "--annotations", "annotations", a.annotations_file);
    cfg.apply_string(cmd, "--L", "L", a.lag_list);
    cfg.apply_size(cmd, "--N", "N", a.train_length);
    cfg.apply_double(cmd, "--energy", "energy", a.energy);
    cfg.apply_double(cmd, "--delta-budget", "delta_budget", a.delta_budget);
    cfg.apply_string(cmd, "--out-dir", "out_dir", a.out_dir);
  }
  if (a.log_file.empty()) throw casad::InvalidConfig("--log is required");
  if (a.annotations_file.empty()) {
    throw casad::InvalidConfig("--annotations is required");
  }
  if (a.lag_list.empty()) throw casad::InvalidConfig("--L is required");
  if (a.train_length == 0) throw casad::InvalidConfig("--N is required");
  const std::vector<std::size_t> lags = parse_size_list(a.lag_list);

  casad::ReadOptions opts;
  opts.skip_bad_lines = a.skip_bad_lines;
  std::vector<std::string> skipped;
  const casad::FrameLog log = casad::read_log(a.log_file, opts, &skipped);
  for (const auto& s : skipped) log_warn("skipped " + s);
  const std::vector<casad::Annotation> annotations =
      casad::read_annotations(a.annotations_file);
  if (annotations.empty()) {
    throw casad::EmptyInput("annotation file lists no attack windows");
  }

  std::optional<std::set<std::uint32_t>> filter;
  if (!a.id_filter.empty()) filter = parse_id_list(a.id_filter);
  const casad::ByteSeries series = casad::extract_byte_series(log, filter);
  const auto intervals =
      casad::annotation_byte_intervals(log, series, annotations);

  // Candidate lags are independent work items; results merge in lag order.
  auto evaluate = [&](std::size_t lag) -> PerLag {
    casad::LagConfig config;
    config.train_length = a.train_length;
    config.lag = lag;
    config.rule = a.r > 0 ? casad::DimensionRule::explicit_r(a.r)
                          : casad::DimensionRule::energy_fraction(a.energy);
    config.validate();
    const casad::SsaModel model = casad::train(series.values, config);
    const casad::DepartureSeries scores =
        casad::score_series(model, series.values, std::nullopt, a.train_length);
    const auto input = casad::DelayFactorInput::make(scores, intervals);
    PerLag out;
    out.curve =
        casad::sweep_thresholds(input, lag, model.dimension(), a.count);
    return out;
  };

  std::vector<std::future<PerLag>> futures;
  futures.reserve(lags.size());
  for (std::size_t lag : lags) {
    futures.push_back(std::async(std::launch::async, evaluate, lag));
  }
  std::vector<PerLag> results;
  results.reserve(lags.size());
  for (auto& f : futures) results.push_back(f.get());

  std::vector<casad::ThresholdCurve> curves;
  for (auto& r : results) curves.push_back(std::move(r.curve));

  char buf[160];
  for (const auto& curve : curves) {
    std::snprintf(buf, sizeof(buf), "%s/curve_L%zu.csv", a.out_dir.c_str(),
                  curve.lag);
    casad::write_curve_csv(curve, buf);
    std::snprintf(buf, sizeof(buf), "L=%-5zu r=%-4zu auc=%.6f", curve.lag,
                  curve.dimension, curve.auc);
    std::cout << buf << "\n";
  }

  const casad::ThresholdCurve& best = casad::best_lag(curves);
  const double theta_star = casad::best_threshold_cut(best, a.delta_budget);
  double delta_at_star = 1.0;
  for (std::size_t i = 0; i < best.thresholds.size(); ++i) {
    if (best.thresholds[i] == theta_star) {
      delta_at_star = best.delays[i];
      break;
    }
  }

  std::snprintf(buf, sizeof(buf), "%.17g", theta_star);
  std::map<std::string, std::string> kv{
      {"L_star", std::to_string(best.lag)},
      {"r_star", std::to_string(best.dimension)},
      {"theta_star", buf},
      {"auc_star", std::to_string(best.auc)},
      {"delta_at_theta_star", std::to_string(delta_at_star)},
      {"delta_budget", std::to_string(a.delta_budget)},
      {"threshold_count", std::to_string(a.count)},
  };
  const std::string result_path = a.out_dir + "/tuning.kv";
  casad::write_result_kv(kv, result_path);

  std::cout << "chosen L*: " << best.lag << "\n"
            << "chosen theta*: " << theta_star << "\n"
            << "delta at theta*: " << delta_at_star << "\n"
            << "result: " << result_path << "\n";
}

}  // namespace

void register_tune(CLI::App& app) {
  auto args = std::make_shared<TuneArgs>();
  CLI::App* cmd = app.add_subcommand(
      "tune",
      "Sweep thresholds per candidate lag and pick (L*, theta*) by delay "
      "factor");
  cmd->add_option("--log", args->log_file, "Attacked log");
  cmd->add_option("--annotations", args->annotations_file,
                  "Attack window annotation CSV");
  cmd->add_option("--config", args->config_file, "casad-config file");
  cmd->add_option("--L", args->lag_list,
                  "Candidate lag values, comma separated (e.g. 100,250,500)");
  cmd->add_option("--N", args->train_length, "Training length in bytes");
  cmd->add_option("--r", args->r, "Statistical dimension (overrides --energy)");
  cmd->add_option("--energy", args->energy, "Energy fraction for choosing r")
      ->capture_default_str();
  cmd->add_option("--count", args->count, "Thresholds per sweep")
      ->capture_default_str();
  cmd->add_option("--delta-budget", args->delta_budget,
                  "Delay-factor budget for the automated cut")
      ->capture_default_str();
  cmd->add_option("--out-dir", args->out_dir, "Output directory")
      ->capture_default_str();
  cmd->add_option("--id-filter", args->id_filter,
                  "Only monitor these frame ids (comma separated)");
  cmd->add_flag("--skip-bad-lines", args->skip_bad_lines,
                "Skip unparseable log lines instead of aborting");
  cmd->callback([args, cmd] { run_tune(*args, cmd); });
}

}  // namespace casadcli
