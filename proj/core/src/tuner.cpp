#include "casad/tuner.hpp"

#include <algorithm>
#include <cmath>

#include "casad/errors.hpp"

namespace casad {

DelayFactorInput DelayFactorInput::make(
    const DepartureSeries& series,
    std::vector<std::pair<std::size_t, std::size_t>> intervals) {
  DelayFactorInput input;
  input.scores = series.scores;
  input.start_index = series.start_index;
  std::sort(intervals.begin(), intervals.end());
  std::size_t gamma = 0;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto [first, last] = intervals[i];
    if (last <= first) {
      throw InvalidConfig("empty attack interval");
    }
    if (i > 0 && first < intervals[i - 1].second) {
      throw InvalidConfig("attack intervals overlap");
    }
    if (first < series.start_index || last > series.end_index()) {
      throw InvalidConfig(
          "attack interval [" + std::to_string(first) + ", " +
          std::to_string(last) + ") outside the scored range [" +
          std::to_string(series.start_index) + ", " +
          std::to_string(series.end_index()) + ")");
    }
    gamma += last - first;
  }
  if (gamma == 0) throw NoAttackInstances("no attack byte instances");
  input.intervals = std::move(intervals);
  input.attack_instances = gamma;
  return input;
}

double delay_factor(const DelayFactorInput& input, double theta) {
  if (input.attack_instances == 0) {
    throw NoAttackInstances("no attack byte instances");
  }
  std::size_t below = 0;
  for (const auto& [first, last] : input.intervals) {
    for (std::size_t i = first; i < last; ++i) {
      if (input.scores[i - input.start_index] < theta) ++below;
    }
  }
  return static_cast<double>(below) /
         static_cast<double>(input.attack_instances);
}

ThresholdCurve sweep_thresholds(const DelayFactorInput& input, std::size_t lag,
                                std::size_t dimension, std::size_t count) {
  if (count < 2) throw InvalidConfig("threshold sweep needs count >= 2");
  if (input.scores.empty()) throw DegenerateScores("no scores to sweep");
  const auto [lo_it, hi_it] =
      std::minmax_element(input.scores.begin(), input.scores.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) {
    throw DegenerateScores("score range is zero; nothing to sweep");
  }

  ThresholdCurve curve;
  curve.lag = lag;
  curve.dimension = dimension;
  curve.thresholds.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    curve.thresholds[i] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  curve.thresholds.front() = lo;
  curve.thresholds.back() = hi;

  // Sorted in-attack scores turn each delta into one binary search.
  std::vector<double> attacked;
  attacked.reserve(input.attack_instances);
  for (const auto& [first, last] : input.intervals) {
    for (std::size_t i = first; i < last; ++i) {
      attacked.push_back(input.scores[i - input.start_index]);
    }
  }
  std::sort(attacked.begin(), attacked.end());

  curve.delays.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto strictly_below = std::lower_bound(
        attacked.begin(), attacked.end(), curve.thresholds[i]);
    curve.delays[i] =
        static_cast<double>(strictly_below - attacked.begin()) /
        static_cast<double>(attacked.size());
  }

  double auc = 0.0;
  for (std::size_t i = 0; i + 1 < count; ++i) {
    auc += 0.5 * (curve.delays[i] + curve.delays[i + 1]);
  }
  curve.auc = auc / static_cast<double>(count - 1);
  return curve;
}

const ThresholdCurve& best_lag(std::span<const ThresholdCurve> curves) {
  if (curves.empty()) throw EmptyInput("no threshold curves");
  const ThresholdCurve* best = &curves[0];
  for (const auto& c : curves.subspan(1)) {
    if (c.auc < best->auc || (c.auc == best->auc && c.lag < best->lag)) {
      best = &c;
    }
  }
  return *best;
}

double best_threshold_cut(const ThresholdCurve& curve, double delta_budget) {
  if (curve.thresholds.empty() ||
      curve.thresholds.size() != curve.delays.size()) {
    throw EmptyInput("empty threshold curve");
  }
  if (delta_budget < 0.0 || delta_budget > 1.0) {
    throw InvalidConfig("delta budget must lie in [0, 1]");
  }
  // Largest threshold still within the delay budget.
  for (std::size_t i = curve.thresholds.size(); i-- > 0;) {
    if (curve.delays[i] <= delta_budget) return curve.thresholds[i];
  }
  // Fallback: minimal delay, ties resolved toward the larger threshold.
  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.delays.size(); ++i) {
    if (curve.delays[i] <= curve.delays[best]) best = i;
  }
  return curve.thresholds[best];
}

ValidationThreshold validation_threshold(const SsaModel& model,
                                         std::span<const std::uint8_t> validation,
                                         double margin) {
  if (margin < 0.0) throw InvalidConfig("margin must be non-negative");
  ValidationThreshold out;
  out.validation_short = validation.size() < 2 * model.config().train_length;
  const DepartureSeries scores = score_series(model, validation);
  double max_score = 0.0;
  for (double s : scores.scores) max_score = std::max(max_score, s);
  out.max_score = max_score;
  out.degenerate = max_score <= 1e-12;  // at the accumulation noise floor
  out.threshold = (1.0 + margin) * max_score;
  return out;
}

}  // namespace casad
