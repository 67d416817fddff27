#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "casad/ssa.hpp"

namespace casad {

/// Scores plus the aggregate attack window in byte indices. Intervals are
/// half-open [first, last), must be disjoint, non-empty and lie inside
/// the scored index range.
struct DelayFactorInput {
  std::vector<double> scores;
  std::size_t start_index = 0;  // byte index of scores[0]
  std::vector<std::pair<std::size_t, std::size_t>> intervals;
  std::size_t attack_instances = 0;  // gamma_a = sum of interval lengths

  static DelayFactorInput make(
      const DepartureSeries& series,
      std::vector<std::pair<std::size_t, std::size_t>> intervals);
};

/// delta_{L,theta}: fraction of in-attack byte instances whose score is
/// strictly below theta. Throws NoAttackInstances when gamma_a = 0.
double delay_factor(const DelayFactorInput& input, double theta);

/// One delay/threshold trade-off curve for a given lag.
struct ThresholdCurve {
  std::size_t lag = 0;
  std::size_t dimension = 0;
  std::vector<double> thresholds;  // strictly increasing
  std::vector<double> delays;      // delta per threshold, non-decreasing
  double auc = 0.0;  // trapezoid over the normalized threshold axis
};

/// `count` thresholds evenly dividing [min score, max score], endpoints
/// included; delta evaluated at each. Throws DegenerateScores when the
/// score range is zero, InvalidConfig when count < 2.
ThresholdCurve sweep_thresholds(const DelayFactorInput& input,
                                std::size_t lag, std::size_t dimension,
                                std::size_t count = 1000);

/// Curve with minimal AUC; ties go to the smaller lag. Throws EmptyInput.
const ThresholdCurve& best_lag(std::span<const ThresholdCurve> curves);

/// Largest threshold whose delay stays within the budget; if none
/// qualifies, the threshold with minimal delay (ties -> largest
/// threshold). Always one of the curve's threshold values.
double best_threshold_cut(const ThresholdCurve& curve,
                          double delta_budget = 0.05);

struct ValidationThreshold {
  double threshold = 0.0;   // (1 + margin) * max validation score
  double max_score = 0.0;
  bool validation_short = false;  // validation shorter than 2N
  bool degenerate = false;        // max score at the numerical noise floor
};

/// Naive rule: run the model over an attack-free validation series
/// (recommended twice the training length) and sit slightly above the
/// maximum score seen. margin = 0 returns the exact max.
ValidationThreshold validation_threshold(const SsaModel& model,
                                         std::span<const std::uint8_t> validation,
                                         double margin = 0.10);

}  // namespace casad
