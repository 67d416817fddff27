#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "casad/ssa.hpp"
#include "casad/tuner.hpp"

namespace casad {

/// Score export CSV: header `byte_index,score,alarm`; scores printed with
/// round-trip precision; alarm column is 0 everywhere when no threshold
/// was set.
void write_scores_csv(const DepartureSeries& series, const std::string& path);
void write_scores_csv(const DepartureSeries& series, std::ostream& out);

DepartureSeries read_scores_csv(const std::string& path);
DepartureSeries read_scores_csv(std::istream& in);

/// Curve export CSV: header `L,r,theta,delta`, one row per threshold.
void write_curve_csv(const ThresholdCurve& curve, const std::string& path);

/// Small `key = value` result files (tuning outcome, suggested
/// thresholds); same line syntax as the schedule grammar.
void write_result_kv(const std::map<std::string, std::string>& kv,
                     const std::string& path);
std::map<std::string, std::string> read_result_kv(const std::string& path);

}  // namespace casad
