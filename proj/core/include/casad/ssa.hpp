#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "casad/matrix.hpp"

namespace casad {

/// How the statistical dimension r is chosen from the spectrum.
struct DimensionRule {
  enum class Kind { Explicit, EnergyFraction };
  Kind kind = Kind::EnergyFraction;
  std::size_t r = 0;       // Kind::Explicit
  double energy = 0.90;    // Kind::EnergyFraction, in (0, 1]

  static DimensionRule explicit_r(std::size_t r) {
    return {Kind::Explicit, r, 0.0};
  }
  static DimensionRule energy_fraction(double f) {
    return {Kind::EnergyFraction, 0, f};
  }
};

/// Training geometry: N bytes embedded as K = N-L+1 lagged vectors of
/// length L. Valid when L >= 2, K >= L and, for an explicit rule,
/// 1 <= r < L.
struct LagConfig {
  std::size_t train_length = 0;  // N
  std::size_t lag = 0;           // L
  DimensionRule rule;

  std::size_t vector_count() const {  // K
    return train_length - lag + 1;
  }
  void validate() const;  // throws InvalidConfig
};

/// Smallest r whose leading eigenvalues reach the energy fraction, or the
/// explicit r; clamped to [1, L-1]. A degenerate all-zero spectrum gives
/// r = 1. Eigenvalues must be non-increasing and non-negative.
std::size_t select_dimension(std::span<const double> eigenvalues,
                             const DimensionRule& rule);

/// Trained detector state. Immutable once built; safe to share across
/// threads and across any number of StreamDetectors.
///
/// basis U is L x r with orthonormal columns (leading eigenvectors of the
/// trajectory Gram matrix), eigenvalues e_1 >= ... >= e_r >= 0, weights
/// w_i = e_i / sum_{k<=r} e_k, centroid c~ = U^T c with c the sample mean
/// of the training vectors.
class SsaModel {
 public:
  SsaModel() = default;

  /// Assembles a model from already-computed parts (used by the trainer,
  /// the model-file loader and tests). Checks shape consistency, basis
  /// orthonormality and spectrum ordering.
  static SsaModel from_parts(LagConfig config, std::size_t r, Matrix basis,
                             std::vector<double> eigenvalues,
                             std::vector<double> centroid,
                             double total_energy, double training_score_max);

  std::size_t lag() const { return config_.lag; }
  std::size_t dimension() const { return r_; }
  const LagConfig& config() const { return config_; }
  const Matrix& basis() const { return basis_; }
  std::span<const double> eigenvalues() const { return eigenvalues_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> centroid() const { return centroid_; }
  double total_energy() const { return total_energy_; }
  double training_score_max() const { return training_score_max_; }

  /// Weight-scaled projection, row i = w_i * U(:,i)^T; the per-step
  /// matrix of the streaming detector.
  const Matrix& weighted_projection() const { return projection_; }
  /// Weight-scaled centroid, z_i = w_i * c~_i.
  std::span<const double> weighted_centroid() const {
    return weighted_centroid_;
  }

  /// D = ||c~ - U^T b||^2. Throws DimensionMismatch unless b has length L.
  double raw_score(std::span<const double> vec) const;
  double raw_score(std::span<const std::uint8_t> vec) const;

  /// D~ = ||W (c~ - U^T b)||^2 = sum_i w_i^2 (c~_i - (U^T b)_i)^2.
  /// Identical to raw_score when r = 1.
  double weighted_score(std::span<const double> vec) const;
  double weighted_score(std::span<const std::uint8_t> vec) const;

 private:
  friend SsaModel train(std::span<const std::uint8_t>, const LagConfig&);

  LagConfig config_;
  std::size_t r_ = 0;
  Matrix basis_;                    // L x r
  std::vector<double> eigenvalues_; // r
  std::vector<double> weights_;     // r
  std::vector<double> centroid_;    // r (projected)
  double total_energy_ = 0.0;       // sum of all L eigenvalues
  double training_score_max_ = 0.0;

  Matrix projection_;                    // r x L
  std::vector<double> weighted_centroid_;  // r
  void finish();  // derive projection_ / weighted_centroid_
};

/// Learning phase over the first config.N bytes of the series.
SsaModel train(std::span<const std::uint8_t> series, const LagConfig& config);

/// Single-writer sliding-window scorer: one r x L mat-vec per byte.
/// Self-contained (owns its copies of the model's projection), so it can
/// outlive the model object and be moved freely between threads.
class StreamDetector {
 public:
  explicit StreamDetector(const SsaModel& model);

  /// Pushes one byte; returns the weighted departure score of the current
  /// window once L bytes have arrived, std::nullopt before that.
  /// Throws ByteOutOfRange unless 0 <= byte <= 255.
  std::optional<double> step(int byte);

  /// Drops buffered bytes; the window refills from scratch.
  void reset();

  std::size_t lag() const { return lag_; }
  std::size_t bytes_seen() const { return seen_; }

 private:
  std::size_t lag_ = 0;
  std::size_t r_ = 0;
  Matrix projection_;               // L x r (transposed weighted projection)
  std::vector<double> weighted_centroid_;
  std::vector<double> window_;      // ring buffer, logical start = head_
  std::vector<double> accum_;       // r scratch
  std::size_t head_ = 0;
  std::size_t filled_ = 0;
  std::size_t seen_ = 0;

  double score_window();
};

/// Per-byte weighted scores. scores[k] belongs to the window ending at
/// byte index start_index + k (0-based indices into the scored series);
/// alarms are defined iff a threshold is set, alarm <=> score >= threshold.
struct DepartureSeries {
  std::size_t start_index = 0;
  std::vector<double> scores;
  std::optional<double> threshold;
  std::vector<std::uint8_t> alarms;  // parallel to scores when threshold set

  std::size_t end_index() const { return start_index + scores.size(); }
  bool has_score(std::size_t byte_index) const {
    return byte_index >= start_index && byte_index < end_index();
  }
  double score_at(std::size_t byte_index) const {
    return scores[byte_index - start_index];
  }
  std::size_t alarm_count() const;
  /// Applies (or clears) a threshold, rebuilding the alarm flags.
  void set_threshold(std::optional<double> value);
};

constexpr std::size_t kScoreToEnd = std::numeric_limits<std::size_t>::max();

/// Scores every window of `series` whose end index falls in [from, to).
/// Windows reaching before `from` use the preceding series bytes as
/// warm-up context, so scoring a detection segment that follows the
/// training segment in the same series starts at the first post-training
/// byte. The earliest scoreable end index is L-1. Throws SeriesTooShort
/// when the series cannot fill one window.
DepartureSeries score_series(const SsaModel& model,
                             std::span<const std::uint8_t> series,
                             std::optional<double> threshold = std::nullopt,
                             std::size_t from = 0,
                             std::size_t to = kScoreToEnd);

}  // namespace casad
