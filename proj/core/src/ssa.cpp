#include "casad/ssa.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "casad/eigen.hpp"
#include "casad/errors.hpp"

namespace casad {

void LagConfig::validate() const {
  if (lag < 2) {
    throw InvalidConfig("lag L must be at least 2, got " + std::to_string(lag));
  }
  if (train_length < lag || train_length - lag + 1 < lag) {
    throw InvalidConfig("training length N=" + std::to_string(train_length) +
                        " gives K=N-L+1 < L for L=" + std::to_string(lag));
  }
  switch (rule.kind) {
    case DimensionRule::Kind::Explicit:
      if (rule.r < 1 || rule.r >= lag) {
        throw InvalidConfig("statistical dimension r=" + std::to_string(rule.r) +
                            " must satisfy 1 <= r < L=" + std::to_string(lag));
      }
      break;
    case DimensionRule::Kind::EnergyFraction:
      if (!(rule.energy > 0.0 && rule.energy <= 1.0)) {
        throw InvalidConfig("energy fraction must lie in (0, 1]");
      }
      break;
  }
}

std::size_t select_dimension(std::span<const double> eigenvalues,
                             const DimensionRule& rule) {
  const std::size_t l = eigenvalues.size();
  if (l == 0) throw InvalidConfig("empty spectrum");
  const std::size_t max_r = std::max<std::size_t>(1, l - 1);

  if (rule.kind == DimensionRule::Kind::Explicit) {
    return std::clamp<std::size_t>(rule.r, 1, max_r);
  }

  double total = 0.0;
  for (double e : eigenvalues) total += e;
  if (total <= 0.0) return 1;  // degenerate spectrum

  double acc = 0.0;
  for (std::size_t r = 1; r <= l; ++r) {
    acc += eigenvalues[r - 1];
    if (acc / total >= rule.energy) {
      return std::clamp<std::size_t>(r, 1, max_r);
    }
  }
  return max_r;
}

SsaModel SsaModel::from_parts(LagConfig config, std::size_t r, Matrix basis,
                              std::vector<double> eigenvalues,
                              std::vector<double> centroid,
                              double total_energy, double training_score_max) {
  const std::size_t l = config.lag;
  if (basis.rows() != l || basis.cols() != r || eigenvalues.size() != r ||
      centroid.size() != r || r == 0 || r >= l) {
    throw DimensionMismatch("inconsistent model part shapes");
  }
  // Basis columns must be orthonormal and the spectrum ordered.
  for (std::size_t i = 0; i < r; ++i) {
    if (eigenvalues[i] < 0.0 ||
        (i + 1 < r && eigenvalues[i] < eigenvalues[i + 1])) {
      throw NumericalFailure("eigenvalues must be non-negative and sorted");
    }
    for (std::size_t j = i; j < r; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < l; ++k) dot += basis(k, i) * basis(k, j);
      const double target = i == j ? 1.0 : 0.0;
      if (std::fabs(dot - target) > 1e-9) {
        throw NumericalFailure("basis columns are not orthonormal");
      }
    }
  }

  SsaModel m;
  m.config_ = config;
  m.r_ = r;
  m.basis_ = std::move(basis);
  m.eigenvalues_ = std::move(eigenvalues);
  m.centroid_ = std::move(centroid);
  m.total_energy_ = total_energy;
  m.training_score_max_ = training_score_max;

  double sum = 0.0;
  for (double e : m.eigenvalues_) sum += e;
  m.weights_.resize(r);
  for (std::size_t i = 0; i < r; ++i) {
    // A fully degenerate spectrum (all-zero series) keeps the detector
    // defined: fall back to uniform weights.
    m.weights_[i] = sum > 0.0 ? m.eigenvalues_[i] / sum : 1.0 / double(r);
  }
  m.finish();
  return m;
}

void SsaModel::finish() {
  const std::size_t l = config_.lag;
  projection_ = Matrix(r_, l);
  for (std::size_t i = 0; i < r_; ++i) {
    double* row = projection_.row(i);
    for (std::size_t j = 0; j < l; ++j) row[j] = weights_[i] * basis_(j, i);
  }
  weighted_centroid_.resize(r_);
  for (std::size_t i = 0; i < r_; ++i) {
    weighted_centroid_[i] = weights_[i] * centroid_[i];
  }
}

namespace {

template <typename T>
double raw_score_impl(const Matrix& basis, std::span<const double> centroid,
                      std::span<const T> vec) {
  const std::size_t l = basis.rows();
  const std::size_t r = basis.cols();
  if (vec.size() != l) {
    throw DimensionMismatch("test vector has length " +
                            std::to_string(vec.size()) + ", expected L=" +
                            std::to_string(l));
  }
  double score = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    double proj = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
      proj += basis(j, i) * static_cast<double>(vec[j]);
    }
    const double diff = centroid[i] - proj;
    score += diff * diff;
  }
  return score;
}

template <typename T>
double weighted_score_impl(const Matrix& basis, std::span<const double> centroid,
                           std::span<const double> weights,
                           std::span<const T> vec) {
  const std::size_t l = basis.rows();
  const std::size_t r = basis.cols();
  if (vec.size() != l) {
    throw DimensionMismatch("test vector has length " +
                            std::to_string(vec.size()) + ", expected L=" +
                            std::to_string(l));
  }
  double score = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    double proj = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
      proj += basis(j, i) * static_cast<double>(vec[j]);
    }
    const double diff = weights[i] * (centroid[i] - proj);
    score += diff * diff;
  }
  return score;
}

}  // namespace

double SsaModel::raw_score(std::span<const double> vec) const {
  return raw_score_impl(basis_, centroid_, vec);
}
double SsaModel::raw_score(std::span<const std::uint8_t> vec) const {
  return raw_score_impl(basis_, centroid_, vec);
}
double SsaModel::weighted_score(std::span<const double> vec) const {
  return weighted_score_impl(basis_, centroid_, weights_, vec);
}
double SsaModel::weighted_score(std::span<const std::uint8_t> vec) const {
  return weighted_score_impl(basis_, centroid_, weights_, vec);
}

SsaModel train(std::span<const std::uint8_t> series, const LagConfig& config) {
  config.validate();
  const std::size_t n = config.train_length;
  const std::size_t l = config.lag;
  if (series.size() < n) {
    throw SeriesTooShort("series of " + std::to_string(series.size()) +
                         " bytes is shorter than N=" + std::to_string(n));
  }
  const std::size_t k = n - l + 1;

  EigenDecomposition eig =
      eigendecompose_gram(gram_from_series(series, n, l));
  double total_energy = 0.0;
  for (double e : eig.values) total_energy += e;

  const std::size_t r = select_dimension(eig.values, config.rule);

  Matrix basis(l, r);
  for (std::size_t c = 0; c < r; ++c) {
    for (std::size_t row = 0; row < l; ++row) {
      basis(row, c) = eig.vectors(row, c);
    }
  }
  std::vector<double> leading(eig.values.begin(), eig.values.begin() + r);

  // Sample mean of the K training vectors via prefix sums, then its
  // projection onto the signal subspace.
  std::vector<double> mean(l, 0.0);
  {
    double window_sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) window_sum += series[i];
    for (std::size_t p = 0; p < l; ++p) {
      mean[p] = window_sum / static_cast<double>(k);
      if (p + 1 < l) {
        window_sum -= series[p];
        window_sum += series[p + k];
      }
    }
  }
  std::vector<double> centroid(r, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < l; ++j) acc += basis(j, i) * mean[j];
    centroid[i] = acc;
  }

  SsaModel model = SsaModel::from_parts(config, r, std::move(basis),
                                        std::move(leading), std::move(centroid),
                                        total_energy, 0.0);

  // Score every training vector with the same code path the streaming
  // detector uses, so stream and batch agree bit for bit.
  StreamDetector det(model);
  double max_score = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (auto s = det.step(series[i])) max_score = std::max(max_score, *s);
  }
  model.training_score_max_ = max_score;
  return model;
}

StreamDetector::StreamDetector(const SsaModel& model)
    : lag_(model.lag()),
      r_(model.dimension()),
      projection_(lag_, r_),
      weighted_centroid_(model.weighted_centroid().begin(),
                         model.weighted_centroid().end()),
      window_(lag_, 0.0),
      accum_(r_, 0.0) {
  // Transposed copy of the model's weighted projection: row j holds the r
  // coefficients of window position j, so the per-byte product runs as L
  // contiguous rank-1 updates over a short vector.
  const Matrix& p = model.weighted_projection();  // r x L
  for (std::size_t j = 0; j < lag_; ++j) {
    double* row = projection_.row(j);
    for (std::size_t i = 0; i < r_; ++i) row[i] = p(i, j);
  }
}

void StreamDetector::reset() {
  head_ = 0;
  filled_ = 0;
  seen_ = 0;
  std::fill(window_.begin(), window_.end(), 0.0);
}

double StreamDetector::score_window() {
  // Window in logical order is window_[head_..L) then window_[0..head_).
  double* y = accum_.data();
  for (std::size_t i = 0; i < r_; ++i) y[i] = weighted_centroid_[i];
  const std::size_t tail_len = lag_ - head_;
  const double* w1 = window_.data() + head_;
  for (std::size_t j = 0; j < tail_len; ++j) {
    const double v = w1[j];
    const double* row = projection_.row(j);
    for (std::size_t i = 0; i < r_; ++i) y[i] -= row[i] * v;
  }
  const double* w2 = window_.data();
  for (std::size_t j = 0; j < head_; ++j) {
    const double v = w2[j];
    const double* row = projection_.row(tail_len + j);
    for (std::size_t i = 0; i < r_; ++i) y[i] -= row[i] * v;
  }
  double score = 0.0;
  for (std::size_t i = 0; i < r_; ++i) score += y[i] * y[i];
  return score;
}

std::optional<double> StreamDetector::step(int byte) {
  if (byte < 0 || byte > 255) {
    throw ByteOutOfRange("byte value " + std::to_string(byte) +
                         " outside [0, 255]");
  }
  ++seen_;
  if (filled_ < lag_) {
    window_[filled_++] = static_cast<double>(byte);
    if (filled_ < lag_) return std::nullopt;
    return score_window();  // head_ == 0 for the first full window
  }
  window_[head_] = static_cast<double>(byte);
  head_ = (head_ + 1) % lag_;
  return score_window();
}

std::size_t DepartureSeries::alarm_count() const {
  std::size_t n = 0;
  for (std::uint8_t a : alarms) n += a;
  return n;
}

void DepartureSeries::set_threshold(std::optional<double> value) {
  threshold = value;
  alarms.clear();
  if (!threshold) return;
  alarms.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    alarms[i] = scores[i] >= *threshold ? 1 : 0;
  }
}

DepartureSeries score_series(const SsaModel& model,
                             std::span<const std::uint8_t> series,
                             std::optional<double> threshold, std::size_t from,
                             std::size_t to) {
  const std::size_t l = model.lag();
  const std::size_t n = series.size();
  if (n < l) {
    throw SeriesTooShort("series of " + std::to_string(n) +
                         " bytes cannot fill one lag-" + std::to_string(l) +
                         " window");
  }
  if (to == kScoreToEnd || to > n) to = n;
  const std::size_t first = std::max(from, l - 1);

  DepartureSeries out;
  out.start_index = first;
  if (first >= to) {
    out.set_threshold(threshold);
    return out;
  }

  StreamDetector det(model);
  const std::size_t warmup_from = first - (l - 1);
  out.scores.reserve(to - first);
  for (std::size_t i = warmup_from; i < to; ++i) {
    auto s = det.step(series[i]);
    if (i >= first) out.scores.push_back(*s);
  }
  out.set_threshold(threshold);
  return out;
}

}  // namespace casad
