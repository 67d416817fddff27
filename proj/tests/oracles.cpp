#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oracle {

Eigensystem jacobi_eigen(const casad::Matrix& symmetric) {
  const std::size_t n = symmetric.rows();
  std::vector<std::vector<double>> a(n, std::vector<double>(n));
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    v[i][i] = 1.0;
    for (std::size_t j = 0; j < n; ++j) a[i][j] = symmetric(i, j);
  }

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) s += a[i][j] * a[i][j];
    }
    return std::sqrt(2.0 * s);
  };
  double frob = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) frob += a[i][j] * a[i][j];
  }
  frob = std::sqrt(frob);
  const double stop = std::max(1e-300, 1e-14 * frob);

  for (int sweep = 0; sweep < 200 && off_norm() > stop; ++sweep) {
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });

  Eigensystem out;
  out.values.resize(n);
  out.vectors.assign(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    out.values[i] = a[order[i]][order[i]];
    for (std::size_t k = 0; k < n; ++k) out.vectors[i][k] = v[k][order[i]];
  }
  return out;
}

casad::Matrix covariance(const casad::Matrix& b) {
  casad::Matrix g(b.rows(), b.rows());
  for (std::size_t i = 0; i < b.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < b.cols(); ++t) acc += b(i, t) * b(j, t);
      g(i, j) = acc;
    }
  }
  return g;
}

double brute_raw_score(const casad::Matrix& basis,
                       std::span<const double> centroid,
                       std::span<const double> vec) {
  double total = 0.0;
  for (std::size_t i = 0; i < basis.cols(); ++i) {
    double proj = 0.0;
    for (std::size_t j = 0; j < basis.rows(); ++j) proj += basis(j, i) * vec[j];
    total += (centroid[i] - proj) * (centroid[i] - proj);
  }
  return total;
}

double brute_weighted_score(const casad::Matrix& basis,
                            std::span<const double> centroid,
                            std::span<const double> weights,
                            std::span<const double> vec) {
  double total = 0.0;
  for (std::size_t i = 0; i < basis.cols(); ++i) {
    double proj = 0.0;
    for (std::size_t j = 0; j < basis.rows(); ++j) proj += basis(j, i) * vec[j];
    const double x = centroid[i] - proj;
    total += weights[i] * weights[i] * x * x;
  }
  return total;
}

double matrix_form_weighted_score(const casad::Matrix& basis,
                                  std::span<const double> centroid,
                                  std::span<const double> weights,
                                  std::span<const double> vec) {
  const std::size_t r = basis.cols();
  std::vector<double> residual(r);
  for (std::size_t i = 0; i < r; ++i) {
    double proj = 0.0;
    for (std::size_t j = 0; j < basis.rows(); ++j) proj += basis(j, i) * vec[j];
    residual[i] = centroid[i] - proj;
  }
  casad::Matrix w(r, r);
  for (std::size_t i = 0; i < r; ++i) w(i, i) = weights[i];
  std::vector<double> scaled(r, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) scaled[i] += w(i, j) * residual[j];
  }
  double total = 0.0;
  for (double x : scaled) total += x * x;
  return total;
}

double subspace_residual(const casad::Matrix& basis,
                         std::span<const double> vec) {
  const std::size_t l = basis.rows();
  const std::size_t r = basis.cols();
  std::vector<double> proj(r, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < l; ++j) proj[i] += basis(j, i) * vec[j];
  }
  double total = 0.0;
  for (std::size_t j = 0; j < l; ++j) {
    double back = 0.0;
    for (std::size_t i = 0; i < r; ++i) back += basis(j, i) * proj[i];
    const double d = vec[j] - back;
    total += d * d;
  }
  return total;
}

std::vector<double> batch_scores(const casad::SsaModel& model,
                                 std::span<const std::uint8_t> series) {
  const std::size_t l = model.lag();
  std::vector<double> out;
  if (series.size() < l) return out;
  std::vector<double> window(l);
  for (std::size_t end = l - 1; end < series.size(); ++end) {
    for (std::size_t j = 0; j < l; ++j) {
      window[j] = static_cast<double>(series[end - (l - 1) + j]);
    }
    out.push_back(model.weighted_score(std::span<const double>(window)));
  }
  return out;
}

std::vector<std::uint8_t> random_bytes(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng() & 0xFF);
  return out;
}

std::vector<std::uint8_t> periodic_series(std::span<const std::uint8_t> pattern,
                                          std::size_t n) {
  std::vector<std::uint8_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = pattern[i % pattern.size()];
  return out;
}

}  // namespace oracle
