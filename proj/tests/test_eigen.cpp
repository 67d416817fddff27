#include <cmath>
#include <random>

#include "casad/eigen.hpp"
#include "casad/errors.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace casad;

namespace {

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      m = std::max(m, std::fabs(a(i, j) - b(i, j)));
    }
  }
  return m;
}

double orthonormality_defect(const Matrix& vectors) {
  double worst = 0.0;
  for (std::size_t i = 0; i < vectors.cols(); ++i) {
    for (std::size_t j = i; j < vectors.cols(); ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < vectors.rows(); ++k) {
        dot += vectors(k, i) * vectors(k, j);
      }
      worst = std::max(worst, std::fabs(dot - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("trajectory matrix has the Hankel layout") {
  const std::vector<std::uint8_t> s{1, 2, 3, 4, 5, 6};
  const Matrix b = build_trajectory_matrix(s, 3);
  REQUIRE(b.rows() == 3);
  REQUIRE(b.cols() == 4);  // K = N - L + 1
  for (std::size_t col = 0; col < 4; ++col) {
    for (std::size_t row = 0; row < 3; ++row) {
      CHECK(b(row, col) == static_cast<double>(s[col + row]));
    }
  }
  // constant anti-diagonals
  for (std::size_t row = 1; row < 3; ++row) {
    for (std::size_t col = 1; col < 4; ++col) {
      CHECK(b(row, col - 1) == b(row - 1, col));
    }
  }
}

TEST_CASE("trajectory matrix accepts K == L and rejects K < L") {
  const std::vector<std::uint8_t> s{9, 9, 9, 9, 9};
  const Matrix b = build_trajectory_matrix(s, 3);
  CHECK(b.cols() == 3);  // K = 5 - 3 + 1
  CHECK_THROWS_AS(build_trajectory_matrix(s, 4), SeriesTooShort);
}

TEST_CASE("covariance eigendecomposition of a constant two-row matrix") {
  // B = c * ones(2, K): BB^T = K c^2 * ones(2,2), eigenvalues 2Kc^2 and 0,
  // leading direction (1,1)/sqrt(2).
  const double c = 7.0;
  const std::size_t k = 12;
  Matrix b(2, k);
  for (std::size_t j = 0; j < k; ++j) {
    b(0, j) = c;
    b(1, j) = c;
  }
  const EigenDecomposition eig = eigendecompose_covariance(b);
  CHECK(eig.values[0] == doctest::Approx(2.0 * k * c * c).epsilon(1e-12));
  CHECK(eig.values[1] == doctest::Approx(0.0).epsilon(1e-12));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(eig.vectors(0, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
  CHECK(eig.vectors(1, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
}

TEST_CASE("identity trajectory matrix gives a flat spectrum") {
  Matrix b(2, 2);
  b(0, 0) = 1.0;
  b(1, 1) = 1.0;
  const EigenDecomposition eig = eigendecompose_covariance(b);
  CHECK(eig.values[0] == doctest::Approx(1.0));
  CHECK(eig.values[1] == doctest::Approx(1.0));
  CHECK(orthonormality_defect(eig.vectors) < 1e-12);
}

TEST_CASE("random covariance matches the Jacobi oracle") {
  std::mt19937_64 rng(17);
  for (int round = 0; round < 20; ++round) {
    const std::size_t l = 8;
    const std::size_t k = 50;
    Matrix b(l, k);
    for (std::size_t i = 0; i < l; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        b(i, j) = static_cast<double>(rng() % 256);
      }
    }
    const EigenDecomposition eig = eigendecompose_covariance(b);
    const oracle::Eigensystem ref = oracle::jacobi_eigen(oracle::covariance(b));
    for (std::size_t i = 0; i < l; ++i) {
      const double scale = std::max(1.0, std::fabs(ref.values[i]));
      CHECK(std::fabs(eig.values[i] - ref.values[i]) / scale < 1e-8);
    }
  }
}

TEST_CASE("eigendecomposition reconstructs the covariance matrix") {
  std::mt19937_64 rng(23);
  const std::size_t l = 16, k = 64;
  Matrix b(l, k);
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = 0; j < k; ++j) b(i, j) = static_cast<double>(rng() % 256);
  }
  const Matrix g = oracle::covariance(b);
  const EigenDecomposition eig = eigendecompose_covariance(b);

  Matrix rebuilt(l, l);
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = 0; j < l; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < l; ++t) {
        acc += eig.vectors(i, t) * eig.values[t] * eig.vectors(j, t);
      }
      rebuilt(i, j) = acc;
    }
  }
  double gmax = 0.0;
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = 0; j < l; ++j) gmax = std::max(gmax, std::fabs(g(i, j)));
  }
  CHECK(max_abs_diff(g, rebuilt) <= 1e-6 * gmax);
  CHECK(orthonormality_defect(eig.vectors) < 1e-9);
}

TEST_CASE("gram_from_series equals the direct product exactly on bytes") {
  std::mt19937_64 rng(29);
  for (int round = 0; round < 10; ++round) {
    const std::size_t lag = 2 + rng() % 15;
    const std::size_t n = 2 * lag + rng() % 64;
    const auto series = oracle::random_bytes(rng, n);
    const Matrix direct = oracle::covariance(build_trajectory_matrix(series, lag));
    const Matrix fast = gram_from_series(series, n, lag);
    // byte inputs keep every intermediate an exact integer
    CHECK(max_abs_diff(direct, fast) == 0.0);
  }
}

TEST_CASE("eigenvector sign convention is deterministic") {
  std::mt19937_64 rng(31);
  const auto series = oracle::random_bytes(rng, 256);
  const Matrix g = gram_from_series(series, series.size(), 12);
  const EigenDecomposition a = symmetric_eigendecompose(g);
  const EigenDecomposition b = symmetric_eigendecompose(g);
  CHECK(a.vectors == b.vectors);
  for (std::size_t c = 0; c < a.vectors.cols(); ++c) {
    for (std::size_t r = 0; r < a.vectors.rows(); ++r) {
      const double v = a.vectors(r, c);
      if (v != 0.0) {
        CHECK(v > 0.0);
        break;
      }
    }
  }
}

TEST_CASE("non-finite input raises NumericalFailure") {
  Matrix g(2, 2);
  g(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(symmetric_eigendecompose(g), NumericalFailure);
}
