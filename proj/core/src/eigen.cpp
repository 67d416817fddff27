#include "casad/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "casad/errors.hpp"

namespace casad {

namespace {

constexpr int kMaxQlIterations = 64;

/// Householder reduction of a symmetric matrix to tridiagonal form,
/// accumulating the orthogonal transformation in-place. On return `a`
/// holds Q with Q^T A Q tridiagonal, `d` the diagonal and `e` the
/// subdiagonal (e[0] unused).
void tridiagonalize(Matrix& a, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j) d[j] = a(n - 1, j);

  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::fabs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = a(i - 1, j);
        a(i, j) = 0.0;
        a(j, i) = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0.0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;

      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        a(j, i) = f;
        g = e[j] + a(j, j) * f;
        for (std::size_t k = j + 1; k < i; ++k) {
          g += a(k, j) * d[k];
          e[k] += a(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (std::size_t k = j; k < i; ++k) {
          a(k, j) -= f * e[k] + g * d[k];
        }
        d[j] = a(i - 1, j);
        a(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  // Accumulate the Householder transformations.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    a(n - 1, i) = a(i, i);
    a(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = a(k, i + 1) / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += a(k, i + 1) * a(k, j);
        for (std::size_t k = 0; k <= i; ++k) a(k, j) -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) a(k, i + 1) = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = a(n - 1, j);
    a(n - 1, j) = 0.0;
  }
  a(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

/// Implicit-shift QL on the tridiagonal (d, e), rotations applied to the
/// eigenvector columns of `a`. Throws NumericalFailure when an eigenvalue
/// fails to converge.
void ql_implicit_shift(Matrix& a, std::vector<double>& d,
                       std::vector<double>& e) {
  const std::size_t n = a.rows();
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::ldexp(1.0, -52);
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::fabs(d[l]) + std::fabs(e[l]));
    std::size_t m = l;
    while (m < n && std::fabs(e[m]) > eps * tst1) ++m;
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > kMaxQlIterations) {
          throw NumericalFailure(
              "symmetric eigensolver failed to converge (eigenvalue " +
              std::to_string(l) + ")");
        }
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0.0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = m; i-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          for (std::size_t k = 0; k < n; ++k) {
            h = a(k, i + 1);
            a(k, i + 1) = s * a(k, i) + c * h;
            a(k, i) = c * a(k, i) - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::fabs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

void fix_eigenvector_signs(Matrix& vectors) {
  const std::size_t n = vectors.rows();
  for (std::size_t c = 0; c < vectors.cols(); ++c) {
    for (std::size_t r = 0; r < n; ++r) {
      const double v = vectors(r, c);
      if (v != 0.0) {
        if (v < 0.0) {
          for (std::size_t k = 0; k < n; ++k) vectors(k, c) = -vectors(k, c);
        }
        break;
      }
    }
  }
}

}  // namespace

Matrix build_trajectory_matrix(std::span<const std::uint8_t> series,
                               std::size_t lag) {
  const std::size_t n = series.size();
  if (lag < 1 || n < lag) {
    throw SeriesTooShort("series of " + std::to_string(n) +
                         " bytes cannot form lag-" + std::to_string(lag) +
                         " vectors");
  }
  const std::size_t k = n - lag + 1;
  if (k < lag) {
    throw SeriesTooShort("series of " + std::to_string(n) + " bytes gives K=" +
                         std::to_string(k) + " < L=" + std::to_string(lag));
  }
  Matrix b(lag, k);
  for (std::size_t row = 0; row < lag; ++row) {
    double* out = b.row(row);
    for (std::size_t col = 0; col < k; ++col) {
      out[col] = static_cast<double>(series[col + row]);
    }
  }
  return b;
}

Matrix gram_from_series(std::span<const std::uint8_t> series,
                        std::size_t length, std::size_t lag) {
  if (series.size() < length) {
    throw SeriesTooShort("series shorter than requested training length");
  }
  if (lag < 1 || length < lag || length - lag + 1 < lag) {
    throw SeriesTooShort("training length " + std::to_string(length) +
                         " too short for lag " + std::to_string(lag));
  }
  const std::size_t k = length - lag + 1;
  const std::uint8_t* s = series.data();

  Matrix g(lag, lag);
  // First row by direct dot products, the rest along each diagonal via
  // the Hankel shift recurrence.
  for (std::size_t q = 0; q < lag; ++q) {
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      acc += static_cast<double>(s[i]) * static_cast<double>(s[i + q]);
    }
    g(0, q) = acc;
  }
  for (std::size_t q0 = 0; q0 < lag; ++q0) {
    for (std::size_t p = 0; p + 1 < lag && q0 + p + 1 < lag; ++p) {
      const double prev = g(p, q0 + p);
      const double drop =
          static_cast<double>(s[p]) * static_cast<double>(s[q0 + p]);
      const double add = static_cast<double>(s[k + p]) *
                         static_cast<double>(s[k + q0 + p]);
      g(p + 1, q0 + p + 1) = prev - drop + add;
    }
  }
  for (std::size_t r = 1; r < lag; ++r) {
    for (std::size_t c = 0; c < r; ++c) g(r, c) = g(c, r);
  }
  return g;
}

EigenDecomposition symmetric_eigendecompose(Matrix symmetric) {
  const std::size_t n = symmetric.rows();
  if (n == 0 || symmetric.cols() != n) {
    throw DimensionMismatch("eigendecomposition needs a square matrix");
  }
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (!std::isfinite(symmetric(r, c))) {
        throw NumericalFailure("non-finite entry in symmetric matrix");
      }
    }
  }

  std::vector<double> d(n, 0.0), e(n, 0.0);
  if (n == 1) {
    d[0] = symmetric(0, 0);
    symmetric(0, 0) = 1.0;
  } else {
    tridiagonalize(symmetric, d, e);
    ql_implicit_shift(symmetric, d, e);
  }

  // Sort by non-increasing eigenvalue (stable for exact ties).
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = d[order[c]];
    for (std::size_t r = 0; r < n; ++r) {
      out.vectors(r, c) = symmetric(r, order[c]);
    }
  }
  fix_eigenvector_signs(out.vectors);
  return out;
}

EigenDecomposition eigendecompose_gram(Matrix gram) {
  EigenDecomposition eig = symmetric_eigendecompose(std::move(gram));

  // Gram matrices are positive semidefinite; tolerate rounding-level
  // negatives only.
  const double floor_tol =
      -1e-9 * std::max(1.0, eig.values.empty() ? 0.0 : std::fabs(eig.values[0]));
  for (double& v : eig.values) {
    if (v < floor_tol) {
      throw NumericalFailure("covariance eigenvalue " + std::to_string(v) +
                             " below the PSD tolerance");
    }
    if (v < 0.0) v = 0.0;
  }
  return eig;
}

EigenDecomposition eigendecompose_covariance(const Matrix& trajectory) {
  const std::size_t l = trajectory.rows();
  const std::size_t k = trajectory.cols();
  if (l == 0 || k == 0) {
    throw DimensionMismatch("empty trajectory matrix");
  }
  Matrix g(l, l);
  for (std::size_t i = 0; i < l; ++i) {
    const double* ri = trajectory.row(i);
    for (std::size_t j = i; j < l; ++j) {
      const double* rj = trajectory.row(j);
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += ri[t] * rj[t];
      g(i, j) = acc;
      g(j, i) = acc;
    }
  }
  return eigendecompose_gram(std::move(g));
}

}  // namespace casad
