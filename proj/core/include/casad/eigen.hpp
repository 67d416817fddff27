#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "casad/matrix.hpp"

namespace casad {

/// Eigensystem of a symmetric matrix, eigenvalues non-increasing,
/// eigenvectors in the matching columns.
struct EigenDecomposition {
  Matrix vectors;               // n x n, column i is the i-th eigenvector
  std::vector<double> values;   // length n, values[0] >= values[1] >= ...
};

/// Lagged trajectory matrix: column i (0-based) is
/// (s[i], s[i+1], ..., s[i+L-1])^T, K = N-L+1 columns. Requires K >= L
/// (wide matrix); throws SeriesTooShort otherwise.
Matrix build_trajectory_matrix(std::span<const std::uint8_t> series,
                               std::size_t lag);

/// Gram matrix B*B^T of the (implicit) trajectory matrix of the first
/// `length` bytes, computed in O(L*K) via the Hankel shift recurrence
///   G[p+1][q+1] = G[p][q] - s[p]*s[q] + s[K+p]*s[K+q].
/// For byte-valued input every intermediate is an exact integer below
/// 2^53, so the result equals the direct product bit for bit.
Matrix gram_from_series(std::span<const std::uint8_t> series,
                        std::size_t length, std::size_t lag);

/// Full eigendecomposition of a symmetric matrix: Householder reduction
/// to tridiagonal form followed by implicit-shift QL. Output is sorted by
/// non-increasing eigenvalue; eigenvalues below -1e-9 * max(|e|,1) raise
/// NumericalFailure, small negatives are clamped to 0; each eigenvector's
/// first nonzero component is made positive so results are reproducible.
EigenDecomposition symmetric_eigendecompose(Matrix symmetric);

/// symmetric_eigendecompose specialised to Gram matrices: the input is
/// positive semidefinite, so rounding-level negative eigenvalues are
/// clamped to 0 and anything below -1e-9 * max(|e_1|, 1) raises
/// NumericalFailure.
EigenDecomposition eigendecompose_gram(Matrix gram);

/// Eigendecomposition of the covariance matrix B*B^T.
EigenDecomposition eigendecompose_covariance(const Matrix& trajectory);

}  // namespace casad
