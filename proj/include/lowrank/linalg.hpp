#pragma once

#include "lowrank/common.hpp"

namespace lowrank {

/// Full thin SVD of a dense matrix, M = U * diag(sigma) * V^T.
/// Columns of U and V are orthonormal, singular values are nonincreasing
/// and nonnegative. Individual singular vectors are only defined up to
/// sign; callers must depend on the reconstruction only.
struct SvdResult {
  Matrix left_vectors;     // d1 x r, r = min(d1, d2)
  Vector singular_values;  // r, nonincreasing
  Matrix right_vectors;    // d2 x r

  Matrix reconstruct() const {
    return left_vectors * singular_values.asDiagonal() * right_vectors.transpose();
  }
};

/// Deterministic for a fixed input. Throws InvalidInput on non-finite entries.
SvdResult svd(const Matrix& m);

/// Unique minimizer of ||m - A||_F^2 + tau * ||A||_*.
///
/// The data-fit term carries no 1/2 factor, so the closed form shrinks each
/// singular value by tau/2 (not tau): U * diag((sigma_i - tau/2)_+) * V^T.
Matrix soft_threshold_singular_values(const Matrix& m, double tau);

/// Largest singular value.
double operator_norm(const Matrix& m);

/// max( max_i sum_j |m_ij|, max_j sum_i |m_ij| ): the larger of the
/// (1,infinity) norm of m and of its transpose.
double bracket_norm(const Matrix& m);

/// Sum of |a_ij - b_ij|; shapes must match.
double entrywise_l1_distance(const Matrix& a, const Matrix& b);

/// Number of singular values above the cutoff.
int numerical_rank(const Matrix& m, double cutoff = 1e-12);

} // namespace lowrank
