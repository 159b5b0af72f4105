#include "lowrank/linalg.hpp"

#include <Eigen/SVD>

namespace lowrank {

SvdResult svd(const Matrix& m) {
  require(all_finite(m), "svd: input has non-finite entries");
  // BDCSVD (bidiagonalization + divide and conquer) falls back to Jacobi
  // for small matrices; both are deterministic for a fixed input.
  Eigen::BDCSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return SvdResult{dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

Matrix soft_threshold_singular_values(const Matrix& m, double tau) {
  require(tau >= 0.0 && std::isfinite(tau), "soft_threshold_singular_values: tau must be >= 0");
  if (tau == 0.0) return m;
  SvdResult s = svd(m);
  Vector shrunk = (s.singular_values.array() - tau / 2.0).cwiseMax(0.0);
  return s.left_vectors * shrunk.asDiagonal() * s.right_vectors.transpose();
}

double operator_norm(const Matrix& m) {
  require(all_finite(m), "operator_norm: input has non-finite entries");
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> dec(m);
  return dec.singularValues().size() > 0 ? dec.singularValues()(0) : 0.0;
}

double bracket_norm(const Matrix& m) {
  require(all_finite(m), "bracket_norm: input has non-finite entries");
  if (m.size() == 0) return 0.0;
  const double row = m.cwiseAbs().rowwise().sum().maxCoeff();
  const double col = m.cwiseAbs().colwise().sum().maxCoeff();
  return std::max(row, col);
}

double entrywise_l1_distance(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          "entrywise_l1_distance: shape mismatch");
  return (a - b).cwiseAbs().sum();
}

int numerical_rank(const Matrix& m, double cutoff) {
  SvdResult s = svd(m);
  int r = 0;
  for (int i = 0; i < s.singular_values.size(); ++i)
    if (s.singular_values(i) > cutoff) ++r;
  return r;
}

} // namespace lowrank
