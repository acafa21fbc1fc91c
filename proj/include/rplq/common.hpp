#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "rplq/errors.hpp"
#include "rplq/rng.hpp"

namespace rplq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

// Operator (spectral) 2-norm.
inline double op_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(M).singularValues()(0);
}

inline double smallest_eigenvalue(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(S),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Column-major vectorization and its inverse.
inline Vector vec(const Matrix& X) {
  return Eigen::Map<const Vector>(X.data(), X.size());
}

inline Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

// Moore-Penrose pseudo-inverse with a relative singular-value cutoff.
inline Matrix pinv(const Matrix& M, double rcond = 1e-12) {
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double cutoff = rcond * (sv.size() > 0 ? sv(0) : 0.0);
  Vector inv = sv;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    inv(i) = sv(i) > cutoff ? 1.0 / sv(i) : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

// Uniform draw on the Frobenius sphere of radius r in R^{m x n}: Gaussian
// fill, then rescale.
inline Matrix sample_sphere(int m, int n, double r, RngStream& rng) {
  Matrix U(m, n);
  double norm = 0.0;
  do {
    for (Eigen::Index j = 0; j < U.cols(); ++j)
      for (Eigen::Index i = 0; i < U.rows(); ++i) U(i, j) = rng.normal();
    norm = U.norm();
  } while (norm == 0.0);  // probability-zero guard
  return (r / norm) * U;
}

// LU solve with one step of iterative refinement; keeps the residual of
// (I - M) systems near machine precision even when the operator is close to
// the stability boundary.
inline Vector lu_solve_refined(const Eigen::PartialPivLU<Matrix>& lu,
                               const Matrix& A, const Vector& b) {
  Vector x = lu.solve(b);
  Vector r = b - A * x;
  x += lu.solve(r);
  return x;
}

}  // namespace rplq
