#pragma once

// Closed-loop operators for a policy u = -L x.
//
// With G = A - B L random, the state covariance propagates through
// F_L(X) = E[G X G'], realized here through its Kronecker lift
// M = sum_i p_i (G_i (x) G_i) acting on vec(X).  The policy is admissible
// (mean-square stabilizing) iff rho(M) < 1; then
//   Sigma_L = sum_t F_L^t(Sigma_0)    solves (I - M) vec(Sigma) = vec(Sigma_0)
//   P_L = Qbar + L' Rbar L + F_L^*(P) solves the adjoint system with M'.

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <string>
#include <unordered_map>
#include <vector>

#include "rplq/common.hpp"
#include "rplq/params.hpp"

namespace rplq {

struct FOperator {
  int n = 0;
  Matrix M;           // n^2 x n^2 Kronecker lift
  double rho = 0.0;   // spectral radius of M
};

namespace detail {

struct ABGroup {
  double prob = 0.0;
  const Matrix* A = nullptr;
  const Matrix* B = nullptr;
};

// Merges scenarios with bitwise-identical (A, B).  Tensor quadrature over
// noise dimensions that only drive Q and R repeats each dynamics pair many
// times; merging the weights up front makes the O(n^4)-per-atom operator
// assembly proportional to the number of distinct pairs.  Group order
// follows first appearance, so results are deterministic.
inline std::vector<ABGroup> ab_groups(const ScenarioSet& set) {
  std::vector<ABGroup> groups;
  std::unordered_map<std::string, std::size_t> index;
  std::string key;
  for (const auto& s : set.scenarios) {
    key.assign(reinterpret_cast<const char*>(s.A.data()),
               sizeof(double) * static_cast<std::size_t>(s.A.size()));
    key.append(reinterpret_cast<const char*>(s.B.data()),
               sizeof(double) * static_cast<std::size_t>(s.B.size()));
    auto [it, inserted] = index.emplace(key, groups.size());
    if (inserted) groups.push_back({s.prob, &s.A, &s.B});
    else groups[it->second].prob += s.prob;
  }
  return groups;
}

}  // namespace detail

inline FOperator build_F(const ScenarioSet& set, const Matrix& L) {
  const int n = set.dims.n;
  if (L.rows() != set.dims.m || L.cols() != n)
    throw ConfigError("policy dimensions do not match model");
  FOperator f;
  f.n = n;
  f.M = Matrix::Zero(n * n, n * n);
  for (const auto& g : detail::ab_groups(set)) {
    Matrix G = *g.A - *g.B * L;
    f.M.noalias() += g.prob * Eigen::kroneckerProduct(G, G);
  }
  f.rho = Eigen::EigenSolver<Matrix>(f.M, /*computeEigenvectors=*/false)
              .eigenvalues()
              .cwiseAbs()
              .maxCoeff();
  return f;
}

inline bool is_admissible(const FOperator& f, double margin = 1e-9) {
  return f.rho < 1.0 - margin;
}

inline void require_admissible(const FOperator& f, double margin = 1e-9) {
  if (!is_admissible(f, margin)) throw NotAdmissibleError(f.rho);
}

// Stationary covariance: (I - M) vec(Sigma) = vec(Sigma_0).
inline Matrix solve_sigma(const FOperator& f, const Matrix& Sigma0,
                          double margin = 1e-9) {
  require_admissible(f, margin);
  const int n = f.n;
  Matrix A = Matrix::Identity(n * n, n * n) - f.M;
  Eigen::PartialPivLU<Matrix> lu(A);
  Vector x = lu_solve_refined(lu, A, vec(Sigma0));
  return symmetrize(unvec(x, n, n));
}

// Value matrix: (I - M') vec(P) = vec(Qbar + L' Rbar L).
inline Matrix solve_P(const ScenarioSet& set, const Matrix& L,
                      const FOperator& f, double margin = 1e-9) {
  require_admissible(f, margin);
  const int n = f.n;
  Matrix Qbar = Matrix::Zero(n, n);
  Matrix Rbar = Matrix::Zero(set.dims.m, set.dims.m);
  for (const auto& s : set.scenarios) {
    Qbar += s.prob * s.Q;
    Rbar += s.prob * s.R;
  }
  Matrix rhs = symmetrize(Qbar) + L.transpose() * symmetrize(Rbar) * L;
  Matrix A = Matrix::Identity(n * n, n * n) - f.M.transpose();
  Eigen::PartialPivLU<Matrix> lu(A);
  Vector x = lu_solve_refined(lu, A, vec(symmetrize(rhs)));
  return symmetrize(unvec(x, n, n));
}

// Schur-complement maps on (n+m) x (n+m) symmetric blocks
//   P = [ P_xx  P_xu ]
//       [ P_ux  P_uu ].
inline Matrix pi_map(const Matrix& P, int n) {
  const int m = static_cast<int>(P.rows()) - n;
  Matrix Pxx = P.topLeftCorner(n, n);
  Matrix Pxu = P.topRightCorner(n, m);
  Matrix Puu = P.bottomRightCorner(m, m);
  return symmetrize(Pxx - Pxu * pinv(Puu) * Pxu.transpose());
}

inline Matrix gamma_map(const Matrix& P, int n) {
  const int m = static_cast<int>(P.rows()) - n;
  Matrix Pux = P.bottomLeftCorner(m, n);
  Matrix Puu = P.bottomRightCorner(m, m);
  return -pinv(Puu) * Pux;
}

// Everything the gradient and the bounds need about one (model, policy) pair.
struct ValueCert {
  Matrix L;
  Matrix P;        // value matrix P_L
  Matrix Sigma;    // stationary covariance Sigma_L
  Matrix R_L;      // Rbar + E[B' P B]
  Matrix E_L;      // R_L L - E[B' P A]
  Matrix grad;     // 2 E_L Sigma_L
  double cost = 0; // tr(P_L Sigma_0)
  double rho = 0;  // spectral radius of the Kronecker lift
};

inline ValueCert make_cert(const ScenarioSet& set, const InitDist& init,
                           const Matrix& L, const FOperator& f,
                           double margin = 1e-9) {
  require_admissible(f, margin);
  ValueCert c;
  c.L = L;
  c.rho = f.rho;
  c.P = solve_P(set, L, f, margin);
  c.Sigma = solve_sigma(f, init.second_moment(), margin);
  const int m = set.dims.m;
  const int n = set.dims.n;
  Matrix Rbar = Matrix::Zero(m, m);
  Matrix BPB = Matrix::Zero(m, m);
  Matrix BPA = Matrix::Zero(m, n);
  for (const auto& s : set.scenarios) Rbar += s.prob * s.R;
  for (const auto& g : detail::ab_groups(set)) {
    Matrix BtP = g.B->transpose() * c.P;
    BPB.noalias() += g.prob * BtP * *g.B;
    BPA.noalias() += g.prob * BtP * *g.A;
  }
  c.R_L = symmetrize(symmetrize(Rbar) + BPB);
  c.E_L = c.R_L * L - BPA;
  c.grad = 2.0 * c.E_L * c.Sigma;
  c.cost = (c.P * init.second_moment()).trace();
  return c;
}

inline ValueCert make_cert(const ScenarioSet& set, const InitDist& init,
                           const Matrix& L, double margin = 1e-9) {
  return make_cert(set, init, L, build_F(set, L), margin);
}

}  // namespace rplq
