#pragma once

// Stochastic algebraic Riccati equation.
//
// The optimal value matrix K solves K = Pi(G(K)) with
//   G(K) = [ Qbar + E[A'KA]   E[A'KB]        ]
//          [ E[B'KA]          Rbar + E[B'KB] ]
// and Pi the Schur complement onto the state block.  Iterating from
// K_0 = Qbar is value iteration for the infinite-horizon problem; the
// optimal gain is L* = (G_uu)^+ G_ux, i.e. u = -L* x.

#include "rplq/operators.hpp"
#include "rplq/params.hpp"

namespace rplq {

struct AreSolution {
  Matrix K;        // optimal value matrix
  Matrix L_star;   // optimal gain, u = -L* x
  double cost_star = 0.0;  // tr(K Sigma_0)
  int iterations = 0;
  double residual = 0.0;   // ||K - Pi(G(K))||_F at exit
  double rho_star = 0.0;   // rho(F_{L*}), certifies admissibility
};

namespace detail {

// Assemble the (n+m) x (n+m) block matrix G(K) by a weighted sum over atoms.
inline Matrix are_blocks(const ScenarioSet& set, const Matrix& K) {
  const int n = set.dims.n;
  const int m = set.dims.m;
  Matrix Gxx = Matrix::Zero(n, n);
  Matrix Gxu = Matrix::Zero(n, m);
  Matrix Guu = Matrix::Zero(m, m);
  for (const auto& s : set.scenarios) {
    Gxx += s.prob * s.Q;
    Guu += s.prob * s.R;
  }
  for (const auto& g : rplq::detail::ab_groups(set)) {
    Matrix AtK = g.A->transpose() * K;
    Gxx.noalias() += g.prob * AtK * *g.A;
    Gxu.noalias() += g.prob * AtK * *g.B;
    Guu.noalias() += g.prob * g.B->transpose() * K * *g.B;
  }
  Matrix G(n + m, n + m);
  G.topLeftCorner(n, n) = symmetrize(Gxx);
  G.topRightCorner(n, m) = Gxu;
  G.bottomLeftCorner(m, n) = Gxu.transpose();
  G.bottomRightCorner(m, m) = symmetrize(Guu);
  return G;
}

}  // namespace detail

inline AreSolution solve_are(const ScenarioSet& set, const InitDist& init,
                             double tol = 1e-12, int max_iter = 100000) {
  validate(set);
  const int n = set.dims.n;
  ModelSummary summary = summarize(set, init);
  if (!summary.assumption_ok)
    throw ConfigError("model violates positivity assumptions (Qbar, Rbar, Sigma_0)");

  Matrix K = summary.Qbar;
  int it = 0;
  for (; it < max_iter; ++it) {
    Matrix G = detail::are_blocks(set, K);
    Matrix Knext = pi_map(G, n);
    double delta = (Knext - K).norm();
    K = Knext;
    if (delta <= tol * std::max(1.0, K.norm())) break;
  }
  if (it == max_iter)
    throw NoConvergenceError("Riccati value iteration did not converge in " +
                             std::to_string(max_iter) + " iterations");

  Matrix G = detail::are_blocks(set, K);
  AreSolution sol;
  sol.K = K;
  sol.L_star = pinv(G.bottomRightCorner(set.dims.m, set.dims.m)) *
               G.bottomLeftCorner(set.dims.m, n);
  sol.cost_star = (K * init.second_moment()).trace();
  sol.iterations = it + 1;
  sol.residual = (K - pi_map(G, n)).norm();

  // Certify stabilizability a posteriori: the fixed point is only the
  // optimal value if its gain is mean-square stabilizing.
  FOperator f = build_F(set, sol.L_star);
  sol.rho_star = f.rho;
  if (!is_admissible(f))
    throw NoConvergenceError(
        "Riccati fixed point reached but its gain is not admissible (rho = " +
        std::to_string(f.rho) + ")");
  return sol;
}

inline Matrix optimal_gain(const ScenarioSet& set, const Matrix& K) {
  Matrix G = detail::are_blocks(set, K);
  return pinv(G.bottomRightCorner(set.dims.m, set.dims.m)) *
         G.bottomLeftCorner(set.dims.m, set.dims.n);
}

}  // namespace rplq
