#pragma once

// Finite-horizon simulation and its exact counterpart.
//
// A rollout draws x_0 from the initial distribution and fresh (A, B, Q, R)
// each step, applying u_t = -L x_t for l steps.  Randomness is keyed by
// (seed, rollout index, step) so trajectories are reproducible independent
// of scheduling.  cost_finite_exact computes E[sum of stage costs] without
// sampling by propagating the covariance through the Kronecker lift.

#include <cstdint>
#include <vector>

#include "rplq/operators.hpp"
#include "rplq/params.hpp"
#include "rplq/rng.hpp"

namespace rplq {

struct Trajectory {
  std::vector<Vector> states;       // x_0 .. x_l
  std::vector<Vector> controls;     // u_0 .. u_{l-1}
  std::vector<double> stage_costs;  // x_t' Q_t x_t + u_t' R_t u_t
  double total = 0.0;
};

namespace detail {

constexpr double kStateOverflowGuard = 1e150;

}  // namespace detail

// Simulates one rollout, recording the full trajectory.
inline Trajectory simulate(const ParameterModel& model, const InitDist& init,
                           const Matrix& L, int l, std::uint64_t seed,
                           std::uint64_t rollout_index = 0) {
  Trajectory traj;
  RngStream x0_stream(seed, "rollout-x0", rollout_index);
  Vector x = sample_x0(init, x0_stream);
  traj.states.push_back(x);
  for (int t = 0; t < l; ++t) {
    RngStream step_stream(seed, "rollout", rollout_index,
                          static_cast<std::uint64_t>(t));
    ParamScenario w = model.sample(step_stream);
    Vector u = -L * x;
    double stage = x.dot(w.Q * x) + u.dot(w.R * u);
    traj.controls.push_back(u);
    traj.stage_costs.push_back(stage);
    traj.total += stage;
    x = w.A * x + w.B * u;
    if (x.cwiseAbs().maxCoeff() > detail::kStateOverflowGuard)
      throw DivergedRolloutError(rollout_index, t);
    traj.states.push_back(x);
  }
  return traj;
}

// Cost-only fast path used by the gradient estimator.
inline double rollout_cost(const ParameterModel& model, const InitDist& init,
                           const Matrix& L, int l, std::uint64_t seed,
                           std::uint64_t rollout_index) {
  RngStream x0_stream(seed, "rollout-x0", rollout_index);
  Vector x = sample_x0(init, x0_stream);
  double total = 0.0;
  for (int t = 0; t < l; ++t) {
    RngStream step_stream(seed, "rollout", rollout_index,
                          static_cast<std::uint64_t>(t));
    ParamScenario w = model.sample(step_stream);
    Vector u = -L * x;
    total += x.dot(w.Q * x) + u.dot(w.R * u);
    x = w.A * x + w.B * u;
    if (x.cwiseAbs().maxCoeff() > detail::kStateOverflowGuard)
      throw DivergedRolloutError(rollout_index, t);
  }
  return total;
}

// E[sum_{t<l} x_t' Q x_t + u_t' R u_t] = sum_{t<l} <F_L^t(Sigma_0), Qbar + L' Rbar L>,
// evaluated by iterating the lift on vec(Sigma).  Valid for any policy (no
// admissibility needed at finite horizon).
inline double cost_finite_exact(const ScenarioSet& set, const InitDist& init,
                                const Matrix& L, int l) {
  const int n = set.dims.n;
  Matrix Qbar = Matrix::Zero(n, n);
  Matrix Rbar = Matrix::Zero(set.dims.m, set.dims.m);
  for (const auto& s : set.scenarios) {
    Qbar += s.prob * s.Q;
    Rbar += s.prob * s.R;
  }
  Matrix W = symmetrize(Qbar) + L.transpose() * symmetrize(Rbar) * L;
  Matrix M = Matrix::Zero(n * n, n * n);
  for (const auto& g : detail::ab_groups(set)) {
    Matrix G = *g.A - *g.B * L;
    M.noalias() += g.prob * Eigen::kroneckerProduct(G, G);
  }
  Vector sig = vec(init.second_moment());
  Vector w = vec(W);
  double total = 0.0;
  for (int t = 0; t < l; ++t) {
    total += w.dot(sig);
    sig = M * sig;
  }
  return total;
}

}  // namespace rplq
