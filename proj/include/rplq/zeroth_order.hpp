#pragma once

// Model-free (zeroth-order) policy gradient.
//
// The smoothed objective C_r(L) = E_{U ~ unif ball} C(L + U) has gradient
// (mn / r^2) E_{U ~ unif sphere_r} [ C(L + U) U ], estimated from N rollouts
// of the perturbed policies:
//   Ghat = (1/N) sum_i (mn / r^2) Chat_i U_i,   ||U_i||_F = r.
//
// Determinism: sample i draws U_i and its rollout from streams keyed by
// (seed, i); per-sample results are stored by index and combined with a
// fixed-shape pairwise reduction, so Ghat is bitwise identical for any
// thread count.

#include <cstdint>
#include <vector>

#include "rplq/exact_pg.hpp"
#include "rplq/parallel.hpp"
#include "rplq/rollout.hpp"

namespace rplq {

struct GradEstimate {
  Matrix G;
  int N = 0;
  int l = 0;
  double r = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

inline Matrix perturbation_for_sample(const Dims& dims, double r,
                                      std::uint64_t seed, std::size_t i) {
  RngStream rng(seed, "sphere", i);
  return sample_sphere(dims.m, dims.n, r, rng);
}

}  // namespace detail

inline GradEstimate estimate_gradient(const ParameterModel& model,
                                      const InitDist& init, const Matrix& L,
                                      int N, int l, double r,
                                      std::uint64_t seed, int threads = 0) {
  const Dims& dims = model.dims();
  // Phase 1 (parallel): per-sample perturbed rollout costs, indexed by i.
  std::vector<double> costs(static_cast<std::size_t>(N), 0.0);
  parallel_for(
      static_cast<std::size_t>(N),
      [&](std::size_t i) {
        Matrix U = detail::perturbation_for_sample(dims, r, seed, i);
        costs[i] = rollout_cost(model, init, L + U, l, seed, i);
      },
      threads);
  // Phase 2 (fixed-shape tree): combine Chat_i U_i.  The perturbations are
  // regenerated from their streams; summation order depends only on N.
  Matrix sum = pairwise_reduce<Matrix>(
      0, static_cast<std::size_t>(N),
      [&](std::size_t i) {
        return Matrix(costs[i] *
                      detail::perturbation_for_sample(dims, r, seed, i));
      },
      [](Matrix a, Matrix b) { return Matrix(a + b); });
  GradEstimate est;
  est.G = (static_cast<double>(dims.m * dims.n) / (r * r * N)) * sum;
  est.N = N;
  est.l = l;
  est.r = r;
  est.seed = seed;
  return est;
}

// Model-free gradient descent.  Iteration k keys its estimator with a seed
// derived from (master_seed, k).  Progress is tracked against the exact cost
// computed from the model's scenario set; Armijo acceptance likewise uses
// the exact cost, so the line search measures true descent while the search
// direction stays model-free.
inline DescentTrace descend_model_free(const ParameterModel& model,
                                       const InitDist& init, const Matrix& L0,
                                       const StepRule& rule, int iters, int N,
                                       int l, double r,
                                       std::uint64_t master_seed,
                                       const AreSolution* sol = nullptr,
                                       int threads = 0) {
  const ScenarioSet& set = model.atoms();
  DescentTrace trace;
  trace.note = "mode=model-free step_rule=" + rule.name() +
               " seed=" + std::to_string(master_seed) +
               " armijo_cost=exact reject=skip";
  Matrix L = L0;
  FOperator f = build_F(set, L);
  for (int k = 0; k < iters; ++k) {
    double cost = detail::cost_with_operator(set, init, L, f);
    std::uint64_t seed_k =
        RngStream(master_seed, "iter", static_cast<std::uint64_t>(k)).derive();
    GradEstimate est =
        estimate_gradient(model, init, L, N, l, r, seed_k, threads);
    // An estimated direction can be pure noise; a step no rule accepts
    // (inadmissible, or Armijo finds no sufficient decrease for any step
    // size) is skipped rather than fatal, and the iterate stays put.
    bool moved = true;
    detail::StepResult step;
    try {
      step = detail::take_step(set, init, L, est.G, cost,
                               est.G.squaredNorm(), rule, k);
    } catch (const StepRejectedError&) {
      moved = false;
    }
    TraceRecord rec;
    rec.iter = k;
    rec.cost = cost;
    rec.rel_error = sol ? (cost - sol->cost_star) / sol->cost_star
                        : std::numeric_limits<double>::quiet_NaN();
    rec.grad_norm = est.G.norm();
    rec.step = moved ? step.eta : 0.0;
    rec.wall_seconds = 0.0;  // omitted from model-free traces: records must
                             // be bitwise reproducible across thread counts
    trace.records.push_back(rec);
    if (moved) {
      L = std::move(step.cand);
      f = std::move(step.f);
    }
  }
  trace.final_policy = L;
  return trace;
}

}  // namespace rplq
