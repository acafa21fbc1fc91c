#pragma once

// Exact policy gradient on the infinite-horizon cost C(L) = tr(P_L Sigma_0).
//
// Gradient: grad C(L) = 2 E_L Sigma_L with E_L = R_L L - E[B' P_L A].
// The cost is gradient dominated, which gives computable two-sided bounds on
// the optimality gap and a per-step contraction certificate for plain
// gradient descent.

#include <chrono>
#include <limits>
#include <string>
#include <vector>

#include "rplq/operators.hpp"
#include "rplq/params.hpp"
#include "rplq/riccati.hpp"

namespace rplq {

struct StepRule {
  enum class Kind { Constant, Diminishing, Armijo };
  Kind kind = Kind::Constant;
  double eta = 1e-2;      // Constant: the step; Armijo: initial trial step
  double dim_a = 500.0;   // Diminishing: eta_k = 1 / (dim_a + dim_b * k)
  double dim_b = 5.0;
  double c1 = 0.01;       // Armijo sufficient-decrease constant
  double backtrack = 0.5; // Armijo contraction factor
  int max_backtracks = 40;

  static StepRule constant(double eta) {
    StepRule r;
    r.kind = Kind::Constant;
    r.eta = eta;
    return r;
  }
  static StepRule diminishing(double a, double b) {
    StepRule r;
    r.kind = Kind::Diminishing;
    r.dim_a = a;
    r.dim_b = b;
    return r;
  }
  static StepRule armijo(double eta0 = 1e-2, double c1 = 0.01,
                         double backtrack = 0.5) {
    StepRule r;
    r.kind = Kind::Armijo;
    r.eta = eta0;
    r.c1 = c1;
    r.backtrack = backtrack;
    return r;
  }

  std::string name() const {
    switch (kind) {
      case Kind::Constant: return "constant";
      case Kind::Diminishing: return "diminishing";
      case Kind::Armijo: return "armijo";
    }
    return "?";
  }
};

struct TraceRecord {
  int iter = 0;
  double cost = 0.0;
  double rel_error = 0.0;  // (C - C*) / C* when C* is known, else NaN
  double grad_norm = 0.0;  // Frobenius norm of the (estimated) gradient
  double step = 0.0;       // step size actually taken from this iterate
  double wall_seconds = 0.0;
};

struct DescentTrace {
  std::vector<TraceRecord> records;
  Matrix final_policy;
  std::string note;  // free-form provenance (step rule, seeds, ...)
};

inline double cost_exact(const ScenarioSet& set, const InitDist& init,
                         const Matrix& L) {
  FOperator f = build_F(set, L);
  Matrix P = solve_P(set, L, f);
  return (P * init.second_moment()).trace();
}

inline Matrix grad_exact(const ScenarioSet& set, const InitDist& init,
                         const Matrix& L) {
  return make_cert(set, init, L).grad;
}

// Lower and upper bounds on the optimality gap C(L) - C*:
//   lower:  mu / ||R_L|| * tr(E_L' E_L)
//   upper:  ||Sigma_{L*}|| / (4 mu^2 sigma_min(Rbar)) * ||grad C(L)||_F^2
struct GapBounds {
  double lower = 0.0;
  double upper = 0.0;
  double gap = 0.0;  // the exact gap, for reference
};

inline GapBounds gap_bounds(const ScenarioSet& set, const InitDist& init,
                            const Matrix& L, const AreSolution& sol) {
  ValueCert c = make_cert(set, init, L);
  ModelSummary s = summarize(set, init);
  FOperator fstar = build_F(set, sol.L_star);
  Matrix SigmaStar = solve_sigma(fstar, init.second_moment());
  GapBounds g;
  g.gap = c.cost - sol.cost_star;
  g.lower = s.mu / op_norm(c.R_L) * (c.E_L.transpose() * c.E_L).trace();
  g.upper = op_norm(SigmaStar) * c.grad.squaredNorm() /
            (4.0 * s.mu * s.mu * s.sig_min_R);
  return g;
}

// The cost difference decomposes exactly as
//   C(L') - C(L) = 2 tr(Sigma_{L'} (L'-L)' E_L) + tr(Sigma_{L'} (L'-L)' R_L (L'-L)).
// Returns |C(L') - C(L) - rhs|; zero up to rounding for admissible pairs.
inline double almost_smoothness_residual(const ScenarioSet& set,
                                         const InitDist& init, const Matrix& L,
                                         const Matrix& Lprime) {
  ValueCert c = make_cert(set, init, L);
  ValueCert cp = make_cert(set, init, Lprime);
  Matrix D = Lprime - L;
  double rhs = 2.0 * (cp.Sigma * D.transpose() * c.E_L).trace() +
               (cp.Sigma * D.transpose() * c.R_L * D).trace();
  return std::abs(cp.cost - c.cost - rhs);
}

namespace detail {

// Exact cost of a policy whose Kronecker lift is already built.
inline double cost_with_operator(const ScenarioSet& set, const InitDist& init,
                                 const Matrix& L, const FOperator& f) {
  return (solve_P(set, L, f) * init.second_moment()).trace();
}

struct StepResult {
  double eta = 0.0;
  Matrix cand;
  FOperator f;  // lift of the accepted candidate, reusable by the caller
};

// Chooses the step from iterate L along `direction`.  Throws
// StepRejectedError when a non-adaptive rule steps out of the admissible set
// or backtracking fails.  Armijo acceptance evaluates the exact cost.
inline StepResult take_step(const ScenarioSet& set, const InitDist& init,
                            const Matrix& L, const Matrix& direction,
                            double cost_here, double dir_sq_norm,
                            const StepRule& rule, int iter) {
  switch (rule.kind) {
    case StepRule::Kind::Constant:
    case StepRule::Kind::Diminishing: {
      double eta = rule.kind == StepRule::Kind::Constant
                       ? rule.eta
                       : 1.0 / (rule.dim_a + rule.dim_b * iter);
      StepResult res{eta, L - eta * direction, {}};
      res.f = build_F(set, res.cand);
      if (!is_admissible(res.f))
        throw StepRejectedError("step " + std::to_string(eta) +
                                " left the admissible set at iteration " +
                                std::to_string(iter));
      return res;
    }
    case StepRule::Kind::Armijo: {
      double eta = rule.eta;
      for (int b = 0; b < rule.max_backtracks; ++b) {
        StepResult res{eta, L - eta * direction, {}};
        res.f = build_F(set, res.cand);
        if (is_admissible(res.f) &&
            cost_with_operator(set, init, res.cand, res.f) <=
                cost_here - rule.c1 * eta * dir_sq_norm)
          return res;
        eta *= rule.backtrack;
      }
      throw StepRejectedError("Armijo backtracking exhausted at iteration " +
                              std::to_string(iter));
    }
  }
  throw ConfigError("unknown step rule");
}

}  // namespace detail

inline DescentTrace descend_exact(const ScenarioSet& set, const InitDist& init,
                                  const Matrix& L0, const StepRule& rule,
                                  int iters, const AreSolution* sol = nullptr) {
  auto t0 = std::chrono::steady_clock::now();
  DescentTrace trace;
  trace.note = "mode=exact step_rule=" + rule.name();
  Matrix L = L0;
  FOperator f = build_F(set, L);
  for (int k = 0; k < iters; ++k) {
    ValueCert c = make_cert(set, init, L, f);
    detail::StepResult step = detail::take_step(set, init, L, c.grad, c.cost,
                                                c.grad.squaredNorm(), rule, k);
    TraceRecord rec;
    rec.iter = k;
    rec.cost = c.cost;
    rec.rel_error = sol ? (c.cost - sol->cost_star) / sol->cost_star
                        : std::numeric_limits<double>::quiet_NaN();
    rec.grad_norm = c.grad.norm();
    rec.step = step.eta;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    trace.records.push_back(rec);
    L = std::move(step.cand);
    f = std::move(step.f);
  }
  trace.final_policy = L;
  return trace;
}

}  // namespace rplq
