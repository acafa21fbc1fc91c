#pragma once

// Computable theory diagnostics.
//
// Every quantity below is an explicit formula in model moments and policy
// certificates: admissibility radius, cost/gradient perturbation moduli,
// finite-horizon thresholds, sub-Gaussian propagation constants, sample-size
// thresholds for the zeroth-order estimator, sublevel-set bounds, and the
// Bernstein tail for sub-exponential matrix averages.  Quantities whose
// published definitions contain unspecified absolute constants are omitted
// on purpose.

#include <cmath>
#include <cstdint>
#include <vector>

#include "rplq/exact_pg.hpp"
#include "rplq/operators.hpp"
#include "rplq/parallel.hpp"
#include "rplq/params.hpp"
#include "rplq/riccati.hpp"
#include "rplq/rng.hpp"

namespace rplq {

struct BoundsInputs {
  double t_or_l = 30;  // horizon for sigma_t/beta_t/gamma_t and the tilde family
  double eps = 1e-2;
  double delta = 1e-2;
  double r = 0.1;
};

struct BoundsReport {
  // Admissibility ball radius around L (operator norm), and the coefficient
  // of the covariance perturbation bound on that ball.
  double h_delta = 0;
  double sigma_perturb_coeff = 0;
  // Cost / gradient perturbation moduli at Delta = h_delta.
  double h_c = 0;
  double h_grad = 0;
  double h_grad_frob = 0;  // sqrt(m ^ n) * h_grad
  // Finite-horizon thresholds.
  double h_l = 0;        // horizon making |C - C^{(l)}| <= eps
  double h_l_tilde = 0;  // perturbed-policy variant at accuracy r*eps/(2mn)
  // Exploration radius threshold.
  double h_r = 0;
  // Gradient-norm bound and smoothing sample thresholds.
  double h1 = 0;
  double b0 = 0;
  double sigma0_sq = 0;
  double h_s = 0;
  // Sub-Gaussian propagation at horizon t.
  double sigma_t = 0;
  double beta_t = 0;
  double gamma_t = 0;  // evaluated at M = Qbar + L' Rbar L
  // Perturbed-policy variants over horizon l with radius r.
  double sigma_l_tilde = 0;
  double beta_l_tilde = 0;
  double gamma_l_tilde = 0;
  // High-fidelity single-trajectory sample threshold.
  double h_s_hf = 0;
  // Sublevel-set bounds at gamma = C(L).
  double gamma_level = 0;
  double m_RL = 0;
  double m_grad = 0;
  double m_L = 0;
  double m_ABL = 0;
  // Bernstein tail at (eps, N=1, ...) is parameter-dependent; stored for the
  // given inputs with N from t_or_l?  No: exposed via the free function; the
  // report carries the sub-exponential scale used.
  double bernstein_scale = 0;  // 2 e r gamma with gamma = gamma_l_tilde
  // Context echoed for the JSON report.
  double cost = 0;
  double cost_star = 0;
  double policy_norm = 0;  // ||L|| operator norm
  double e_ABL2 = 0;       // E ||A - B L||^2
  BoundsInputs inputs;
};

// Tail bound for || (1/N) sum xi_i U_i || with centered sub-exponential
// xi_i, ||xi_i||_{L^p} <= gamma * p, and constant U_i of Frobenius norm r.
inline double bernstein_tail(double eps, double N, double r, double gamma,
                             int m, int n) {
  const double e = 2.718281828459045235360287471353;
  double scale = 2.0 * e * r * gamma;
  return 2.0 * (m + n) *
         std::exp(-eps * eps * N / (2.0 * (eps * scale + scale * scale)));
}

namespace detail {

inline double e_ABL2(const ScenarioSet& set, const Matrix& L) {
  double v = 0.0;
  for (const auto& g : detail::ab_groups(set)) {
    double nrm = op_norm(*g.A - *g.B * L);
    v += g.prob * nrm * nrm;
  }
  return v;
}

}  // namespace detail

inline BoundsReport compute_bounds(const ScenarioSet& set,
                                   const ModelSummary& sm,
                                   const ValueCert& cert,
                                   const AreSolution& sol,
                                   const BoundsInputs& in) {
  const int n = set.dims.n;
  const int m = set.dims.m;
  const double C = cert.cost;
  const double Cstar = sol.cost_star;
  const double mu = sm.mu;
  const double sq = sm.sig_min_Q;       // sigma_min(Qbar)
  const double sr = sm.sig_min_R;       // sigma_min(Rbar)
  const double qn = sm.e_Q_norm;        // ||Qbar||
  const double rn = sm.e_R_norm;        // E ||R||
  const double bb = sm.e_B2;            // E ||B||^2
  const double Lnorm = op_norm(cert.L);
  const double abl = detail::e_ABL2(set, cert.L);
  const double K = sm.bound_K;
  const double mind = std::min(m, n);
  const double r = in.r;
  const double eps = in.eps;
  const double t = in.t_or_l;

  BoundsReport rep;
  rep.inputs = in;
  rep.cost = C;
  rep.cost_star = Cstar;
  rep.policy_norm = Lnorm;
  rep.e_ABL2 = abl;
  rep.gamma_level = C;

  const double stab = std::sqrt(bb) * (1.0 + std::sqrt(abl));
  rep.h_delta = sq * mu / (4.0 * stab * C);
  rep.sigma_perturb_coeff = 4.0 * (C / sq) * (C / sq) * stab / mu;

  const double delta_L = rep.h_delta;  // Delta(L) = h_delta(L) throughout
  const double inner = 2.0 * rn * (delta_L + 2.0 * Lnorm) +
                       4.0 * C / (mu * sq) * stab * (qn + rn * Lnorm * Lnorm);
  rep.h_c = sm.e_x0_sq / (mu * sq) * inner;

  const double RLnorm = op_norm(cert.R_L);
  rep.h_grad =
      4.0 * (C / sq) *
          ((sm.e_AB + bb * (delta_L + Lnorm)) * (C / (mu * sq)) * inner +
           op_norm(sm.Rbar) + bb * C / mu) +
      8.0 * std::sqrt(RLnorm / mu * std::max(0.0, C - Cstar)) * (C / sq) *
          (C / sq) * stab / mu;
  rep.h_grad_frob = std::sqrt(mind) * rep.h_grad;

  rep.h_l = n * C * C * (qn + rn * Lnorm * Lnorm) / (eps * mu * sq * sq);
  rep.h_l_tilde = 4.0 * m * n * n * C * (qn + rn * (Lnorm + r) * (Lnorm + r)) /
                  (r * eps * mu * sq * sq);

  rep.h_r = std::min({delta_L, 1.0 / rep.h_c, eps / rep.h_grad_frob});

  rep.h1 = 2.0 * (C / sq) *
           std::sqrt(RLnorm / mu * std::max(0.0, C - Cstar));
  const double mnCr = 2.0 * m * n * C / r;
  rep.b0 = mnCr + eps / 2.0 + rep.h1;
  rep.sigma0_sq = mnCr * mnCr + (eps / 2.0 + rep.h1) * (eps / 2.0 + rep.h1);
  rep.h_s = 8.0 * mind / (eps * eps) *
            (mnCr * mnCr + (eps / 2.0 + rep.h1) * (eps / 2.0 + rep.h1) +
             eps * (mnCr + eps / 2.0 + rep.h1) / (2.0 * std::sqrt(mind))) *
            std::log(2.0 * (m + n) / in.delta);

  rep.sigma_t = std::pow(4.0 * K * (1.0 + Lnorm), t) *
                (sm.sigma0 + 2.0 * sm.x0_mean_norm);
  rep.beta_t = 16.0 * (rep.sigma_t * rep.sigma_t +
                       std::pow(K * (1.0 + Lnorm), 2.0 * t) * sm.e_x0_sq);
  const double Mnorm =
      op_norm(sm.Qbar + cert.L.transpose() * sm.Rbar * cert.L);
  rep.gamma_t = 4.0 * Mnorm *
                (n * rep.beta_t +
                 std::pow((1.0 + Lnorm) * K, 2.0 * t) * sm.e_x0_sq);

  rep.sigma_l_tilde = std::pow(4.0 * (1.0 + r + Lnorm) * K, t) *
                      (sm.sigma0 + 2.0 * sm.x0_mean_norm);
  rep.beta_l_tilde =
      16.0 * (rep.sigma_l_tilde * rep.sigma_l_tilde +
              std::pow(K * (1.0 + r + Lnorm), 2.0 * t) * sm.e_x0_sq);
  rep.gamma_l_tilde =
      4.0 * K * (1.0 + (Lnorm + r) * (Lnorm + r)) *
      (n * rep.beta_l_tilde +
       std::pow((1.0 + r + Lnorm) * K, 2.0 * t) * sm.e_x0_sq);

  const double e = 2.718281828459045235360287471353;
  const double mnl = m * n * t;
  rep.h_s_hf = 2.0 * mnl * mnl * mind / (eps * eps * r * r) *
               (std::pow(2.0 * e * rep.gamma_l_tilde, 2.0) +
                eps * (2.0 * e * r * rep.gamma_l_tilde) /
                    (mnl * std::sqrt(mind))) *
               std::log(2.0 * (m + n) * t / in.delta);
  rep.bernstein_scale = 2.0 * e * r * rep.gamma_l_tilde;

  const double gamma = rep.gamma_level;
  rep.m_RL = op_norm(sm.Rbar) + bb * gamma / mu;
  rep.m_grad = 2.0 * gamma / sq *
               std::sqrt(rep.m_RL / mu * std::max(0.0, gamma - Cstar));
  rep.m_L = 1.0 / sr *
            (std::sqrt(rep.m_RL / mu * std::max(0.0, gamma - Cstar)) +
             sm.e_AB * gamma / mu);
  rep.m_ABL = 2.0 * (sm.e_A2 + bb * rep.m_L * rep.m_L);
  return rep;
}

// Draws perturbations with operator norm <= radius_scale * h_delta(L) and
// reports the admissible fraction; the admissibility-ball lemma guarantees
// 1.0 at radius_scale = 1.
inline double verify_admissibility_radius(const ScenarioSet& set,
                                          const InitDist& init, const Matrix& L,
                                          int n_samples,
                                          double radius_scale = 1.0,
                                          std::uint64_t seed = 0,
                                          int threads = 0) {
  ModelSummary sm = summarize(set, init);
  ValueCert cert = make_cert(set, init, L);
  double stab =
      std::sqrt(sm.e_B2) * (1.0 + std::sqrt(detail::e_ABL2(set, L)));
  double h_delta = sm.sig_min_Q * sm.mu / (4.0 * stab * cert.cost);
  double radius = radius_scale * h_delta;
  std::vector<int> ok(static_cast<std::size_t>(n_samples), 0);
  parallel_for(
      static_cast<std::size_t>(n_samples),
      [&](std::size_t i) {
        RngStream rng(seed, "adm-radius", i);
        Matrix D(L.rows(), L.cols());
        for (Eigen::Index cj = 0; cj < D.cols(); ++cj)
          for (Eigen::Index ri = 0; ri < D.rows(); ++ri)
            D(ri, cj) = rng.normal();
        double scale = radius * rng.uniform01() / std::max(op_norm(D), 1e-300);
        ok[i] = is_admissible(build_F(set, L + scale * D)) ? 1 : 0;
      },
      threads);
  long admissible = 0;
  for (int v : ok) admissible += v;
  return static_cast<double>(admissible) / n_samples;
}

struct BernsteinRow {
  double N = 0;
  double eps = 0;
  double empirical = 0;
  double bound = 0;
};

// Monte Carlo check of the Bernstein tail with centered unit-rate
// exponential xi (whose L^p norms satisfy ||xi||_{L^p} <= p, i.e. gamma=1).
inline std::vector<BernsteinRow> verify_bernstein(
    double gamma, double r, const std::vector<int>& N_grid,
    const std::vector<double>& eps_grid, int trials, int m, int n,
    std::uint64_t seed = 0, int threads = 0) {
  std::vector<BernsteinRow> table;
  for (int N : N_grid) {
    // Fixed direction matrices, one set per N (the lemma holds for any
    // constant U_i with ||U_i||_F = r).
    std::vector<Matrix> U(static_cast<std::size_t>(N));
    {
      RngStream rng(seed, "bernstein-U", static_cast<std::uint64_t>(N));
      for (auto& Ui : U) Ui = sample_sphere(m, n, r, rng);
    }
    std::vector<double> trial_norms(static_cast<std::size_t>(trials), 0.0);
    parallel_for(
        static_cast<std::size_t>(trials),
        [&](std::size_t tr) {
          RngStream rng(seed, "bernstein", static_cast<std::uint64_t>(N), tr);
          Matrix S = Matrix::Zero(m, n);
          for (int i = 0; i < N; ++i) {
            // Centered exponential: -log(1-u) - 1.
            double u = rng.uniform01();
            double xi = -std::log1p(-u) - 1.0;
            S += xi * U[static_cast<std::size_t>(i)];
          }
          trial_norms[tr] = op_norm(S / N);
        },
        threads);
    for (double eps : eps_grid) {
      BernsteinRow row;
      row.N = N;
      row.eps = eps;
      long hits = 0;
      for (double v : trial_norms)
        if (v >= eps) ++hits;
      row.empirical = static_cast<double>(hits) / trials;
      row.bound = bernstein_tail(eps, N, r, gamma, m, n);
      table.push_back(row);
    }
  }
  return table;
}

}  // namespace rplq
