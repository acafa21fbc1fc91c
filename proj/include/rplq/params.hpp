#pragma once

// Random parameter models for LQ systems.
//
// The dynamics x_{t+1} = A_{t+1} x_t + B_{t+1} u_t and stage cost
// x' Q x + u' R u draw (A, B, Q, R) i.i.d. each step.  Two representations:
//
//  * ScenarioSet  - a finite list of weighted atoms; every expectation in the
//    toolkit is a weighted sum over it.
//  * PolyNoise    - matrices that are polynomials in a few independent
//    uniform noise components.  Compiled to a ScenarioSet by tensor
//    Gauss-Legendre quadrature, which is exact for the polynomial moments
//    the operators need.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rplq/common.hpp"
#include "rplq/errors.hpp"
#include "rplq/rng.hpp"

namespace rplq {

struct Dims {
  int n = 0;  // state dimension
  int m = 0;  // control dimension
};

struct ParamScenario {
  double prob = 0.0;
  Matrix A, B, Q, R;
};

struct ScenarioSet {
  Dims dims;
  std::vector<ParamScenario> scenarios;
};

// One polynomial term: coeff * xi_{noise_index}^power.
struct PolyTerm {
  int noise_index = 0;
  int power = 1;
  Matrix coeff;
};

struct PolyMatrix {
  Matrix base;
  std::vector<PolyTerm> terms;

  Matrix eval(const std::vector<double>& xi) const {
    Matrix M = base;
    for (const auto& t : terms)
      M += std::pow(xi[static_cast<std::size_t>(t.noise_index)], t.power) *
           t.coeff;
    return M;
  }

  int max_degree(int dim) const {
    int d = 0;
    for (const auto& t : terms)
      if (t.noise_index == dim) d = std::max(d, t.power);
    return d;
  }
};

struct PolyNoise {
  Dims dims;
  PolyMatrix A, B, Q, R;
  // Noise component j is uniform on [-amplitudes[j], amplitudes[j]].
  std::vector<double> amplitudes;

  int noise_dim() const { return static_cast<int>(amplitudes.size()); }
};

namespace detail {

// Gauss-Legendre nodes/weights on [-1, 1] via Newton iteration on P_q.
// Weights are returned already normalized to sum to 1 (probability weights
// for the uniform density).
inline void gauss_legendre(int q, std::vector<double>& nodes,
                           std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(q), 0.0);
  weights.assign(static_cast<std::size_t>(q), 0.0);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < (q + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Evaluate P_q(x) and P_q'(x) by the three-term recurrence.
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= q; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = q * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[static_cast<std::size_t>(i)] = -x;
    nodes[static_cast<std::size_t>(q - 1 - i)] = x;
    weights[static_cast<std::size_t>(i)] = 0.5 * w;
    weights[static_cast<std::size_t>(q - 1 - i)] = 0.5 * w;
  }
}

inline void validate_scenario(const ParamScenario& s, const Dims& d,
                              double psd_tol = 1e-10) {
  if (s.A.rows() != d.n || s.A.cols() != d.n || s.B.rows() != d.n ||
      s.B.cols() != d.m || s.Q.rows() != d.n || s.Q.cols() != d.n ||
      s.R.rows() != d.m || s.R.cols() != d.m)
    throw ConfigError("scenario matrix dimensions do not match dims");
  if (!(s.prob >= 0.0)) throw ConfigError("scenario probability is negative");
  if ((s.Q - s.Q.transpose()).cwiseAbs().maxCoeff() > psd_tol ||
      (s.R - s.R.transpose()).cwiseAbs().maxCoeff() > psd_tol)
    throw ConfigError("scenario Q or R is not symmetric");
  if (smallest_eigenvalue(s.Q) < -psd_tol ||
      smallest_eigenvalue(s.R) < -psd_tol)
    throw ConfigError("scenario Q or R is not positive semidefinite");
}

}  // namespace detail

inline void validate(const ScenarioSet& set, double tol = 1e-12) {
  if (set.scenarios.empty()) throw ConfigError("scenario set is empty");
  double total = 0.0;
  for (const auto& s : set.scenarios) {
    detail::validate_scenario(s, set.dims);
    total += s.prob;
  }
  if (std::abs(total - 1.0) > tol)
    throw ConfigError("scenario probabilities sum to " + std::to_string(total));
}

// Compiles a PolyNoise model into a ScenarioSet via a tensor grid of
// Gauss-Legendre quadrature.  Exactness requirement: the operators form
// expectations of products of two matrix entries, so the integrand degree in
// noise dimension j is at most twice the largest power D_j appearing there;
// q nodes integrate degree 2q-1 exactly, hence q >= D_j + 1 is required.
inline ScenarioSet discretize(const PolyNoise& pn, int nodes_per_dim) {
  const int d = pn.noise_dim();
  if (d > 8)
    throw ConfigError("polynomial noise limited to 8 dimensions, got " +
                      std::to_string(d));
  for (double a : pn.amplitudes)
    if (!(a >= 0.0)) throw ConfigError("noise amplitude must be nonnegative");
  for (int j = 0; j < d; ++j) {
    int deg = std::max(std::max(pn.A.max_degree(j), pn.B.max_degree(j)),
                       std::max(pn.Q.max_degree(j), pn.R.max_degree(j)));
    if (nodes_per_dim < deg + 1)
      throw ConfigError("nodes_per_dim=" + std::to_string(nodes_per_dim) +
                        " too small for degree " + std::to_string(deg) +
                        " in noise dimension " + std::to_string(j));
  }

  std::vector<double> nodes, weights;
  detail::gauss_legendre(nodes_per_dim, nodes, weights);

  ScenarioSet set;
  set.dims = pn.dims;
  std::size_t count = 1;
  for (int j = 0; j < d; ++j) count *= static_cast<std::size_t>(nodes_per_dim);
  set.scenarios.reserve(count);

  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  std::vector<double> xi(static_cast<std::size_t>(d), 0.0);
  double total = 0.0;
  for (std::size_t c = 0; c < count; ++c) {
    double p = 1.0;
    for (int j = 0; j < d; ++j) {
      auto k = static_cast<std::size_t>(idx[static_cast<std::size_t>(j)]);
      p *= weights[k];
      xi[static_cast<std::size_t>(j)] =
          nodes[k] * pn.amplitudes[static_cast<std::size_t>(j)];
    }
    ParamScenario s;
    s.prob = p;
    s.A = pn.A.eval(xi);
    s.B = pn.B.eval(xi);
    s.Q = symmetrize(pn.Q.eval(xi));
    s.R = symmetrize(pn.R.eval(xi));
    total += p;
    set.scenarios.push_back(std::move(s));
    // Advance the mixed-radix counter.
    for (int j = d - 1; j >= 0; --j) {
      if (++idx[static_cast<std::size_t>(j)] < nodes_per_dim) break;
      idx[static_cast<std::size_t>(j)] = 0;
    }
  }
  // Remove the O(eps) drift from accumulated rounding so downstream
  // probability checks are exact.
  for (auto& s : set.scenarios) s.prob /= total;
  validate(set);
  return set;
}

// A model is always usable as a ScenarioSet; when the PolyNoise front-end is
// present, sampling draws from the true continuous distribution instead of
// the quadrature atoms.
class ParameterModel {
 public:
  static ParameterModel from_atoms(ScenarioSet set) {
    validate(set);
    ParameterModel m;
    m.dims_ = set.dims;
    m.atoms_ = std::move(set);
    m.build_cdf();
    return m;
  }

  static ParameterModel from_poly(PolyNoise pn, int nodes_per_dim = 4) {
    ParameterModel m;
    m.dims_ = pn.dims;
    m.atoms_ = discretize(pn, nodes_per_dim);
    m.poly_ = std::move(pn);
    m.build_cdf();
    return m;
  }

  const Dims& dims() const { return dims_; }
  const ScenarioSet& atoms() const { return atoms_; }
  const std::optional<PolyNoise>& poly() const { return poly_; }

  // Draw one (A, B, Q, R) realization.
  ParamScenario sample(RngStream& rng) const {
    if (poly_) {
      const auto& pn = *poly_;
      std::vector<double> xi(static_cast<std::size_t>(pn.noise_dim()));
      for (std::size_t j = 0; j < xi.size(); ++j)
        xi[j] = rng.uniform(-pn.amplitudes[j], pn.amplitudes[j]);
      ParamScenario s;
      s.prob = 1.0;
      s.A = pn.A.eval(xi);
      s.B = pn.B.eval(xi);
      s.Q = symmetrize(pn.Q.eval(xi));
      s.R = symmetrize(pn.R.eval(xi));
      return s;
    }
    double u = rng.uniform01();
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    std::size_t k = static_cast<std::size_t>(it - cdf_.begin());
    if (k >= atoms_.scenarios.size()) k = atoms_.scenarios.size() - 1;
    ParamScenario s = atoms_.scenarios[k];
    s.prob = 1.0;
    return s;
  }

 private:
  void build_cdf() {
    cdf_.clear();
    double acc = 0.0;
    for (const auto& s : atoms_.scenarios) {
      acc += s.prob;
      cdf_.push_back(acc);
    }
    if (!cdf_.empty()) cdf_.back() = 1.0;
  }

  Dims dims_;
  ScenarioSet atoms_;
  std::optional<PolyNoise> poly_;
  std::vector<double> cdf_;
};

// Initial state distribution.
struct InitDist {
  enum class Kind { PointMass, Gaussian, Atoms };
  Kind kind = Kind::Gaussian;
  Vector mean;          // PointMass: the point; Gaussian: the mean
  Matrix cov;           // Gaussian only
  std::vector<std::pair<double, Vector>> atoms;  // Atoms only
  double sigma0 = 1.0;  // declared sub-Gaussian parameter

  // Second moment Sigma_0 = E[x0 x0'].
  Matrix second_moment() const {
    switch (kind) {
      case Kind::PointMass:
        return mean * mean.transpose();
      case Kind::Gaussian:
        return cov + mean * mean.transpose();
      case Kind::Atoms: {
        if (atoms.empty()) throw ConfigError("init atoms empty");
        Matrix S = Matrix::Zero(atoms[0].second.size(), atoms[0].second.size());
        for (const auto& [p, x] : atoms) S += p * x * x.transpose();
        return S;
      }
    }
    throw ConfigError("unknown init kind");
  }

  Vector mean_vec() const {
    if (kind == Kind::Atoms) {
      Vector mu = Vector::Zero(atoms.empty() ? 0 : atoms[0].second.size());
      for (const auto& [p, x] : atoms) mu += p * x;
      return mu;
    }
    return mean;
  }

  Vector sample(RngStream& rng) const {
    switch (kind) {
      case Kind::PointMass:
        return mean;
      case Kind::Gaussian: {
        ensure_chol();
        Vector z(mean.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
        return mean + chol_ * z;
      }
      case Kind::Atoms: {
        double u = rng.uniform01();
        double acc = 0.0;
        for (const auto& [p, x] : atoms) {
          acc += p;
          if (u <= acc) return x;
        }
        return atoms.back().second;
      }
    }
    throw ConfigError("unknown init kind");
  }

 private:
  void ensure_chol() const {
    if (chol_.size() != 0) return;
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() == Eigen::Success) {
      chol_ = llt.matrixL();
      return;
    }
    // Semidefinite covariance: fall back to a symmetric square root.
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(cov));
    Vector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    chol_ = es.eigenvectors() * ev.asDiagonal();
  }
  mutable Matrix chol_;
};

// Scalar invariants of a model used throughout the theory bounds.
struct ModelSummary {
  Matrix Qbar, Rbar;      // mean cost matrices
  double sig_min_Q = 0;   // sigma_min(Qbar)
  double sig_min_R = 0;   // sigma_min(Rbar)
  double mu = 0;          // sigma_min(Sigma_0)
  double e_A2 = 0;        // E ||A||^2   (operator norm)
  double e_B2 = 0;        // E ||B||^2
  double e_AB = 0;        // E ||A|| ||B||
  double e_R_norm = 0;    // E ||R||
  double e_Q_norm = 0;    // ||Qbar||
  double bound_K = 0;     // a.s. bound max(||A||,||B||,||Q||,||R||) over atoms
  double e_x0_sq = 0;     // E ||x0||^2 = tr(Sigma_0)
  double x0_mean_norm = 0;
  double sigma0 = 0;      // declared sub-Gaussian parameter of x0
  bool assumption_ok = true;  // Qbar, Rbar > 0 and Sigma_0 > 0
};

inline ModelSummary summarize(const ScenarioSet& set, const InitDist& init) {
  ModelSummary s;
  const Dims& d = set.dims;
  s.Qbar = Matrix::Zero(d.n, d.n);
  s.Rbar = Matrix::Zero(d.m, d.m);
  for (const auto& sc : set.scenarios) {
    s.Qbar += sc.prob * sc.Q;
    s.Rbar += sc.prob * sc.R;
    double na = op_norm(sc.A);
    double nb = op_norm(sc.B);
    s.e_A2 += sc.prob * na * na;
    s.e_B2 += sc.prob * nb * nb;
    s.e_AB += sc.prob * na * nb;
    double nr = op_norm(sc.R);
    s.e_R_norm += sc.prob * nr;
    // Almost-sure bound on max(||A||,||B||,||Q||,||R||); for quadrature
    // atoms this is a conservative surrogate for the essential supremum.
    s.bound_K = std::max({s.bound_K, na, nb, op_norm(sc.Q), nr});
  }
  s.Qbar = symmetrize(s.Qbar);
  s.Rbar = symmetrize(s.Rbar);
  s.sig_min_Q = smallest_eigenvalue(s.Qbar);
  s.sig_min_R = smallest_eigenvalue(s.Rbar);
  s.e_Q_norm = op_norm(s.Qbar);
  Matrix Sigma0 = init.second_moment();
  s.mu = smallest_eigenvalue(Sigma0);
  s.e_x0_sq = Sigma0.trace();
  s.x0_mean_norm = init.mean_vec().norm();
  s.sigma0 = init.sigma0;
  s.assumption_ok = s.sig_min_Q > 0 && s.sig_min_R > 0 && s.mu > 0;
  return s;
}

inline Vector sample_x0(const InitDist& init, RngStream& rng) {
  return init.sample(rng);
}

}  // namespace rplq
