#pragma once

// Built-in benchmark problems.
//
// benchmark_3x2: a 3-state / 2-control system whose parameter matrices are
// low-degree polynomials in six small independent uniform noise components;
// all of the toolkit's reference experiments run on it.
//
// gen_highdim: a seeded generator producing structurally similar problems at
// arbitrary dimension, rejected and reseeded until the zero policy is
// admissible and the Riccati solve certifies an optimal gain.

#include <cstdint>

#include "rplq/params.hpp"
#include "rplq/riccati.hpp"
#include "rplq/rng.hpp"

namespace rplq {

struct Problem {
  ParameterModel model;
  InitDist init;
};

inline Problem benchmark_3x2(int nodes_per_dim = 4) {
  PolyNoise pn;
  pn.dims = {3, 2};
  // Noise components: 0,1 drive A; 2,3 drive B; 4 drives Q; 5 drives R.
  pn.amplitudes = {0.01, 0.012, 0.015, 0.011, 0.015, 0.011};

  pn.A.base = (Matrix(3, 3) << 0.7, 0.3, 0.2,
                               -0.2, 0.4, 0.5,
                               -0.4, 0.2, -0.3).finished();
  pn.A.terms = {
      {0, 1, (Matrix(3, 3) << 1, 0, 0, 0, 0, 0, 0, 0, 1).finished()},
      {0, 2, (Matrix(3, 3) << 0, 1, 0, 0, 0, 0, 0, 1, 0).finished()},
      {1, 1, (Matrix(3, 3) << 1, 0, 0, 0, 0, 1, 0, 0, 0).finished()},
      {1, 3, (Matrix(3, 3) << 0, 0, 1, 0, 1, 0, 1, 0, 0).finished()},
  };

  pn.B.base = (Matrix(3, 2) << 0.5, -0.3,
                               0.8, 0.3,
                               0.1, 0.9).finished();
  pn.B.terms = {
      {2, 1, (Matrix(3, 2) << 1, 0, 0, 1, 1, 0).finished()},
      {2, 2, (Matrix(3, 2) << 1, 0, 1, 0, 1, 0).finished()},
      {2, 3, (Matrix(3, 2) << 0, 0, 0, 1, 1, 1).finished()},
      {3, 2, (Matrix(3, 2) << 0, 1, 1, 1, 0, 0).finished()},
  };

  pn.Q.base = Matrix::Identity(3, 3);
  pn.Q.terms = {
      {4, 2, (Matrix(3, 3) << 1, 0, 0, 1, 1, 0, 0, 0, 1).finished()},
      {4, 3, (Matrix(3, 3) << 0, 0, 0, 0, 1, 1, 0, 1, 0).finished()},
  };

  pn.R.base = Matrix::Identity(2, 2);
  pn.R.terms = {
      {5, 1, (Matrix(2, 2) << 0, 1, 1, 1).finished()},
      {5, 2, (Matrix(2, 2) << 0, 1, 1, 0).finished()},
  };

  Problem p{ParameterModel::from_poly(std::move(pn), nodes_per_dim), {}};
  p.init.kind = InitDist::Kind::Gaussian;
  p.init.mean = Vector::Zero(3);
  p.init.cov = Matrix::Identity(3, 3);
  p.init.sigma0 = 1.0;  // standard Gaussian coordinates
  return p;
}

namespace detail {

inline Matrix random_matrix(int rows, int cols, double scale, RngStream& rng) {
  Matrix M(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      M(i, j) = scale * rng.uniform(-1.0, 1.0);
  return M;
}

}  // namespace detail

// Random problem with the same noise structure as benchmark_3x2 (six uniform
// components with the same amplitudes and powers) at dimensions (n, m).
// Base matrices have entries uniform in [-1, 1] scaled by 1/sqrt(n).
inline Problem gen_highdim(int n, int m, std::uint64_t seed,
                           int nodes_per_dim = 4, int max_attempts = 100) {
  if (n < 1 || m < 1) throw ConfigError("gen_highdim needs n, m >= 1");
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    RngStream rng(seed, "gen-highdim", static_cast<std::uint64_t>(attempt));
    double s = 1.0 / std::sqrt(static_cast<double>(n));
    PolyNoise pn;
    pn.dims = {n, m};
    pn.amplitudes = {0.01, 0.012, 0.015, 0.011, 0.015, 0.011};
    pn.A.base = detail::random_matrix(n, n, s, rng);
    pn.A.terms = {{0, 1, detail::random_matrix(n, n, s, rng)},
                  {0, 2, detail::random_matrix(n, n, s, rng)},
                  {1, 1, detail::random_matrix(n, n, s, rng)},
                  {1, 3, detail::random_matrix(n, n, s, rng)}};
    pn.B.base = detail::random_matrix(n, m, s, rng);
    pn.B.terms = {{2, 1, detail::random_matrix(n, m, s, rng)},
                  {2, 2, detail::random_matrix(n, m, s, rng)},
                  {2, 3, detail::random_matrix(n, m, s, rng)},
                  {3, 2, detail::random_matrix(n, m, s, rng)}};
    pn.Q.base = Matrix::Identity(n, n);
    pn.Q.terms = {{4, 2, symmetrize(detail::random_matrix(n, n, s, rng))},
                  {4, 3, symmetrize(detail::random_matrix(n, n, s, rng))}};
    pn.R.base = Matrix::Identity(m, m);
    pn.R.terms = {{5, 1, symmetrize(detail::random_matrix(m, m, s, rng))},
                  {5, 2, symmetrize(detail::random_matrix(m, m, s, rng))}};

    Problem p{ParameterModel::from_poly(std::move(pn), nodes_per_dim), {}};
    p.init.kind = InitDist::Kind::Gaussian;
    p.init.mean = Vector::Zero(n);
    p.init.cov = Matrix::Identity(n, n);
    p.init.sigma0 = 1.0;

    // Accept only problems where model-free training can start from L = 0
    // and the Riccati solve certifies an optimal gain.
    try {
      Matrix L0 = Matrix::Zero(m, n);
      if (!is_admissible(build_F(p.model.atoms(), L0))) continue;
      (void)solve_are(p.model.atoms(), p.init);
      return p;
    } catch (const Error&) {
      continue;
    }
  }
  throw NoConvergenceError("gen_highdim: no admissible problem in " +
                           std::to_string(max_attempts) + " attempts");
}

}  // namespace rplq
