#include <doctest.h>

#include "rplq/operators.hpp"
#include "rplq/problems.hpp"

using namespace rplq;

namespace {

// Deterministic scalar system A = a, B = b, Q = q, R = r as a one-atom set.
ScenarioSet scalar_set(double a, double b, double q = 1.0, double r = 1.0) {
  ScenarioSet set;
  set.dims = {1, 1};
  ParamScenario s;
  s.prob = 1.0;
  s.A = Matrix::Constant(1, 1, a);
  s.B = Matrix::Constant(1, 1, b);
  s.Q = Matrix::Constant(1, 1, q);
  s.R = Matrix::Constant(1, 1, r);
  set.scenarios.push_back(s);
  return set;
}

ScenarioSet two_atom_A(double a1, double a2) {
  ScenarioSet set;
  set.dims = {1, 1};
  for (double a : {a1, a2}) {
    ParamScenario s;
    s.prob = 0.5;
    s.A = Matrix::Constant(1, 1, a);
    s.B = Matrix::Constant(1, 1, 1.0);
    s.Q = Matrix::Constant(1, 1, 1.0);
    s.R = Matrix::Constant(1, 1, 1.0);
    set.scenarios.push_back(s);
  }
  return set;
}

InitDist unit_init(int n) {
  InitDist init;
  init.kind = InitDist::Kind::Gaussian;
  init.mean = Vector::Zero(n);
  init.cov = Matrix::Identity(n, n);
  init.sigma0 = 1.0;
  return init;
}

}  // namespace

TEST_SUITE_BEGIN("operators");

TEST_CASE("scalar lift: deterministic A=0.5 gives M = 0.25") {
  FOperator f = build_F(scalar_set(0.5, 1.0), Matrix::Zero(1, 1));
  CHECK(f.M(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(f.rho == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(is_admissible(f));
}

TEST_CASE("random scalar A in {0.2, 1.5}: rho = E[A^2] = 1.145") {
  // Mean-square instability despite stable mean: E[A] = 0.85 < 1.
  FOperator f = build_F(two_atom_A(0.2, 1.5), Matrix::Zero(1, 1));
  CHECK(f.rho == doctest::Approx(0.5 * (0.04 + 2.25)).epsilon(1e-13));
  CHECK_FALSE(is_admissible(f));
  CHECK_THROWS_AS(solve_sigma(f, Matrix::Identity(1, 1)), NotAdmissibleError);
}

TEST_CASE("scalar stationary solves: Sigma = P = 1/(1-a^2)") {
  ScenarioSet set = scalar_set(0.5, 1.0);
  Matrix L = Matrix::Zero(1, 1);
  FOperator f = build_F(set, L);
  Matrix Sigma = solve_sigma(f, Matrix::Identity(1, 1));
  Matrix P = solve_P(set, L, f);
  CHECK(Sigma(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(P(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("lift matches the definition F_L(X) = E[(A-BL) X (A-BL)']") {
  Problem p = benchmark_3x2();
  const ScenarioSet& set = p.model.atoms();
  Matrix L = (Matrix(2, 3) << 0.1, -0.2, 0.05, 0.0, 0.3, -0.1).finished();
  FOperator f = build_F(set, L);
  RngStream rng(11, "opx");
  Matrix X(3, 3);
  for (int i = 0; i < 9; ++i) X(i / 3, i % 3) = rng.normal();
  X = symmetrize(X);
  Matrix direct = Matrix::Zero(3, 3);
  for (const auto& s : set.scenarios) {
    Matrix G = s.A - s.B * L;
    direct += s.prob * G * X * G.transpose();
  }
  Matrix lifted = unvec(f.M * vec(X), 3, 3);
  CHECK((direct - lifted).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("stationary equations are satisfied to machine precision") {
  Problem p = benchmark_3x2();
  const ScenarioSet& set = p.model.atoms();
  InitDist init = unit_init(3);
  Matrix L = Matrix::Zero(2, 3);
  FOperator f = build_F(set, L);
  Matrix Sigma = solve_sigma(f, init.second_moment());
  Matrix P = solve_P(set, L, f);
  // Sigma = Sigma_0 + F_L(Sigma);  P = Qbar + L'RbarL + F_L^*(P).
  Matrix fwd = Matrix::Zero(3, 3);
  Matrix adj = Matrix::Zero(3, 3);
  Matrix Qbar = Matrix::Zero(3, 3);
  for (const auto& s : set.scenarios) {
    Matrix G = s.A - s.B * L;
    fwd += s.prob * G * Sigma * G.transpose();
    adj += s.prob * G.transpose() * P * G;
    Qbar += s.prob * s.Q;
  }
  CHECK((Sigma - init.second_moment() - fwd).norm() ==
        doctest::Approx(0.0).epsilon(1e-11));
  CHECK((P - Qbar - adj).norm() == doctest::Approx(0.0).epsilon(1e-11));
  // Both solutions are symmetric PSD.
  CHECK(smallest_eigenvalue(Sigma) > 0.0);
  CHECK(smallest_eigenvalue(P) > 0.0);
  // cost two ways: tr(P Sigma_0) = <Sigma, Qbar + L'RbarL>.
  ValueCert cert = make_cert(set, init, L);
  CHECK(cert.cost ==
        doctest::Approx((Sigma * Qbar).trace()).epsilon(1e-12));
}

TEST_CASE("pi and gamma maps on a block matrix") {
  // P = [[2, 1], [1, 1]] with n = m = 1: Pi = 2 - 1*1/1 = 1, Gamma = -1.
  Matrix P = (Matrix(2, 2) << 2, 1, 1, 1).finished();
  CHECK(pi_map(P, 1)(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gamma_map(P, 1)(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
  // Singular P_uu exercised through the pseudo-inverse: Pi leaves P_xx.
  Matrix S = (Matrix(2, 2) << 3, 0, 0, 0).finished();
  CHECK(pi_map(S, 1)(0, 0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(gamma_map(S, 1)(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("admissibility margin boundary") {
  // a = 1 exactly: rho = 1, not admissible.
  FOperator f = build_F(scalar_set(1.0, 1.0), Matrix::Zero(1, 1));
  CHECK_FALSE(is_admissible(f));
}

TEST_SUITE_END();
