#include <doctest.h>

#include "rplq/params.hpp"
#include "rplq/problems.hpp"
#include "rplq/rng.hpp"

using namespace rplq;

TEST_SUITE_BEGIN("params");

TEST_CASE("gauss-legendre quadrature is exact for polynomial moments") {
  // Probability weights of uniform on [-1,1]: E[x^k] = 1/(k+1) for even k.
  std::vector<double> nodes, weights;
  for (int q = 2; q <= 6; ++q) {
    detail::gauss_legendre(q, nodes, weights);
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
    for (int k = 0; k <= 2 * q - 1; ++k) {
      double mk = 0.0;
      for (std::size_t i = 0; i < nodes.size(); ++i)
        mk += weights[i] * std::pow(nodes[i], k);
      double exact = (k % 2 == 0) ? 1.0 / (k + 1) : 0.0;
      CHECK(mk == doctest::Approx(exact).epsilon(1e-12));
    }
  }
}

TEST_CASE("two-node rule lands on +/- 1/sqrt(3) with weight 1/2") {
  std::vector<double> nodes, weights;
  detail::gauss_legendre(2, nodes, weights);
  CHECK(nodes[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(nodes[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(weights[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(weights[1] == doctest::Approx(0.5).epsilon(1e-14));
}

static PolyNoise scalar_poly(double amp, int deg_a) {
  // Scalar system A = 1 + xi (+ xi^2 if deg_a > 1), B = 1, Q = R = 1.
  PolyNoise pn;
  pn.dims = {1, 1};
  pn.amplitudes = {amp};
  pn.A.base = Matrix::Constant(1, 1, 1.0);
  pn.A.terms.push_back({0, 1, Matrix::Constant(1, 1, 1.0)});
  if (deg_a > 1) pn.A.terms.push_back({0, 2, Matrix::Constant(1, 1, 1.0)});
  pn.B.base = Matrix::Constant(1, 1, 1.0);
  pn.Q.base = Matrix::Constant(1, 1, 1.0);
  pn.R.base = Matrix::Constant(1, 1, 1.0);
  return pn;
}

TEST_CASE("discretize reproduces closed-form uniform moments") {
  // A = 1 + xi with xi ~ U[-1,1]: E[A] = 1, E[A^2] = 1 + 1/3 = 4/3.
  ScenarioSet set = discretize(scalar_poly(1.0, 1), 2);
  REQUIRE(set.scenarios.size() == 2);
  double ea = 0.0, ea2 = 0.0;
  for (const auto& s : set.scenarios) {
    ea += s.prob * s.A(0, 0);
    ea2 += s.prob * s.A(0, 0) * s.A(0, 0);
  }
  CHECK(ea == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ea2 == doctest::Approx(4.0 / 3.0).epsilon(1e-13));
  // Two nodes place the atoms at 1 -+ 1/sqrt(3).
  CHECK(set.scenarios[0].A(0, 0) ==
        doctest::Approx(1.0 - 1.0 / std::sqrt(3.0)).epsilon(1e-13));
}

TEST_CASE("discretize rejects insufficient node counts") {
  // Degree 2 in dimension 0 needs at least 3 nodes.
  CHECK_THROWS_AS(discretize(scalar_poly(0.5, 2), 2), ConfigError);
  CHECK_NOTHROW(discretize(scalar_poly(0.5, 2), 3));
}

TEST_CASE("discretize rejects more than 8 noise dimensions") {
  PolyNoise pn = scalar_poly(0.1, 1);
  pn.amplitudes.assign(9, 0.1);
  CHECK_THROWS_AS(discretize(pn, 2), ConfigError);
}

TEST_CASE("degenerate polynoise without terms yields the base model") {
  PolyNoise pn = scalar_poly(0.0, 1);
  pn.A.terms.clear();
  pn.amplitudes.clear();
  ScenarioSet set = discretize(pn, 2);
  REQUIRE(set.scenarios.size() == 1);
  CHECK(set.scenarios[0].prob == doctest::Approx(1.0));
  CHECK(set.scenarios[0].A(0, 0) == 1.0);
}

TEST_CASE("benchmark model compiles to 4^6 atoms with exact mean moments") {
  Problem p = benchmark_3x2();
  const ScenarioSet& set = p.model.atoms();
  CHECK(set.scenarios.size() == 4096);
  ModelSummary sm = summarize(set, p.init);
  // E[Q] = I + E[zeta^2] * sym(C1) with E[zeta^2] = 0.015^2 / 3 and the odd
  // cubic term integrating to zero.
  double ez2 = 0.015 * 0.015 / 3.0;
  Matrix C1sym = symmetrize(
      (Matrix(3, 3) << 1, 0, 0, 1, 1, 0, 0, 0, 1).finished());
  CHECK((sm.Qbar - (Matrix::Identity(3, 3) + ez2 * C1sym)).norm() ==
        doctest::Approx(0.0).epsilon(1e-13));
  // sigma_min(Rbar) = 1 - E[psi^2]: Rbar = I + E[psi^2] * [[0,1],[1,0]].
  CHECK(sm.sig_min_R ==
        doctest::Approx(1.0 - 0.011 * 0.011 / 3.0).epsilon(1e-13));
  CHECK(sm.mu == doctest::Approx(1.0));
  CHECK(sm.e_x0_sq == doctest::Approx(3.0));
  CHECK(sm.assumption_ok);
}

TEST_CASE("sampling from the benchmark model stays within the noise budget") {
  Problem p = benchmark_3x2();
  RngStream rng(2024, "test-sample");
  Matrix C1 = (Matrix(3, 3) << 1, 0, 0, 1, 1, 0, 0, 0, 1).finished();
  Matrix C2 = (Matrix(3, 3) << 0, 0, 0, 0, 1, 1, 0, 1, 0).finished();
  double budget = 0.015 * 0.015 * op_norm(symmetrize(C1)) +
                  std::pow(0.015, 3) * op_norm(symmetrize(C2));
  for (int i = 0; i < 200; ++i) {
    ParamScenario s = p.model.sample(rng);
    CHECK(op_norm(s.Q - Matrix::Identity(3, 3)) <= budget + 1e-12);
    CHECK((s.Q - s.Q.transpose()).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("scenario sampling matches atom frequencies") {
  ScenarioSet set;
  set.dims = {1, 1};
  for (double a : {0.2, 0.8}) {
    ParamScenario s;
    s.prob = a;
    s.A = Matrix::Constant(1, 1, a);
    s.B = Matrix::Constant(1, 1, 1.0);
    s.Q = Matrix::Constant(1, 1, 1.0);
    s.R = Matrix::Constant(1, 1, 1.0);
    set.scenarios.push_back(s);
  }
  ParameterModel model = ParameterModel::from_atoms(set);
  RngStream rng(7, "freq");
  int first = 0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i)
    if (model.sample(rng).A(0, 0) == 0.2) ++first;
  CHECK(std::abs(first / static_cast<double>(draws) - 0.2) < 0.01);
}

TEST_CASE("validate rejects bad scenario sets") {
  ScenarioSet set;
  set.dims = {1, 1};
  ParamScenario s;
  s.prob = 0.7;  // does not sum to 1
  s.A = s.B = s.Q = s.R = Matrix::Constant(1, 1, 1.0);
  set.scenarios.push_back(s);
  CHECK_THROWS_AS(validate(set), ConfigError);
  set.scenarios[0].prob = 1.0;
  CHECK_NOTHROW(validate(set));
  set.scenarios[0].Q = Matrix::Constant(1, 1, -1.0);  // not PSD
  CHECK_THROWS_AS(validate(set), ConfigError);
}

TEST_CASE("init distributions: second moments and sampling") {
  InitDist point;
  point.kind = InitDist::Kind::PointMass;
  point.mean = (Vector(2) << 1.0, 2.0).finished();
  CHECK(point.second_moment()(1, 1) == doctest::Approx(4.0));
  RngStream rng(3, "x0");
  CHECK((sample_x0(point, rng) - point.mean).norm() == 0.0);

  InitDist gauss;
  gauss.kind = InitDist::Kind::Gaussian;
  gauss.mean = Vector::Zero(2);
  gauss.cov = 2.0 * Matrix::Identity(2, 2);
  Matrix emp = Matrix::Zero(2, 2);
  const int draws = 40000;
  for (int i = 0; i < draws; ++i) {
    Vector x = sample_x0(gauss, rng);
    emp += x * x.transpose() / draws;
  }
  CHECK((emp - gauss.cov).norm() < 0.1);

  InitDist atoms;
  atoms.kind = InitDist::Kind::Atoms;
  atoms.atoms = {{0.5, (Vector(1) << 1.0).finished()},
                 {0.5, (Vector(1) << -1.0).finished()}};
  CHECK(atoms.second_moment()(0, 0) == doctest::Approx(1.0));
  CHECK(atoms.mean_vec()(0) == doctest::Approx(0.0));
}

TEST_CASE("rng streams are reproducible and index-disjoint") {
  RngStream a(42, "tag", 1, 2);
  RngStream b(42, "tag", 1, 2);
  RngStream c(42, "tag", 1, 3);
  CHECK(a.next_u64() == b.next_u64());
  CHECK(a.next_u64() == b.next_u64());
  CHECK(RngStream(42, "tag", 1, 2).next_u64() != c.next_u64());
  CHECK(RngStream(42, "x").next_u64() != RngStream(42, "y").next_u64());
  // Uniforms land in [0,1); normals have roughly unit variance.
  RngStream d(1, "moments");
  double var = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double u = d.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    double z = d.normal();
    var += z * z / 20000;
  }
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_SUITE_END();
