#include <doctest.h>

#include "rplq/exact_pg.hpp"
#include "rplq/rollout.hpp"
#include "rplq/problems.hpp"

using namespace rplq;

namespace {

ParameterModel scalar_model(double a, double b) {
  ScenarioSet set;
  set.dims = {1, 1};
  ParamScenario s;
  s.prob = 1.0;
  s.A = Matrix::Constant(1, 1, a);
  s.B = Matrix::Constant(1, 1, b);
  s.Q = Matrix::Constant(1, 1, 1.0);
  s.R = Matrix::Constant(1, 1, 1.0);
  set.scenarios.push_back(s);
  return ParameterModel::from_atoms(set);
}

InitDist point_init(double x) {
  InitDist init;
  init.kind = InitDist::Kind::PointMass;
  init.mean = Vector::Constant(1, x);
  init.sigma0 = 0.0;
  return init;
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

TEST_SUITE_BEGIN("rollout");

TEST_CASE("deterministic scalar rollout: x = 1, 0.5, 0.25; cost 1.3125") {
  // A = 0.5, B = 0, L = 0, x0 = 1, l = 3: stage costs 1, 0.25, 0.0625.
  ParameterModel model = scalar_model(0.5, 0.0);
  Trajectory tr = simulate(model, point_init(1.0), Matrix::Zero(1, 1), 3,
                           /*seed=*/1);
  REQUIRE(tr.states.size() == 4);
  CHECK(tr.states[0](0) == doctest::Approx(1.0));
  CHECK(tr.states[1](0) == doctest::Approx(0.5));
  CHECK(tr.states[2](0) == doctest::Approx(0.25));
  CHECK(tr.total == doctest::Approx(1.3125).epsilon(1e-15));
  CHECK(rollout_cost(model, point_init(1.0), Matrix::Zero(1, 1), 3, 1, 0) ==
        doctest::Approx(1.3125).epsilon(1e-15));
}

TEST_CASE("cost_finite_exact matches the geometric series in closed form") {
  // Deterministic scalar: C^{(l)} = sum_{t<l} a^{2t} = (1-a^{2l})/(1-a^2).
  ParameterModel model = scalar_model(0.5, 0.0);
  for (int l : {1, 2, 5, 20}) {
    double expect = (1.0 - std::pow(0.25, l)) / 0.75;
    CHECK(cost_finite_exact(model.atoms(), point_init(1.0), Matrix::Zero(1, 1),
                            l) == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("finite-horizon cost converges to the infinite-horizon cost") {
  Problem p = benchmark_3x2();
  double c_inf = cost_exact(p.model.atoms(), p.init, Matrix::Zero(2, 3));
  double prev_gap = 1e300;
  for (int l : {10, 20, 40, 80}) {
    double gap =
        c_inf - cost_finite_exact(p.model.atoms(), p.init, Matrix::Zero(2, 3), l);
    CHECK(gap >= -1e-10);  // truncation always undershoots
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap < 1e-6);
}

TEST_CASE("monte carlo rollout mean approaches cost_finite_exact") {
  Problem p = benchmark_3x2();
  Matrix L = Matrix::Zero(2, 3);
  const int l = 15;
  double exact = cost_finite_exact(p.model.atoms(), p.init, L, l);
  double mean = 0.0;
  const int N = 20000;
  for (int i = 0; i < N; ++i)
    mean += rollout_cost(p.model, p.init, L, l, /*seed=*/99, i) / N;
  CHECK(std::abs(mean - exact) / exact < 0.05);
}

TEST_CASE("trajectories are reproducible and keyed by rollout index") {
  Problem p = benchmark_3x2();
  Matrix L = Matrix::Zero(2, 3);
  Trajectory a = simulate(p.model, p.init, L, 10, 42, 7);
  Trajectory b = simulate(p.model, p.init, L, 10, 42, 7);
  Trajectory c = simulate(p.model, p.init, L, 10, 42, 8);
  CHECK(a.total == b.total);
  for (std::size_t t = 0; t < a.states.size(); ++t)
    CHECK((a.states[t] - b.states[t]).norm() == 0.0);
  CHECK(a.total != c.total);
}

TEST_CASE("diverging rollout raises with the offending index") {
  ParameterModel model = scalar_model(3.0, 0.0);
  try {
    rollout_cost(model, point_init(1.0), Matrix::Zero(1, 1), 2000, 1, 17);
    FAIL("expected divergence");
  } catch (const DivergedRolloutError& e) {
    CHECK(e.rollout_index == 17);
    CHECK(e.step > 0);
  }
}

TEST_CASE("stage costs use the sampled Q, R of the step") {
  // With Q random and B = 0, the stage cost at t=0 is x0^2 * Q_1.
  PolyNoise pn;
  pn.dims = {1, 1};
  pn.amplitudes = {0.5};
  pn.A.base = Matrix::Constant(1, 1, 0.0);
  pn.B.base = Matrix::Constant(1, 1, 0.0);
  pn.Q.base = Matrix::Constant(1, 1, 1.0);
  pn.Q.terms.push_back({0, 1, Matrix::Constant(1, 1, 1.0)});
  pn.R.base = Matrix::Constant(1, 1, 1.0);
  ParameterModel model = ParameterModel::from_poly(pn, 2);
  Trajectory tr = simulate(model, point_init(2.0), Matrix::Zero(1, 1), 1, 5);
  CHECK(tr.stage_costs[0] == doctest::Approx(4.0).epsilon(0.5 / 1.0));
  CHECK(tr.stage_costs[0] != doctest::Approx(4.0).epsilon(1e-12));
}

TEST_SUITE_END();
