#include <cmath>

#include <doctest.h>

#include "stqc/discretize.hpp"
#include "stqc/errors.hpp"
#include "stqc/plant.hpp"
#include "support/random_scenarios.hpp"

using namespace stqc;

TEST_SUITE_BEGIN("plant");

TEST_CASE("coarse stepping") {
  Matrix a2(2, 2);
  a2 << 1.0, 1.0, 0.0, 1.0;
  Matrix b2(2, 1);
  b2 << 0.0, 1.0;
  const Matrix c = Matrix::Identity(2, 2);
  SystemModel m = make_model_discrete_coarse(a2, b2, c, 0.1);

  PlantState st{Vector::Zero(2), 0, 0};
  const PlantState next = plant_step(m, st, Vector::Zero(1), StepScale::coarse);
  CHECK(inf_norm(next.x) == 0.0);  // equilibrium
  CHECK(next.s == 1);

  Vector x0(2);
  x0 << 1.0, 2.0;
  PlantState st2{x0, 0, 0};
  Vector u(1);
  u << -0.5;
  const PlantState n2 = plant_step(m, st2, u, StepScale::coarse);
  CHECK(inf_norm(Vector(n2.x - (a2 * x0 + b2 * u))) == 0.0);
}

TEST_CASE("sub-steps with constant input compose into one coarse step") {
  test::Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Scenario sc = test::random_deadbeat_scenario(1000 + trial, false);
    const SystemModel& m = sc.model;
    const Vector x = rng.vector(m.nx(), -2.0, 2.0);
    const Vector u = rng.vector(m.nu(), -2.0, 2.0);

    PlantState st{x, 0, 0};
    for (long k = 0; k < m.eta; ++k) st = plant_step(m, st, u, StepScale::substep);
    CHECK(st.s == 1);
    CHECK(st.k == 0);

    const Vector coarse = m.A * x + m.B * u;
    CHECK(inf_norm(Vector(st.x - coarse)) <=
          1e-9 * std::max(1.0, inf_norm(coarse)));
  }
}

TEST_CASE("output") {
  SystemModel m = make_model_continuous(test::reactor_a_cont(), test::reactor_b_cont(),
                                        test::reactor_c(), 0.005, 2);
  Vector x(4);
  x << 1.0, 2.0, 3.0, 4.0;
  const PlantState st{x, 0, 0};
  const Vector y = output(m, st);
  CHECK(y[0] == doctest::Approx(0.0));  // 1 + 3 - 4
  CHECK(y[1] == doctest::Approx(2.0));
  CHECK(inf_norm(output(m, PlantState{Vector::Zero(4), 0, 0})) == 0.0);
}

TEST_CASE("eta scan finds the consistent sub-step count") {
  CHECK(resolve_substep_count(test::reactor_a_cont(), test::reactor_b_cont(), 0.005) ==
        2);
}

TEST_CASE("construction rejects assumption violations") {
  // x' = x with no input influence on the second state
  Matrix a = Matrix::Identity(2, 2);
  Matrix b(2, 1);
  b << 1.0, 0.0;
  const Matrix c = Matrix::Identity(2, 2);
  CHECK_THROWS_AS((void)make_model_discrete_coarse(a, b, c, 0.1), NotControllableError);

  // unobservable: C sees only the first state of a decoupled diagonal
  Matrix a2(2, 2);
  a2 << 0.5, 0.0, 0.0, 0.25;
  Matrix b2(2, 1);
  b2 << 1.0, 1.0;
  Matrix c2(1, 2);
  c2 << 1.0, 0.0;
  CHECK_THROWS_AS((void)make_model_discrete_coarse(a2, b2, c2, 0.1), ValidationError);
}

TEST_CASE("two-scale consistency is verified on direct input") {
  auto [at, bt] = discretize_zoh(test::reactor_a_cont(), test::reactor_b_cont(), 0.0025);
  const SystemModel good = make_model_discrete(at, bt, test::reactor_c(), 0.005, 2);
  // tamper with the coarse matrix beyond the tolerance
  Matrix bad_a = good.A;
  bad_a(0, 0) += 1e-6;
  CHECK_THROWS_AS((void)make_model_discrete_full(bad_a, good.B, at, bt, test::reactor_c(),
                                                 0.005, 2),
                  ValidationError);
}

TEST_SUITE_END();
