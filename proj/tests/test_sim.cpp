#include <cmath>

#include <doctest.h>

#include "stqc/errors.hpp"
#include "stqc/sim.hpp"
#include "support/random_scenarios.hpp"

using namespace stqc;

namespace {

// Scenario copy with a scripted attack sequence.
Scenario with_schedule(const Scenario& sc, std::vector<std::uint8_t> schedule,
                       double kappa_d, double nu_d) {
  Scenario out = sc;
  out.dos.mode = DosMode::scripted;
  out.dos.kappa_d = kappa_d;
  out.dos.nu_d = nu_d;
  out.dos.schedule = std::move(schedule);
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("sim");

TEST_CASE("zero initial state stays at the origin") {
  // odd N decodes the frame center exactly, so the equilibrium is exact
  for (int i = 0; i < 8; ++i) {
    Scenario sc = test::random_standard_scenario(600 + i, false);
    if (sc.trigger.levels % 2 == 0) continue;
    sc.x0 = Vector::Zero(sc.model.nx());
    const SimTrace trace = run_closed_loop(sc);
    for (const TraceRow& r : trace.rows) {
      CHECK(inf_norm(r.x) == 0.0);
      CHECK(inf_norm(r.u) == 0.0);
    }
  }
}

TEST_CASE("at equilibrium the gap hits the tau_max cap when sigma allows") {
  // slow stable scalar plant with sigma above the trigger's E-coefficient
  // for every look-ahead up to tau_max
  Matrix a(1, 1), b(1, 1), c(1, 1);
  a << 0.5;
  b << 1.0;
  c << 1.0;
  const SystemModel model = make_model_discrete_coarse(a, b, c, 0.1);
  Matrix k(1, 1), l(1, 1);
  k << -0.2;
  l << 0.2;
  const GainSet gains = make_standard_gains(model, k, l);
  // alpha = Gamma * 0.2 / (1 - gamma) with rho = 0.3: sigma up to 1/alpha
  Scenario sc = make_scenario(model, gains, Variant::standard, 0.99, 3, 101, 1.0,
                              Vector::Zero(1), 40);
  const StandardTriggerTables tables =
      StandardTriggerTables::build(model, gains, 101, 3);
  for (long tau = 1; tau <= 3; ++tau) {
    REQUIRE(tables.eval(Vector::Zero(1), 1.0, Vector::Zero(1), tau) <= 0.99);
  }
  const SimTrace trace = run_closed_loop(sc);
  for (std::size_t i = 1; i < trace.sample_times.size(); ++i) {
    CHECK(trace.sample_times[i] - trace.sample_times[i - 1] == 3);
  }
}

TEST_CASE("no-attack reduction is exact") {
  for (int i = 0; i < 5; ++i) {
    const Scenario sc = test::random_standard_scenario(700 + i, false);
    const Scenario scripted = with_schedule(
        sc, std::vector<std::uint8_t>(static_cast<std::size_t>(sc.horizon), 0), 0.0,
        1.0);
    const std::string a = trace_csv_string(run_closed_loop(sc), sc.model);
    const std::string b = trace_csv_string(run_closed_loop(scripted), scripted.model);
    CHECK(a == b);
  }
}

TEST_CASE("reruns are byte-identical") {
  const Scenario sc = test::random_deadbeat_scenario(710, false);
  const std::string a = trace_csv_string(run_closed_loop(sc), sc.model);
  const std::string b = trace_csv_string(run_closed_loop(sc), sc.model);
  CHECK(a == b);
}

TEST_CASE("gaps stay within [1, tau_max]; attacked samples retry at gap 1") {
  for (int i = 0; i < 5; ++i) {
    Scenario sc = test::random_standard_scenario(720 + i, false);
    sc.dos.mode = DosMode::worst_case_at_samples;
    sc.dos.kappa_d = 2.0;
    sc.dos.nu_d = 6.0;
    const SimTrace trace = run_closed_loop(sc);
    CHECK(trace.effective_attacks > 0);
    for (std::size_t j = 0; j + 1 < trace.sample_times.size(); ++j) {
      const long gap = trace.sample_times[j + 1] - trace.sample_times[j];
      CHECK(gap >= 1);
      CHECK(gap <= sc.trigger.tau_max);
      const TraceRow& row = trace.rows[static_cast<std::size_t>(trace.sample_times[j])];
      if (row.h == 1) CHECK(gap == 1);
    }
  }
}

TEST_CASE("worst-case attacks only hit sampling times and zoom the range") {
  Scenario sc = test::random_standard_scenario(730, false);
  sc.dos.mode = DosMode::worst_case_at_samples;
  sc.dos.kappa_d = 1.0;
  sc.dos.nu_d = 5.0;
  const SimTrace trace = run_closed_loop(sc);
  CHECK(trace.effective_attacks > 0);
  long hits = 0;
  for (const TraceRow& r : trace.rows) {
    if (r.h == 1) {
      CHECK(r.sampled);
      ++hits;
    }
  }
  CHECK(hits == trace.effective_attacks);

  // every hit zooms the range out by omega_a at the following sample
  for (std::size_t j = 0; j + 1 < trace.sample_times.size(); ++j) {
    const TraceRow& cur = trace.rows[static_cast<std::size_t>(trace.sample_times[j])];
    const TraceRow& nxt =
        trace.rows[static_cast<std::size_t>(trace.sample_times[j + 1])];
    if (cur.h == 1) {
      CHECK(nxt.Ex == doctest::Approx(cur.Ex * sc.growth.omega_a).epsilon(1e-12));
    }
  }
}

TEST_CASE("inline worst-case decisions equal the oracle-driven generator") {
  Scenario sc = test::random_standard_scenario(740, false);
  sc.dos.mode = DosMode::worst_case_at_samples;
  sc.dos.kappa_d = 2.0;
  sc.dos.nu_d = 8.0;
  const SimTrace trace = run_closed_loop(sc);

  // oracle: replay the closed loop under the attack prefix and ask
  // whether s is a sampling time
  const auto oracle = [&](long s, std::span<const std::uint8_t> prefix) {
    if (s == 0) return true;
    Scenario replay = sc;
    replay.dos.mode = DosMode::scripted;
    replay.dos.schedule.assign(prefix.begin(), prefix.end());
    replay.dos.schedule.resize(static_cast<std::size_t>(s + 1), 0);
    replay.horizon = s + 1;
    const SimTrace t = run_closed_loop(replay);
    return t.rows[static_cast<std::size_t>(s)].sampled;
  };
  const auto h = generate_attack(sc.dos, sc.horizon, oracle);
  for (long s = 0; s < sc.horizon; ++s) {
    CHECK(h[static_cast<std::size_t>(s)] ==
          trace.rows[static_cast<std::size_t>(s)].h);
  }
}

TEST_CASE("range sequence under attacks dominates the proof chain") {
  for (int i = 0; i < 5; ++i) {
    Scenario sc = test::random_standard_scenario(750 + i, false);
    sc.dos.mode = DosMode::random;
    sc.dos.kappa_d = 1.0;
    sc.dos.nu_d = 10.0;
    sc.dos.seed = 99 + i;
    const SimTrace trace = run_closed_loop(sc);

    // Ex at a sample <= Gamma * omega1^(s - hits) * omega_a^hits * E_in,
    // counting only effective (sample-time) hits
    long hits = 0;
    for (const long s : trace.sample_times) {
      const TraceRow& row = trace.rows[static_cast<std::size_t>(s)];
      const double bound = sc.cert.Gamma *
                           std::pow(sc.trigger.omega1, static_cast<double>(s - hits)) *
                           std::pow(sc.growth.omega_a, static_cast<double>(hits)) *
                           sc.trigger.E_in;
      CHECK(row.Ex <= bound * (1.0 + 1e-9));
      if (row.h == 1) ++hits;
    }

    // output error still inside the range at every sample
    for (const long s : trace.sample_times) {
      const TraceRow& row = trace.rows[static_cast<std::size_t>(s)];
      const Vector center = sc.model.C * row.xhat;
      CHECK(inf_norm(Vector(row.y - center)) <= row.E * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("invariant checks pass on randomized runs of both variants") {
  for (int i = 0; i < 10; ++i) {
    const Scenario std_sc = test::random_standard_scenario(760 + i, true);
    CHECK_NOTHROW((void)run_closed_loop(std_sc));
    const Scenario db_sc = test::random_deadbeat_scenario(770 + i, true);
    CHECK_NOTHROW((void)run_closed_loop(db_sc));
  }
}

TEST_CASE("decay estimation on synthetic traces") {
  auto make_trace = [](const std::vector<double>& norms) {
    SimTrace t;
    t.E_in = 1.0;
    t.horizon = static_cast<long>(norms.size());
    t.variant = Variant::standard;
    for (std::size_t s = 0; s < norms.size(); ++s) {
      TraceRow r;
      r.s = static_cast<long>(s);
      r.k = 0;
      r.x = Vector::Constant(1, norms[s]);
      t.rows.push_back(std::move(r));
    }
    return t;
  };

  SUBCASE("exact exponential") {
    std::vector<double> norms;
    for (int s = 0; s < 200; ++s) norms.push_back(2.0 * std::pow(0.9, s));
    const DecayFit fit = estimate_decay(make_trace(norms));
    CHECK(fit.omega_hat == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(fit.Omega_hat >= 2.0 * (1.0 - 1e-9));
  }

  SUBCASE("constant sequence flags non-convergence") {
    const DecayFit fit = estimate_decay(make_trace(std::vector<double>(100, 3.0)));
    CHECK(fit.omega_hat == doctest::Approx(1.0).epsilon(1e-6));
  }

  SUBCASE("all-zero trace is degenerate") {
    CHECK_THROWS_AS((void)estimate_decay(make_trace(std::vector<double>(100, 0.0))),
                    DegenerateTraceError);
  }

  SUBCASE("too short is degenerate") {
    CHECK_THROWS_AS((void)estimate_decay(make_trace(std::vector<double>(10, 1.0))),
                    DegenerateTraceError);
  }
}

TEST_CASE("single-point sweep reproduces the direct run") {
  const Scenario sc = test::random_standard_scenario(780, false);
  const auto rows = sweep_tradeoff(sc, {sc.trigger.sigma}, {sc.trigger.levels},
                                   {sc.trigger.tau_max}, 1);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].feasible);
  const SimTrace trace = run_closed_loop(sc);
  CHECK(rows[0].samples == trace.sample_count);
  CHECK(rows[0].omega1 == doctest::Approx(sc.trigger.omega1).epsilon(1e-15));
  CHECK(rows[0].dos_bound_value ==
        doctest::Approx(dos_bound(sc.trigger.omega1, sc.growth.omega_a))
            .epsilon(1e-15));
  CHECK(rows[0].omega_hat == doctest::Approx(estimate_decay(trace).omega_hat)
                                 .epsilon(1e-12));
}

TEST_CASE("sweep rows arrive in deterministic grid order with feasibility notes") {
  const Scenario sc = test::random_standard_scenario(790, false);
  const double lo = 1.0 / static_cast<double>(sc.trigger.levels);
  const std::vector<double> sigmas = {lo * 0.5, sc.trigger.sigma, 1.0};
  const auto rows = sweep_tradeoff(sc, sigmas, {sc.trigger.levels}, {5, 10}, 2);
  REQUIRE(rows.size() == 6);
  CHECK_FALSE(rows[0].feasible);  // below 1/N
  CHECK(rows[0].note == "sigma below 1/N");
  CHECK(rows[2].feasible);
  CHECK(rows[2].tau_max == 5);
  CHECK(rows[3].tau_max == 10);
  CHECK_FALSE(rows[4].feasible);  // sigma = 1 is past 1/alpha
  // dos_bound falls as sigma grows (feasible rows at fixed tau_max)
  const auto more = sweep_tradeoff(
      sc, {sc.trigger.sigma, std::min(sc.trigger.sigma * 1.5, 0.99 / sc.trigger.alpha)},
      {sc.trigger.levels}, {sc.trigger.tau_max}, 0);
  if (more[0].feasible && more[1].feasible) {
    CHECK(more[1].dos_bound_value < more[0].dos_bound_value);
  }
}

TEST_SUITE_END();
