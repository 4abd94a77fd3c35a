#include <benchmark/benchmark.h>

#include "stqc/certificates.hpp"
#include "stqc/discretize.hpp"
#include "stqc/quantizer.hpp"
#include "stqc/sim.hpp"

namespace {

using namespace stqc;

Matrix reactor_a() {
  Matrix a(4, 4);
  a << 1.38, -0.2077, 6.715, -5.676, -0.5814, -4.29, 0.0, 0.675, 1.067, 4.273, -6.654,
      5.893, 0.048, 4.273, -1.343, -2.104;
  return a;
}

Matrix reactor_b() {
  Matrix b(4, 2);
  b << 0.0, 0.0, 5.679, 0.0, 1.136, -3.146, 1.136, 0.0;
  return b;
}

void bm_discretize_zoh(benchmark::State& state) {
  const Matrix a = reactor_a();
  const Matrix b = reactor_b();
  for (auto _ : state) {
    auto [ad, bd] = discretize_zoh(a, b, 0.005);
    benchmark::DoNotOptimize(ad);
    benchmark::DoNotOptimize(bd);
  }
}
BENCHMARK(bm_discretize_zoh);

void bm_fit_decay(benchmark::State& state) {
  Matrix g = reactor_a();
  g /= 2.0 * inf_norm(g);  // contraction
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_decay(g, 0.5));
  }
}
BENCHMARK(bm_fit_decay);

void bm_quantizer_round_trip(benchmark::State& state) {
  const QuantizerSpec spec = make_quantizer_spec(101, 2);
  Vector center(2);
  center << 0.1, -0.2;
  const QuantizationFrame frame{center, 1.5};
  Vector y(2);
  y << 0.7, -1.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode(spec, frame, encode(spec, frame, y)));
  }
}
BENCHMARK(bm_quantizer_round_trip);

void bm_trigger_scan(benchmark::State& state) {
  auto [at, bt] = discretize_zoh(reactor_a(), reactor_b(), 0.005);
  Matrix c(2, 4);
  c << 1.0, 0.0, 1.0, -1.0, 0.0, 1.0, 0.0, 0.0;
  const SystemModel model = make_model_discrete_coarse(at, bt, c, 0.005);
  Matrix k(2, 4);
  k << 1.4110, -3.5708, -0.6385, -4.1134, 6.0726, -0.0486, 4.6801, -2.5005;
  // observer gain scaled for a Schur estimation loop
  const Matrix l = 0.5 * model.A * c.transpose() *
                   (c * c.transpose()).inverse();
  GainSet gains;
  try {
    gains = make_standard_gains(model, k, l);
  } catch (const std::exception&) {
    state.SkipWithError("reactor gain setup failed");
    return;
  }
  const StandardTriggerTables tables =
      StandardTriggerTables::build(model, gains, 101, 20);
  TriggerConfig cfg;
  cfg.sigma = 0.0343;
  cfg.tau_max = 20;
  cfg.levels = 101;
  Vector q(2), xh(4);
  q << 0.02, -0.05;
  xh << 0.4, -0.2, 0.1, 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(next_sample_gap(tables, cfg, q, 0.5, xh));
  }
}
BENCHMARK(bm_trigger_scan);

}  // namespace

BENCHMARK_MAIN();
