#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stqc/deadbeat.hpp"
#include "stqc/dos.hpp"
#include "stqc/plant.hpp"
#include "stqc/standard.hpp"

namespace stqc {

enum class Variant { standard, deadbeat };

std::string to_string(Variant v);

/// A fully resolved run: model, gains, trigger parameters, attack model,
/// and every certificate-derived constant, precomputed and validated.
struct Scenario {
  SystemModel model;
  GainSet gains;
  TriggerConfig trigger;
  Variant variant = Variant::standard;
  DosModel dos;
  Vector x0;
  long horizon = 1;
  bool check_invariants = false;
  double fit_margin = 0.5;

  // derived
  DecayCertificate cert;   // (Gamma, gamma) of A - L C, or of At^eta (I - M C)
  GrowthCertificate growth;  // omega_a of the coarse open-loop A
  std::optional<DeadbeatArtifacts> arts;  // deadbeat variant only
};

/// Assembles the derived constants and checks the scenario invariants
/// (||x0||_inf <= E_in, horizon >= 1, sigma window, omega1 < 1).
Scenario make_scenario(SystemModel model, GainSet gains, Variant variant, double sigma,
                       long tau_max, long levels, double e_in, Vector x0, long horizon,
                       DosModel dos = {}, bool check_invariants = false,
                       double fit_margin = 0.5);

struct TraceRow {
  long s = 0;
  long k = 0;
  Vector x;
  Vector xhat;
  Vector u;
  Vector y;
  std::uint64_t q_index = 0;
  Vector q;
  double E = 0.0;
  double Ex = 0.0;
  bool sampled = false;
  std::uint8_t h = 0;
  bool ack = false;
};

struct SimTrace {
  std::vector<TraceRow> rows;
  long sample_count = 0;
  long effective_attacks = 0;  // samples lost to attacks
  std::vector<long> sample_times;
  Variant variant = Variant::standard;
  double E_in = 0.0;
  long horizon = 0;
};

/// Deterministic closed-loop run. Event order within a sampling step:
/// activate the pending range, read y, quantize, apply the channel,
/// update decoder/controller and ACK, compute the next sampling time and
/// range on both sides, then advance plant and observer under the held
/// input. Throws FrameBreachError when the encode precondition fails.
SimTrace run_closed_loop(const Scenario& sc);

struct DecayFit {
  double Omega_hat = 0.0;
  double omega_hat = 0.0;
};

/// Least-squares fit of the log of the non-increasing envelope of
/// ||x_s||_inf over coarse steps after a 10% burn-in; Omega_hat is
/// inflated so envelope <= Omega_hat * E_in * omega_hat^s holds pointwise
/// on the fitted window. Throws DegenerateTraceError on all-zero traces.
DecayFit estimate_decay(const SimTrace& trace);

struct SweepRow {
  double sigma = 0.0;
  long levels = 0;
  long tau_max = 0;
  bool feasible = false;
  std::string note;
  double omega1 = 0.0;
  double dos_bound_value = 0.0;
  long samples = 0;
  double omega_hat = 0.0;
};

/// One row per (sigma, N, tau_max) grid point in deterministic grid
/// order; infeasible points are reported, not fatal. Grid points run
/// DoS-free; STQC_LOOP_THREADS (or the threads argument) caps parallelism.
std::vector<SweepRow> sweep_tradeoff(const Scenario& base,
                                     const std::vector<double>& sigma_grid,
                                     const std::vector<long>& n_grid,
                                     const std::vector<long>& tau_max_grid,
                                     int threads = 0);

/// CSV with a fixed header; vectors flattened as x0..x{n-1}; floats in
/// shortest round-trip decimal form.
void write_trace_csv(std::ostream& os, const SimTrace& trace, const SystemModel& model);
std::string trace_csv_string(const SimTrace& trace, const SystemModel& model);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

}  // namespace stqc
