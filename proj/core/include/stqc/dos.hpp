#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stqc/standard.hpp"

namespace stqc {

enum class DosMode { none, random, worst_case_at_samples, scripted };

/// Duration-budgeted attack model: every prefix [0, s) carries at most
/// kappa_d + s / nu_d attacked steps.
struct DosModel {
  DosMode mode = DosMode::none;
  double kappa_d = 0.0;
  double nu_d = 1.0;  // >= 1
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> schedule;  // scripted mode only
};

struct DosTrace {
  std::vector<std::uint8_t> h;
  std::vector<long> effective_hits;  // sample times with h = 1
};

/// True iff every prefix of h satisfies the duration budget.
bool duration_ok(std::span<const std::uint8_t> h, double kappa_d, double nu_d);

/// Tells the generator whether step s is a sampling time, given the
/// attack decisions made so far (the trigger is deterministic in them).
using SampleOracle =
    std::function<bool(long s, std::span<const std::uint8_t> h_prefix)>;

/// Indicator sequence over [0, horizon). random: seeded i.i.d. draws at
/// duty 1/nu_d accepted greedily under the budget; worst-case: attack
/// exactly at predicted sampling times while the budget allows; scripted:
/// pass-through with budget verification (BudgetViolationError).
std::vector<std::uint8_t> generate_attack(const DosModel& model, long horizon,
                                          const SampleOracle& oracle = {});

/// Parse a schedule file: one line of 0/1 characters, leftmost = s = 0.
std::vector<std::uint8_t> parse_schedule(const std::string& text);

/// gap = 1 while the latest sample is attacked (periodic retry); the
/// deferred self-trigger computation otherwise.
template <typename F>
long resilient_next_sample(F&& deferred_trigger, bool attacked) {
  return attacked ? 1 : std::forward<F>(deferred_trigger)();
}

/// Attacked samples zoom the range OUT by omega_a so the lost output
/// stays inside the hypercube; otherwise the usual contraction applies.
EncoderRange resilient_e_update(const TriggerConfig& cfg, const DecayCertificate& cert,
                                const GrowthCertificate& growth, EncoderRange range,
                                long gap, bool attacked, double norm_c);

/// Supremal admissible attack duty 1/nu_d: log(1/omega1) / log(omega_a/omega1).
/// Requires 0 < omega1 < 1 < omega_a.
double dos_bound(double omega1, double omega_a);

}  // namespace stqc
