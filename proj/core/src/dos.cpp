#include "stqc/dos.hpp"

#include <cmath>
#include <random>

#include "stqc/errors.hpp"

namespace stqc {

namespace {

// Prefix budget check for turning step s into an attack: the binding
// prefix is [0, s+1).
bool budget_allows(double attacked_so_far, long s, double kappa_d, double nu_d) {
  return attacked_so_far + 1.0 <= kappa_d + static_cast<double>(s + 1) / nu_d;
}

// Uniform double in [0, 1) from the raw 64-bit stream; keeps the draw
// sequence independent of the standard library's distribution details.
double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

bool duration_ok(std::span<const std::uint8_t> h, double kappa_d, double nu_d) {
  double acc = 0.0;
  for (std::size_t s = 0; s < h.size(); ++s) {
    acc += h[s] ? 1.0 : 0.0;
    if (acc > kappa_d + static_cast<double>(s + 1) / nu_d) return false;
  }
  return true;
}

std::vector<std::uint8_t> generate_attack(const DosModel& model, long horizon,
                                          const SampleOracle& oracle) {
  if (horizon < 1) throw DomainError("generate_attack: horizon must be at least 1");
  if (!(model.kappa_d >= 0.0)) throw ValidationError("dos: kappa_d must be >= 0");
  if (!(model.nu_d >= 1.0)) throw ValidationError("dos: nu_d must be >= 1");

  std::vector<std::uint8_t> h(static_cast<std::size_t>(horizon), 0);
  switch (model.mode) {
    case DosMode::none:
      return h;
    case DosMode::random: {
      std::mt19937_64 rng(model.seed);
      const double duty = 1.0 / model.nu_d;
      double attacked = 0.0;
      for (long s = 0; s < horizon; ++s) {
        const bool want = unit_draw(rng) < duty;
        if (want && budget_allows(attacked, s, model.kappa_d, model.nu_d)) {
          h[static_cast<std::size_t>(s)] = 1;
          attacked += 1.0;
        }
      }
      return h;
    }
    case DosMode::worst_case_at_samples: {
      if (!oracle) {
        throw ValidationError("generate_attack: worst-case mode needs a sample oracle");
      }
      double attacked = 0.0;
      for (long s = 0; s < horizon; ++s) {
        const std::span<const std::uint8_t> prefix(h.data(),
                                                   static_cast<std::size_t>(s));
        if (oracle(s, prefix) && budget_allows(attacked, s, model.kappa_d, model.nu_d)) {
          h[static_cast<std::size_t>(s)] = 1;
          attacked += 1.0;
        }
      }
      return h;
    }
    case DosMode::scripted: {
      if (static_cast<long>(model.schedule.size()) < horizon) {
        throw ValidationError("generate_attack: scripted schedule shorter than horizon");
      }
      std::copy_n(model.schedule.begin(), horizon, h.begin());
      if (!duration_ok(h, model.kappa_d, model.nu_d)) {
        throw BudgetViolationError(
            "generate_attack: scripted schedule violates the duration budget");
      }
      return h;
    }
  }
  throw DomainError("generate_attack: unknown mode");
}

std::vector<std::uint8_t> parse_schedule(const std::string& text) {
  std::vector<std::uint8_t> h;
  for (char c : text) {
    if (c == '0') {
      h.push_back(0);
    } else if (c == '1') {
      h.push_back(1);
    } else if (c == '\n' || c == '\r' || c == ' ' || c == '\t') {
      continue;
    } else {
      throw ValidationError(std::string("schedule: unexpected character '") + c + "'");
    }
  }
  return h;
}

EncoderRange resilient_e_update(const TriggerConfig& cfg, const DecayCertificate& cert,
                                const GrowthCertificate& growth, EncoderRange range,
                                long gap, bool attacked, double norm_c) {
  if (attacked) {
    if (gap != 1) throw DomainError("resilient_e_update: attacked samples retry at gap 1");
    range.Ex *= growth.omega_a;
    range.E = norm_c * range.Ex;
    return range;
  }
  return e_update(cfg, cert, range, gap, norm_c);
}

double dos_bound(double omega1, double omega_a) {
  if (!(omega1 > 0.0 && omega1 < 1.0 && omega_a > 1.0)) {
    throw DomainError("dos_bound: need 0 < omega1 < 1 < omega_a");
  }
  return std::log(1.0 / omega1) / std::log(omega_a / omega1);
}

}  // namespace stqc
