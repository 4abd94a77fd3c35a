#pragma once

#include <optional>
#include <vector>

#include "stqc/certificates.hpp"
#include "stqc/plant.hpp"

namespace stqc {

/// Deadbeat residual threshold, relative to ||At||_inf^eta (floored at an
/// absolute 1e-8 for contractive At).
inline constexpr double kDeadbeatResidualTol = 1e-8;

/// Controller and observer gains. L drives the every-step Luenberger
/// observer; M drives the boundary correction of the sub-stepped variant
/// (exactly one of the two is present).
struct GainSet {
  Matrix K;                 // n_u x n_x
  std::optional<Matrix> L;  // n_x x n_y
  std::optional<Matrix> M;  // n_x x n_y
};

/// Validates that A + B K and A - L C are Schur.
GainSet make_standard_gains(const SystemModel& model, Matrix k, Matrix l);

/// Validates the deadbeat residual ||(At + Bt K)^eta|| against
/// kDeadbeatResidualTol * max(1, ||At||^eta) and that At^eta (I - M C)
/// is Schur.
GainSet make_deadbeat_gains(const SystemModel& model, Matrix k, Matrix m);

struct SigmaInterval {
  double lo = 0.0;  // 1/N
  double hi = 0.0;  // 1/alpha, exclusive
};

/// Admissible threshold window [1/N, 1/alpha). Throws InfeasibleSigmaError
/// (carrying the smallest feasible N) when empty.
SigmaInterval sigma_interval(long levels, double alpha);

/// Self-trigger parameters plus the constants derived from the active
/// decay certificate.
struct TriggerConfig {
  double sigma = 0.0;
  long tau_max = 1;
  long levels = 2;  // N
  double E_in = 0.0;
  // derived
  double alpha = 0.0;   // Gamma ||L|| ||C|| / (1 - gamma)  (or the M-based analogue)
  double omega1 = 0.0;  // (gamma^tau_max (1 - alpha sigma) + alpha sigma)^(1/tau_max)
  bool sigma_below_floor = false;  // sigma < 1/N accepted but flagged
};

/// Builds the derived constants and validates sigma < 1/alpha (hard) and
/// sigma >= 1/N (flagged only: the per-sample quantization error bound
/// E/N is certified <= sigma E only when the floor holds).
TriggerConfig make_trigger_config(double sigma, long tau_max, long levels, double e_in,
                                  double alpha, double gamma);

/// gamma^gap (1 - alpha sigma) + alpha sigma; the per-sample range
/// contraction. Strictly below 1 for gap >= 1 whenever alpha sigma < 1.
double e_contraction_factor(double gamma, double alpha_sigma, long gap);

/// Quantization range pair: Ex at state level, E = ||C|| Ex at output level.
struct EncoderRange {
  double Ex = 0.0;
  double E = 0.0;
};

/// Ex_0 = Gamma * E_in.
EncoderRange initial_range(const TriggerConfig& cfg, const DecayCertificate& cert,
                           double norm_c);

/// Range update across a gap of `gap` steps (gap >= 1).
EncoderRange e_update(const TriggerConfig& cfg, const DecayCertificate& cert,
                      EncoderRange range, long gap, double norm_c);

/// One observer-controller transition with the held quantized output:
/// est' = A est + B K est + L (q_held - C est); the innovation is dropped
/// while the latest sample is lost to an attack.
Vector observer_step(const SystemModel& model, const GainSet& gains, const Vector& est,
                     const Vector& q_held, bool attacked);

/// Memoized coefficient tables for the trigger function, one row per
/// look-ahead tau in [0, tau_max]:
///
///   g(q, E, xhat, tau) = coef_E[tau] * E + || CX[tau] xhat + CS[tau] q ||_inf
///
/// with coef_E[tau] = ||C (A^tau - I)|| / ||C|| + 1/N,
/// CX[tau] = C (A^tau - I + sum_i A^i B K H^(tau-i-1)) and
/// CS[tau] = C sum_i A^i B K (sum_{j<=tau-i-2} H^j) L, H = A + B K - L C.
class StandardTriggerTables {
 public:
  static StandardTriggerTables build(const SystemModel& model, const GainSet& gains,
                                     long levels, long tau_max);

  /// tau = 0 is the degenerate anchor g = E/N (testing only; the trigger
  /// scan starts at tau = 1).
  double eval(const Vector& q, double e, const Vector& xhat, long tau) const;

  long tau_max() const { return tau_max_; }

 private:
  long tau_max_ = 0;
  std::vector<double> coef_e_;
  std::vector<Matrix> cx_;
  std::vector<Matrix> cs_;
};

/// min(tau_max, min{tau >= 1 : g(tau) > sigma E}); always >= 1.
long next_sample_gap(const StandardTriggerTables& tables, const TriggerConfig& cfg,
                     const Vector& q, double e, const Vector& xhat);

/// Encoder-side state for the standard variant: a synchronized observer
/// replica plus the active frame.
struct EncoderState {
  Vector xhat;
  EncoderRange range;
  long s_last = 0;
  Vector q_held;
};

}  // namespace stqc
