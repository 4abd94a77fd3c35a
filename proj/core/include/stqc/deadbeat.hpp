#pragma once

#include <vector>

#include "stqc/standard.hpp"

namespace stqc {

/// ||(At + Bt K)^eta||_inf. The GainSet constructor enforces the
/// acceptance threshold; this just reports the residual.
double verify_deadbeat_gain(const Matrix& at, const Matrix& bt, const Matrix& k,
                            long eta);

/// Gain K with (At + Bt K)^order = 0 for any order >= the controllability
/// index. Works in the Krylov chain basis: breadth-first selection of
/// independent columns At^j bt_i fixes chain lengths mu_i; the left chain
/// functionals q_i (rows of the basis inverse) reduce the deadbeat
/// condition to the linear system q_i At^(mu_i - 1) (At + Bt K) = 0.
/// Throws NotControllableError / SynthesisError.
Matrix design_deadbeat_gain(const Matrix& at, const Matrix& bt, long order);

/// M = (At^eta)^(-1) Mbar for a user-supplied Mbar making At^eta - Mbar C
/// Schur; requires At^eta invertible.
Matrix observer_gain_from_mbar(const Matrix& at, long eta, const Matrix& mbar);

/// Constants of the sub-stepped closed loop. phi_a maps the boundary
/// estimation error to the end-of-step state: x_{s,eta} = phi_a (x_s - xhat_s).
struct DeadbeatArtifacts {
  Matrix phi_a;              // -sum_i (At+Bt K)^i Bt K At^(eta-i-1)
  Matrix abar_cl;            // At^eta (I - M C)
  DecayCertificate cert_bar; // fit of abar_cl
  double alpha_bar = 0.0;    // Gamma_bar ||At^eta M|| ||C|| / (1 - gamma_bar)
};

/// Builds the artifacts; phi_a is recomputed through the telescoped route
/// At^eta - (At + Bt K)^eta and both routes must agree.
DeadbeatArtifacts make_deadbeat_artifacts(const SystemModel& model, const GainSet& gains,
                                          double fit_margin);

enum class DbPhase { substep, boundary };

/// Sub-step: est <- (At + Bt K) est. Boundary: est <- prev_end +
/// M (q_held - C prev_end); an attacked latest sample drops the
/// correction term.
Vector db_step(const SystemModel& model, const GainSet& gains, const Vector& est,
               const Vector& q_held, DbPhase phase, bool attacked = false);

/// Trigger coefficients for the sub-stepped variant; eval(tau) bounds the
/// deviation of the output tau coarse steps ahead using only (q, E):
///
///   tau = 1:  [||C phi_a (I-MC)||/||C|| + ||C phi_a M||/N] E + ||q||
///   tau >= 2: [||C phi_a A^(tau-2) abar_cl||/||C|| + ||C phi_a A^(tau-1) M||/N] E
///             + ||(C phi_a sum_{i<=tau-2} A^i M + I) q||
///
/// with A = At^eta.
class DeadbeatTriggerTables {
 public:
  static DeadbeatTriggerTables build(const SystemModel& model, const GainSet& gains,
                                     const DeadbeatArtifacts& arts, long levels,
                                     long tau_max);

  double eval(const Vector& q, double e, long tau) const;

  long tau_max() const { return tau_max_; }

 private:
  long tau_max_ = 0;
  std::vector<double> coef_e_;
  std::vector<Matrix> mq_;
};

/// min(tau_max, min{tau >= 1 : g_bar(tau) > sigma E}).
long db_next_sample_gap(const DeadbeatTriggerTables& tables, const TriggerConfig& cfg,
                        const Vector& q, double e);

/// Range update with the (gamma_bar, alpha_bar) constants; same contraction
/// law as the standard variant.
EncoderRange db_e_update(const TriggerConfig& cfg, const DeadbeatArtifacts& arts,
                         EncoderRange range, long gap, double norm_c);

}  // namespace stqc
