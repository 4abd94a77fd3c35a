#pragma once

#include "stqc/linalg.hpp"

namespace stqc {

inline constexpr long kDecayScanCap = 1000;
inline constexpr long kGrowthScanCap = 1000;
inline constexpr long kWeightedNormScanCap = 10000;
inline constexpr double kGrowthSlack = 1e-9;

/// Witness of ||G^s||_inf <= Gamma * gamma^s for all s >= 0.
struct DecayCertificate {
  double gamma = 0.0;  // in (0, 1), strictly above the spectral-radius estimate
  double Gamma = 1.0;  // >= 1
};

/// Witness of Gamma * ||A^s||_inf <= omega_a^s for all s >= 1.
struct GrowthCertificate {
  double omega_a = 1.0;  // > 1
};

/// Fit a decay certificate for a Schur matrix. gamma is placed at
/// rho + margin * (1 - rho); Gamma is the max of ||G^s||/gamma^s over the
/// scan. The scan stops once the ratio has stayed strictly below 1 for
/// n_x consecutive indices: submultiplicativity then dominates every
/// later ratio. Throws NotSchurError / NonConvergenceError.
DecayCertificate fit_decay(const Matrix& g, double margin = 0.5);

/// Smallest growth rate (up to a 1e-9 slack, clamped above 1) with
/// Gamma * ||A^s||_inf <= omega_a^s for all s >= 1. The supremum of
/// (Gamma * ||A^s||)^(1/s) is scanned until it plateaus; any prefix
/// maximum already dominates all later terms because Gamma >= 1.
GrowthCertificate fit_growth(const Matrix& a, double Gamma);

/// sup_s gamma^(-s) ||G^s x||_inf, evaluated exactly by scanning s until
/// the certified tail bound drops below the running maximum. Satisfies
/// ||x||_inf <= result <= Gamma * ||x||_inf.
double weighted_norm(const Matrix& g, const DecayCertificate& cert, const Vector& x);

}  // namespace stqc
