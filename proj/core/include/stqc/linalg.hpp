#pragma once

#include <Eigen/Dense>

namespace stqc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Spectral-radius estimates inside [1 - kSchurTolerance, 1 + kSchurTolerance]
/// report "not Schur": certificates need strict margin anyway.
inline constexpr double kSchurTolerance = 1e-9;

/// A pivot counts as zero when |pivot| < kRankRelTolerance * (largest
/// absolute entry of the input matrix).
inline constexpr double kRankRelTolerance = 1e-9;

/// Induced infinity norm: max over rows of the absolute row sum. For a
/// column vector this is the max absolute entry.
template <typename Derived>
double inf_norm(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

/// m^p by repeated multiplication, p >= 0.
Matrix matrix_power(const Matrix& m, long p);

/// Rank by Gaussian elimination with full pivoting and a scale-relative
/// zero threshold (kRankRelTolerance against the largest initial entry).
long rank_with_tolerance(const Matrix& m);

/// Upper estimate of the spectral radius via scaled repeated squaring of
/// the infinity norm: ||m^(2^k)||^(1/2^k) is non-increasing in k and
/// converges to rho(m) from above.
double spectral_radius_estimate(const Matrix& m);

/// True iff the spectral-radius estimate is < 1 - kSchurTolerance.
bool is_schur(const Matrix& m);

/// Smallest eta such that [Bt, At*Bt, ..., At^(eta-1)*Bt] has full row
/// rank. Throws NotControllableError if rank never reaches n_x within
/// n_x blocks.
long controllability_index(const Matrix& at, const Matrix& bt);

/// Rank test on the controllability matrix with n_x blocks.
bool is_controllable(const Matrix& a, const Matrix& b);

/// Rank test on the observability matrix with n_x blocks.
bool is_observable(const Matrix& c, const Matrix& a);

}  // namespace stqc
