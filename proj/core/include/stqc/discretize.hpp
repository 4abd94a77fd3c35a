#pragma once

#include <utility>

#include "stqc/linalg.hpp"

namespace stqc {

/// Exact zero-order-hold discretization of  dx/dt = A x + B u  over a
/// step of length h:
///
///   Ad = exp(A h),   Bd = (integral_0^h exp(A t) dt) B = h * phi1(A h) B
///
/// evaluated by a scaled truncated power series whose truncation error is
/// certified below 1e-12 in the infinity norm (NonConvergenceError if the
/// certificate cannot be met).
std::pair<Matrix, Matrix> discretize_zoh(const Matrix& a_cont, const Matrix& b_cont,
                                         double h);

}  // namespace stqc
