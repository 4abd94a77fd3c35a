#pragma once

#include "stqc/linalg.hpp"

namespace stqc {

/// A = At^eta and B = sum_i At^i Bt must agree with the stored coarse
/// matrices to this entrywise tolerance (relative to the largest entry).
inline constexpr double kModelConsistencyTol = 1e-9;

/// Discrete-time LTI plant at two time scales: the coarse sampling scale
/// (step Delta) and the sub-step scale (step delta = Delta / eta).
struct SystemModel {
  Matrix A;   // n_x x n_x, coarse
  Matrix B;   // n_x x n_u, coarse
  Matrix C;   // n_y x n_x
  Matrix At;  // n_x x n_x, sub-step
  Matrix Bt;  // n_x x n_u, sub-step
  long eta = 1;
  double Delta = 0.0;
  double delta = 0.0;
  double norm_C = 0.0;

  long nx() const { return A.rows(); }
  long nu() const { return B.cols(); }
  long ny() const { return C.rows(); }
};

/// Build from continuous-time matrices: At = exp(Ac * delta), Bt by ZOH at
/// delta, coarse matrices derived, so both time scales agree by
/// construction. Controllability/observability are checked at both scales.
SystemModel make_model_continuous(const Matrix& a_cont, const Matrix& b_cont,
                                  const Matrix& c, double Delta, long eta);

/// Build from sub-step discrete matrices; coarse matrices derived.
SystemModel make_model_discrete(const Matrix& at, const Matrix& bt, const Matrix& c,
                                double Delta, long eta);

/// Build from coarse discrete matrices only (eta = 1).
SystemModel make_model_discrete_coarse(const Matrix& a, const Matrix& b,
                                       const Matrix& c, double Delta);

/// Build from all four matrices; the two-scale consistency invariant is
/// verified instead of imposed.
SystemModel make_model_discrete_full(const Matrix& a, const Matrix& b,
                                     const Matrix& at, const Matrix& bt,
                                     const Matrix& c, double Delta, long eta);

/// Scan eta = 1..n_x for the fixed point where discretizing at
/// delta = Delta/eta yields a controllability index equal to eta.
long resolve_substep_count(const Matrix& a_cont, const Matrix& b_cont, double Delta);

struct PlantState {
  Vector x;
  long s = 0;  // coarse step index
  long k = 0;  // sub-step index in [0, eta)
};

enum class StepScale { coarse, substep };

/// One plant transition under held input u. Coarse: x <- A x + B u,
/// s <- s+1. Sub-step: x <- At x + Bt u, k <- k+1 with rollover into s.
PlantState plant_step(const SystemModel& model, const PlantState& st, const Vector& u,
                      StepScale scale);

/// y = C x.
Vector output(const SystemModel& model, const PlantState& st);

}  // namespace stqc
