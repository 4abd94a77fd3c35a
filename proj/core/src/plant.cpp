#include "stqc/plant.hpp"

#include <cmath>
#include <string>

#include "stqc/discretize.hpp"
#include "stqc/errors.hpp"

namespace stqc {

namespace {

void check_dims(const Matrix& a, const Matrix& b, const Matrix& c) {
  if (a.rows() != a.cols()) throw DimensionError("plant: A must be square");
  if (b.rows() != a.rows()) throw DimensionError("plant: B row count must match A");
  if (c.cols() != a.rows()) throw DimensionError("plant: C column count must match A");
  if (c.rows() < 1) throw DimensionError("plant: C must have at least one row");
}

void check_assumptions(const SystemModel& m) {
  if (!is_controllable(m.A, m.B)) {
    throw NotControllableError("plant: (A, B) is not controllable");
  }
  if (!is_observable(m.C, m.A)) {
    throw ValidationError("plant: (C, A) is not observable");
  }
  if (m.eta > 1) {
    if (!is_controllable(m.At, m.Bt)) {
      throw NotControllableError("plant: (At, Bt) is not controllable");
    }
    // coarse A equals At^eta, so (C, At^eta) observability matches above
  }
}

void check_consistency(const SystemModel& m) {
  const Matrix a_derived = matrix_power(m.At, m.eta);
  Matrix b_derived = Matrix::Zero(m.nx(), m.nu());
  Matrix pow = Matrix::Identity(m.nx(), m.nx());
  for (long i = 0; i < m.eta; ++i) {
    b_derived += pow * m.Bt;
    pow = pow * m.At;
  }
  const double scale = std::max({1.0, inf_norm(m.A), inf_norm(m.B)});
  if (inf_norm(m.A - a_derived) > kModelConsistencyTol * scale ||
      inf_norm(m.B - b_derived) > kModelConsistencyTol * scale) {
    throw ValidationError(
        "plant: coarse matrices disagree with At^eta / sum At^i Bt beyond 1e-9");
  }
}

SystemModel assemble(Matrix a, Matrix b, Matrix at, Matrix bt, Matrix c, double Delta,
                     long eta) {
  SystemModel m;
  m.A = std::move(a);
  m.B = std::move(b);
  m.At = std::move(at);
  m.Bt = std::move(bt);
  m.C = std::move(c);
  m.eta = eta;
  m.Delta = Delta;
  m.delta = Delta / static_cast<double>(eta);
  m.norm_C = inf_norm(m.C);
  check_dims(m.A, m.B, m.C);
  check_consistency(m);
  check_assumptions(m);
  return m;
}

void check_step_params(double Delta, long eta) {
  if (!(Delta > 0.0)) throw DomainError("plant: Delta must be positive");
  if (eta < 1) throw DomainError("plant: eta must be at least 1");
}

}  // namespace

SystemModel make_model_continuous(const Matrix& a_cont, const Matrix& b_cont,
                                  const Matrix& c, double Delta, long eta) {
  check_step_params(Delta, eta);
  const double delta = Delta / static_cast<double>(eta);
  auto [at, bt] = discretize_zoh(a_cont, b_cont, delta);
  return make_model_discrete(at, bt, c, Delta, eta);
}

SystemModel make_model_discrete(const Matrix& at, const Matrix& bt, const Matrix& c,
                                double Delta, long eta) {
  check_step_params(Delta, eta);
  check_dims(at, bt, c);
  Matrix a = matrix_power(at, eta);
  Matrix b = Matrix::Zero(bt.rows(), bt.cols());
  Matrix pow = Matrix::Identity(at.rows(), at.cols());
  for (long i = 0; i < eta; ++i) {
    b += pow * bt;
    pow = pow * at;
  }
  return assemble(std::move(a), std::move(b), at, bt, c, Delta, eta);
}

SystemModel make_model_discrete_coarse(const Matrix& a, const Matrix& b,
                                       const Matrix& c, double Delta) {
  check_step_params(Delta, 1);
  return assemble(a, b, a, b, c, Delta, 1);
}

SystemModel make_model_discrete_full(const Matrix& a, const Matrix& b,
                                     const Matrix& at, const Matrix& bt,
                                     const Matrix& c, double Delta, long eta) {
  check_step_params(Delta, eta);
  return assemble(a, b, at, bt, c, Delta, eta);
}

long resolve_substep_count(const Matrix& a_cont, const Matrix& b_cont, double Delta) {
  if (!(Delta > 0.0)) throw DomainError("resolve_substep_count: Delta must be positive");
  const long nx = a_cont.rows();
  for (long eta = 1; eta <= nx; ++eta) {
    auto [at, bt] = discretize_zoh(a_cont, b_cont, Delta / static_cast<double>(eta));
    try {
      if (controllability_index(at, bt) == eta) return eta;
    } catch (const NotControllableError&) {
      break;
    }
  }
  throw NotControllableError(
      "resolve_substep_count: no eta in [1, n_x] matches its controllability index");
}

PlantState plant_step(const SystemModel& model, const PlantState& st, const Vector& u,
                      StepScale scale) {
  if (u.size() != model.nu()) throw DimensionError("plant_step: input size mismatch");
  if (!u.allFinite()) throw ValidationError("plant_step: non-finite input");
  PlantState next = st;
  if (scale == StepScale::coarse) {
    next.x = model.A * st.x + model.B * u;
    next.s = st.s + 1;
  } else {
    next.x = model.At * st.x + model.Bt * u;
    next.k = st.k + 1;
    if (next.k == model.eta) {
      next.k = 0;
      next.s = st.s + 1;
    }
  }
  return next;
}

Vector output(const SystemModel& model, const PlantState& st) { return model.C * st.x; }

}  // namespace stqc
