#include "stqc/linalg.hpp"

#include <cmath>
#include <cstdlib>

#include "stqc/errors.hpp"

namespace stqc {

namespace {

void require_nonempty(const Matrix& m, const char* who) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw DimensionError(std::string(who) + ": matrix must be at least 1x1");
  }
  if (!m.allFinite()) {
    throw ValidationError(std::string(who) + ": matrix has non-finite entries");
  }
}

}  // namespace

Matrix matrix_power(const Matrix& m, long p) {
  if (m.rows() != m.cols()) {
    throw DimensionError("matrix_power: matrix must be square");
  }
  if (p < 0) throw DomainError("matrix_power: negative exponent");
  Matrix acc = Matrix::Identity(m.rows(), m.cols());
  for (long i = 0; i < p; ++i) acc = acc * m;
  return acc;
}

long rank_with_tolerance(const Matrix& m) {
  require_nonempty(m, "rank_with_tolerance");
  Matrix work = m;
  const double scale = work.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0;
  const double tol = kRankRelTolerance * scale;

  const long rows = work.rows();
  const long cols = work.cols();
  long rank = 0;
  long r0 = 0, c0 = 0;
  while (r0 < rows && c0 < cols) {
    // full pivot search in the remaining block
    long pr = r0, pc = c0;
    double pv = 0.0;
    for (long r = r0; r < rows; ++r) {
      for (long c = c0; c < cols; ++c) {
        const double v = std::abs(work(r, c));
        if (v > pv) {
          pv = v;
          pr = r;
          pc = c;
        }
      }
    }
    if (pv < tol) break;
    work.row(r0).swap(work.row(pr));
    work.col(c0).swap(work.col(pc));
    for (long r = r0 + 1; r < rows; ++r) {
      const double f = work(r, c0) / work(r0, c0);
      work.row(r).tail(cols - c0) -= f * work.row(r0).tail(cols - c0);
    }
    ++rank;
    ++r0;
    ++c0;
  }
  return rank;
}

double spectral_radius_estimate(const Matrix& m) {
  require_nonempty(m, "spectral_radius_estimate");
  if (m.rows() != m.cols()) {
    throw DimensionError("spectral_radius_estimate: matrix must be square");
  }
  double norm = inf_norm(m);
  if (norm == 0.0) return 0.0;

  // Track X = m^(2^k) normalized to unit norm; log_norm accumulates
  // log ||m^(2^k)||. The bound exp(log_norm / 2^k) never increases.
  Matrix x = m / norm;
  double log_norm = std::log(norm);
  double bound = norm;
  for (int k = 1; k <= 60; ++k) {
    x = (x * x).eval();
    const double nb = inf_norm(x);
    if (nb == 0.0) return 0.0;  // nilpotent
    log_norm = 2.0 * log_norm + std::log(nb);
    x /= nb;
    const double next = std::exp(log_norm / std::exp2(k));
    if (bound - next <= 1e-13 * std::max(next, 1e-300)) {
      return next;
    }
    bound = next;
  }
  return bound;
}

bool is_schur(const Matrix& m) {
  return spectral_radius_estimate(m) < 1.0 - kSchurTolerance;
}

long controllability_index(const Matrix& at, const Matrix& bt) {
  require_nonempty(at, "controllability_index");
  require_nonempty(bt, "controllability_index");
  if (at.rows() != at.cols()) {
    throw DimensionError("controllability_index: At must be square");
  }
  if (bt.rows() != at.rows()) {
    throw DimensionError("controllability_index: row count of Bt must match At");
  }
  const long nx = at.rows();
  const long nu = bt.cols();
  Matrix krylov(nx, nx * nu);
  Matrix block = bt;
  for (long j = 0; j < nx; ++j) {
    krylov.middleCols(j * nu, nu) = block;
    if (rank_with_tolerance(krylov.leftCols((j + 1) * nu)) == nx) {
      return j + 1;
    }
    block = at * block;
  }
  throw NotControllableError(
      "controllability_index: rank never reaches n_x within n_x blocks");
}

bool is_controllable(const Matrix& a, const Matrix& b) {
  try {
    (void)controllability_index(a, b);
    return true;
  } catch (const NotControllableError&) {
    return false;
  }
}

bool is_observable(const Matrix& c, const Matrix& a) {
  return is_controllable(a.transpose(), c.transpose());
}

}  // namespace stqc
