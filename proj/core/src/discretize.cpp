#include "stqc/discretize.hpp"

#include <cmath>

#include "stqc/errors.hpp"

namespace stqc {

std::pair<Matrix, Matrix> discretize_zoh(const Matrix& a_cont, const Matrix& b_cont,
                                         double h) {
  if (a_cont.rows() != a_cont.cols()) {
    throw DimensionError("discretize_zoh: A must be square");
  }
  if (b_cont.rows() != a_cont.rows()) {
    throw DimensionError("discretize_zoh: row count of B must match A");
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw DomainError("discretize_zoh: step length must be positive and finite");
  }

  const long n = a_cont.rows();
  const Matrix f = a_cont * h;
  const double norm_f = inf_norm(f);

  // Scale so the series argument has norm <= 1/2, then square back up.
  int squarings = 0;
  if (norm_f > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm_f / 0.5)));
  }
  const Matrix x = f / std::exp2(squarings);
  const double norm_x = inf_norm(x);

  // E = exp(x), P = phi1(x) = sum_k x^k / (k+1)!
  Matrix e = Matrix::Identity(n, n);
  Matrix p = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  double tail = 0.0;
  bool certified = false;
  for (int k = 1; k <= 64; ++k) {
    term = (term * x / static_cast<double>(k)).eval();
    e += term;
    p += term / static_cast<double>(k + 1);
    // remaining terms are bounded by a geometric tail with ratio
    // norm_x / (k+2) < 1
    const double ratio = norm_x / static_cast<double>(k + 2);
    tail = inf_norm(term) * (norm_x / static_cast<double>(k + 1)) / (1.0 - ratio);
    if (tail <= 1e-16) {
      certified = true;
      break;
    }
  }
  if (!certified) {
    throw NonConvergenceError("discretize_zoh: series tail did not certify");
  }

  // Undo the scaling: exp(2x) = exp(x)^2 and phi1(2x) = (I + exp(x)) phi1(x) / 2.
  // Track a conservative error bound through the doublings.
  double err = tail;
  for (int j = 0; j < squarings; ++j) {
    const double ne = inf_norm(e);
    p = (0.5 * (Matrix::Identity(n, n) + e) * p).eval();
    e = (e * e).eval();
    err = 2.0 * ne * err + err * err;
  }
  if (!(err <= 1e-12 * std::max(1.0, inf_norm(e)))) {
    throw NonConvergenceError(
        "discretize_zoh: truncation certificate exceeds 1e-12 after unscaling");
  }

  Matrix ad = e;
  Matrix bd = h * (p * b_cont);
  return {std::move(ad), std::move(bd)};
}

}  // namespace stqc
