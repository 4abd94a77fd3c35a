#include "stqc/certificates.hpp"

#include <algorithm>
#include <cmath>

#include "stqc/errors.hpp"

namespace stqc {

namespace {

// Normalized power tracker: holds G^s / exp(log_scale) with unit-ish norm
// so that very long scans neither overflow nor underflow.
struct ScaledPower {
  Matrix p;
  double log_scale = 0.0;
  bool zero = false;

  explicit ScaledPower(long n) : p(Matrix::Identity(n, n)) {}

  void advance(const Matrix& g) {
    if (zero) return;
    p = (p * g).eval();
    const double n = inf_norm(p);
    if (n == 0.0) {
      zero = true;
      return;
    }
    p /= n;
    log_scale += std::log(n);
  }

  // log ||G^s|| (or -inf when the power vanished exactly)
  double log_norm() const {
    if (zero) return -std::numeric_limits<double>::infinity();
    return log_scale + std::log(inf_norm(p));
  }
};

double exp_clamped(double x) {
  if (x > 700.0) return std::numeric_limits<double>::infinity();
  if (x < -700.0) return 0.0;
  return std::exp(x);
}

}  // namespace

DecayCertificate fit_decay(const Matrix& g, double margin) {
  if (g.rows() != g.cols()) throw DimensionError("fit_decay: matrix must be square");
  if (!(margin > 0.0 && margin < 1.0)) {
    throw DomainError("fit_decay: margin must lie in (0, 1)");
  }
  const double rho = spectral_radius_estimate(g);
  if (rho >= 1.0 - kSchurTolerance) {
    throw NotSchurError("fit_decay: spectral-radius estimate " + std::to_string(rho) +
                        " is not strictly inside the unit circle");
  }
  const double gamma = rho + margin * (1.0 - rho);
  const double log_gamma = std::log(gamma);
  const long nx = g.rows();

  ScaledPower pow(nx);
  double best = 1.0;  // s = 0 ratio
  long below_one = 0;
  for (long s = 1; s <= kDecayScanCap; ++s) {
    pow.advance(g);
    const double ratio = exp_clamped(pow.log_norm() - s * log_gamma);
    best = std::max(best, ratio);
    below_one = (ratio < 1.0) ? below_one + 1 : 0;
    if (below_one >= nx) {
      // Every later ratio is a product of scanned ratios below 1 with a
      // scanned ratio <= best.
      return DecayCertificate{gamma, best * (1.0 + 1e-10)};
    }
  }
  throw NonConvergenceError(
      "fit_decay: ||G^s||/gamma^s did not fall below 1 within the scan cap");
}

GrowthCertificate fit_growth(const Matrix& a, double Gamma) {
  if (a.rows() != a.cols()) throw DimensionError("fit_growth: matrix must be square");
  if (!(Gamma >= 1.0)) throw DomainError("fit_growth: Gamma must be >= 1");
  const double log_big_gamma = std::log(Gamma);
  const long nx = a.rows();

  ScaledPower pow(nx);
  double sup = 0.0;
  long flat = 0;
  for (long s = 1; s <= kGrowthScanCap; ++s) {
    pow.advance(a);
    double term = 0.0;
    if (!pow.zero) {
      term = exp_clamped((log_big_gamma + pow.log_norm()) / static_cast<double>(s));
    }
    if (term > sup) {
      sup = term;
      flat = 0;
    } else {
      ++flat;
    }
    if (flat >= nx) {
      // The prefix maximum certifies all later s: splitting s = q*S + r
      // and using submultiplicativity with Gamma >= 1 keeps every later
      // term at or below it.
      const double base = std::max(sup, 1.0);
      return GrowthCertificate{base * (1.0 + kGrowthSlack)};
    }
  }
  throw NonConvergenceError("fit_growth: the scan never plateaued within the cap");
}

double weighted_norm(const Matrix& g, const DecayCertificate& cert, const Vector& x) {
  if (g.rows() != g.cols()) throw DimensionError("weighted_norm: matrix must be square");
  if (x.size() != g.rows()) throw DimensionError("weighted_norm: vector size mismatch");
  const double norm_x = inf_norm(x);
  if (norm_x == 0.0) return 0.0;
  const double log_gamma = std::log(cert.gamma);

  // v_s = gamma^-s ||G^s x||, u_s = gamma^-s ||G^s||. Once u_s < 1 and
  // (max_u) * u_s * ||x|| <= best, every later v_t is dominated:
  // v_t <= u_(t-s) * v_s and u stays below max_u by induction.
  ScaledPower pow(g.rows());
  double best = norm_x;  // s = 0
  double max_u = 1.0;
  for (long s = 1; s <= kWeightedNormScanCap; ++s) {
    pow.advance(g);
    if (pow.zero) return best;
    const double vx = inf_norm((pow.p * x).eval());
    const double log_off = pow.log_scale - s * log_gamma;
    const double v = (vx == 0.0) ? 0.0 : exp_clamped(log_off + std::log(vx));
    best = std::max(best, v);
    const double u = exp_clamped(log_off + std::log(inf_norm(pow.p)));
    max_u = std::max(max_u, u);
    if (u < 1.0 && max_u * u * norm_x <= best) {
      return best;
    }
  }
  throw NonConvergenceError(
      "weighted_norm: tail bound never fell below the running maximum");
}

}  // namespace stqc
