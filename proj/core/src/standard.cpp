#include "stqc/standard.hpp"

#include <cmath>
#include <string>

#include "stqc/errors.hpp"

namespace stqc {

GainSet make_standard_gains(const SystemModel& model, Matrix k, Matrix l) {
  if (k.rows() != model.nu() || k.cols() != model.nx()) {
    throw DimensionError("gains: K must be n_u x n_x");
  }
  if (l.rows() != model.nx() || l.cols() != model.ny()) {
    throw DimensionError("gains: L must be n_x x n_y");
  }
  if (!is_schur(model.A + model.B * k)) {
    throw NotSchurError("gains: A + B K is not Schur");
  }
  if (!is_schur(model.A - l * model.C)) {
    throw NotSchurError("gains: A - L C is not Schur");
  }
  GainSet g;
  g.K = std::move(k);
  g.L = std::move(l);
  return g;
}

GainSet make_deadbeat_gains(const SystemModel& model, Matrix k, Matrix m) {
  if (k.rows() != model.nu() || k.cols() != model.nx()) {
    throw DimensionError("gains: K must be n_u x n_x");
  }
  if (m.rows() != model.nx() || m.cols() != model.ny()) {
    throw DimensionError("gains: M must be n_x x n_y");
  }
  const double residual = inf_norm(matrix_power(model.At + model.Bt * k, model.eta));
  const double threshold =
      kDeadbeatResidualTol * std::max(1.0, std::pow(inf_norm(model.At), model.eta));
  if (residual > threshold) {
    throw NotSchurError("gains: ||(At + Bt K)^eta|| = " + std::to_string(residual) +
                        " exceeds the deadbeat threshold " + std::to_string(threshold));
  }
  const Matrix abar =
      matrix_power(model.At, model.eta) *
      (Matrix::Identity(model.nx(), model.nx()) - m * model.C);
  if (!is_schur(abar)) {
    throw NotSchurError("gains: At^eta (I - M C) is not Schur");
  }
  GainSet g;
  g.K = std::move(k);
  g.M = std::move(m);
  return g;
}

SigmaInterval sigma_interval(long levels, double alpha) {
  if (levels < 2) throw ValidationError("sigma_interval: N must be at least 2");
  if (!(alpha > 0.0)) throw DomainError("sigma_interval: alpha must be positive");
  const double lo = 1.0 / static_cast<double>(levels);
  const double hi = 1.0 / alpha;
  if (lo >= hi) {
    const long minimal = static_cast<long>(std::floor(alpha)) + 1;
    throw InfeasibleSigmaError(
        "sigma_interval: 1/N = " + std::to_string(lo) + " >= 1/alpha = " +
            std::to_string(hi) + "; the quantizer is too coarse for this certificate" +
            " (smallest feasible N is " + std::to_string(minimal) + ")",
        minimal);
  }
  return SigmaInterval{lo, hi};
}

TriggerConfig make_trigger_config(double sigma, long tau_max, long levels, double e_in,
                                  double alpha, double gamma) {
  if (tau_max < 1) throw ValidationError("trigger: tau_max must be at least 1");
  if (levels < 2) throw ValidationError("trigger: N must be at least 2");
  if (!(e_in >= 0.0)) throw ValidationError("trigger: E_in must be non-negative");
  if (!(sigma > 0.0)) throw ValidationError("trigger: sigma must be positive");
  if (!(alpha > 0.0)) throw DomainError("trigger: alpha must be positive");
  // sigma < 1/alpha is structural: it keeps alpha*sigma < 1 and hence
  // omega1 < 1. sigma >= 1/N is only flagged: below the floor the
  // per-sample quantization error E/N is no longer certified <= sigma E.
  if (sigma >= 1.0 / alpha) {
    throw InfeasibleSigmaError(
        "trigger: sigma = " + std::to_string(sigma) + " is not below 1/alpha = " +
            std::to_string(1.0 / alpha),
        static_cast<long>(std::floor(alpha)) + 1);
  }
  TriggerConfig cfg;
  cfg.sigma = sigma;
  cfg.tau_max = tau_max;
  cfg.levels = levels;
  cfg.E_in = e_in;
  cfg.alpha = alpha;
  cfg.sigma_below_floor = sigma < 1.0 / static_cast<double>(levels);
  const double as = alpha * sigma;
  cfg.omega1 = std::pow(e_contraction_factor(gamma, as, tau_max),
                        1.0 / static_cast<double>(tau_max));
  return cfg;
}

double e_contraction_factor(double gamma, double alpha_sigma, long gap) {
  return std::pow(gamma, static_cast<double>(gap)) * (1.0 - alpha_sigma) + alpha_sigma;
}

EncoderRange initial_range(const TriggerConfig& cfg, const DecayCertificate& cert,
                           double norm_c) {
  EncoderRange r;
  r.Ex = cert.Gamma * cfg.E_in;
  r.E = norm_c * r.Ex;
  return r;
}

EncoderRange e_update(const TriggerConfig& cfg, const DecayCertificate& cert,
                      EncoderRange range, long gap, double norm_c) {
  if (gap < 1) throw DomainError("e_update: gap must be at least 1");
  range.Ex *= e_contraction_factor(cert.gamma, cfg.alpha * cfg.sigma, gap);
  range.E = norm_c * range.Ex;
  return range;
}

Vector observer_step(const SystemModel& model, const GainSet& gains, const Vector& est,
                     const Vector& q_held, bool attacked) {
  Vector next = model.A * est + model.B * (gains.K * est);
  if (!attacked) {
    next += *gains.L * (q_held - model.C * est);
  }
  return next;
}

StandardTriggerTables StandardTriggerTables::build(const SystemModel& model,
                                                   const GainSet& gains, long levels,
                                                   long tau_max) {
  if (!gains.L) throw ValidationError("trigger tables: standard gains require L");
  const long nx = model.nx();
  const Matrix& a = model.A;
  const Matrix bk = model.B * gains.K;
  const Matrix h = a + bk - *gains.L * model.C;
  const double inv_n = 1.0 / static_cast<double>(levels);

  StandardTriggerTables t;
  t.tau_max_ = tau_max;
  t.coef_e_.resize(tau_max + 1);
  t.cx_.resize(tau_max + 1);
  t.cs_.resize(tau_max + 1);

  // Recurrences over tau:
  //   W_{tau+1} = A W_tau + B K H^tau            (W_0 = 0)
  //   S_{tau+1} = A S_tau + B K I_{tau-1} L      (S_0 = 0, I_m = sum_{j<=m} H^j)
  Matrix a_pow = Matrix::Identity(nx, nx);  // A^tau
  Matrix h_pow = Matrix::Identity(nx, nx);  // H^tau
  Matrix h_sum = Matrix::Zero(nx, nx);      // I_{tau-1} = sum_{j=0}^{tau-1} H^j
  Matrix w = Matrix::Zero(nx, nx);
  Matrix s = Matrix::Zero(nx, nx);
  for (long tau = 0; tau <= tau_max; ++tau) {
    const Matrix a_pow_minus_i = a_pow - Matrix::Identity(nx, nx);
    t.coef_e_[tau] = inf_norm(model.C * a_pow_minus_i) / model.norm_C + inv_n;
    t.cx_[tau] = model.C * (a_pow_minus_i + w);
    t.cs_[tau] = model.C * s;
    if (tau == tau_max) break;
    s = a * s + bk * h_sum * *gains.L;
    w = a * w + bk * h_pow;
    h_sum += h_pow;
    h_pow = h_pow * h;
    a_pow = a_pow * a;
  }
  return t;
}

double StandardTriggerTables::eval(const Vector& q, double e, const Vector& xhat,
                                   long tau) const {
  if (tau < 0 || tau > tau_max_) {
    throw DomainError("trigger: tau outside [0, tau_max]");
  }
  return coef_e_[tau] * e + inf_norm(cx_[tau] * xhat + cs_[tau] * q);
}

long next_sample_gap(const StandardTriggerTables& tables, const TriggerConfig& cfg,
                     const Vector& q, double e, const Vector& xhat) {
  const double threshold = cfg.sigma * e;
  for (long tau = 1; tau < cfg.tau_max; ++tau) {
    if (tables.eval(q, e, xhat, tau) > threshold) return tau;
  }
  return cfg.tau_max;
}

}  // namespace stqc
