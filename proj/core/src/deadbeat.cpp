#include "stqc/deadbeat.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stqc/errors.hpp"

namespace stqc {

double verify_deadbeat_gain(const Matrix& at, const Matrix& bt, const Matrix& k,
                            long eta) {
  if (at.rows() != at.cols() || bt.rows() != at.rows() || k.rows() != bt.cols() ||
      k.cols() != at.cols()) {
    throw DimensionError("verify_deadbeat_gain: inconsistent dimensions");
  }
  return inf_norm(matrix_power(at + bt * k, eta));
}

Matrix design_deadbeat_gain(const Matrix& at, const Matrix& bt, long order) {
  if (at.rows() != at.cols()) throw DimensionError("design_deadbeat_gain: At not square");
  if (bt.rows() != at.rows()) {
    throw DimensionError("design_deadbeat_gain: Bt row count must match At");
  }
  const long nx = at.rows();
  const long nu = bt.cols();
  if (order < 1 || order > nx) {
    throw DomainError("design_deadbeat_gain: order must lie in [1, n_x]");
  }

  // Breadth-first Krylov column selection. Power-major order makes the
  // accepted counts per input the controllability indices.
  Matrix basis(nx, nx);
  long selected = 0;
  std::vector<long> mu(nu, 0);
  std::vector<std::vector<Vector>> chains(nu);
  {
    std::vector<Matrix> powers;
    powers.push_back(Matrix::Identity(nx, nx));
    Matrix q_basis(nx, nx);  // orthonormal columns of the selected span
    const double scale = std::max(bt.cwiseAbs().maxCoeff(), 1e-300);
    for (long j = 0; j < nx && selected < nx; ++j) {
      if (j > 0) powers.push_back(powers.back() * at);
      bool accepted_any = false;
      for (long i = 0; i < nu && selected < nx; ++i) {
        if (j > 0 && mu[i] < j) continue;  // chain already ended
        Vector cand = powers[j] * bt.col(i);
        // re-orthogonalized Gram-Schmidt residual test
        Vector resid = cand;
        for (int pass = 0; pass < 2; ++pass) {
          for (long c = 0; c < selected; ++c) {
            resid -= q_basis.col(c).dot(resid) * q_basis.col(c);
          }
        }
        const double rn = resid.norm();
        if (rn <= kRankRelTolerance * std::max(cand.norm(), scale)) continue;
        basis.col(selected) = cand;
        q_basis.col(selected) = resid / rn;
        ++selected;
        mu[i] = j + 1;
        chains[i].push_back(cand);
        accepted_any = true;
      }
      if (!accepted_any) break;
    }
  }
  if (selected < nx) {
    throw NotControllableError("design_deadbeat_gain: (At, Bt) is not controllable");
  }
  const long eta = *std::max_element(mu.begin(), mu.end());
  if (order < eta) {
    throw SynthesisError("design_deadbeat_gain: requested order " +
                         std::to_string(order) +
                         " is below the controllability index " + std::to_string(eta));
  }

  // Chain-major basis T = [b_1, At b_1, ..., b_2, ...]; the row of T^-1
  // aligned with the end of chain i is the functional q_i with
  // q_i At^t b_j = 0 for t <= mu_i - 2. The deadbeat condition reduces to
  //   q_i At^mu_i + (q_i At^(mu_i-1) Bt) K = 0   per active chain i.
  Matrix t(nx, nx);
  {
    long col = 0;
    for (long i = 0; i < nu; ++i) {
      for (const Vector& v : chains[i]) t.col(col++) = v;
    }
  }
  Eigen::FullPivLU<Matrix> lu(t);
  if (!lu.isInvertible()) {
    throw SynthesisError("design_deadbeat_gain: chain basis is singular");
  }
  const Matrix t_inv = lu.inverse();

  std::vector<long> active;
  for (long i = 0; i < nu; ++i) {
    if (mu[i] > 0) active.push_back(i);
  }
  const long r = static_cast<long>(active.size());
  Matrix lhs(r, nu);  // rows q_i At^(mu_i - 1) Bt
  Matrix rhs(r, nx);  // rows q_i At^mu_i
  {
    long row = 0;
    long offset = 0;
    for (long i = 0; i < nu; ++i) {
      if (mu[i] == 0) continue;
      offset += mu[i];
      const Eigen::RowVectorXd q = t_inv.row(offset - 1);
      const Eigen::RowVectorXd q_end = q * matrix_power(at, mu[i] - 1);
      lhs.row(row) = q_end * bt;
      rhs.row(row) = q_end * at;
      ++row;
    }
  }

  // K rows for inputs without a chain stay zero; their columns of Bt are
  // linear combinations of active ones and must not re-enter the loop.
  Matrix k = Matrix::Zero(nu, nx);
  const Matrix sol = lhs.fullPivLu().solve(-rhs);
  if (!sol.allFinite()) {
    throw SynthesisError("design_deadbeat_gain: chain system is ill-conditioned");
  }
  k = sol;

  const double residual = verify_deadbeat_gain(at, bt, k, order);
  const double threshold =
      kDeadbeatResidualTol * std::max(1.0, std::pow(inf_norm(at), order));
  if (residual > threshold) {
    throw SynthesisError("design_deadbeat_gain: residual " + std::to_string(residual) +
                         " exceeds " + std::to_string(threshold) +
                         " (ill-conditioned chain basis)");
  }
  return k;
}

Matrix observer_gain_from_mbar(const Matrix& at, long eta, const Matrix& mbar) {
  const Matrix a_eta = matrix_power(at, eta);
  Eigen::FullPivLU<Matrix> lu(a_eta);
  if (!lu.isInvertible()) {
    throw ValidationError(
        "observer_gain_from_mbar: At^eta is singular, M cannot be recovered from Mbar");
  }
  return lu.solve(mbar);
}

DeadbeatArtifacts make_deadbeat_artifacts(const SystemModel& model, const GainSet& gains,
                                          double fit_margin) {
  if (!gains.M) throw ValidationError("deadbeat artifacts: gains carry no M");
  const long nx = model.nx();
  const Matrix f = model.At + model.Bt * gains.K;
  const Matrix bk = model.Bt * gains.K;

  Matrix phi_a = Matrix::Zero(nx, nx);
  Matrix f_pow = Matrix::Identity(nx, nx);
  for (long i = 0; i < model.eta; ++i) {
    phi_a -= f_pow * bk * matrix_power(model.At, model.eta - i - 1);
    f_pow = f_pow * f;
  }
  // Telescoped route: sum_i F^i (F - At) At^(eta-i-1) = F^eta - At^eta,
  // so phi_a must equal At^eta - (At + Bt K)^eta.
  const Matrix phi_check = matrix_power(model.At, model.eta) - f_pow;
  const double scale = std::max(1.0, inf_norm(phi_a));
  if (inf_norm(phi_a - phi_check) > 1e-9 * scale) {
    throw ValidationError("deadbeat artifacts: the two phi_a routes disagree");
  }

  DeadbeatArtifacts arts;
  arts.phi_a = phi_a;
  arts.abar_cl = matrix_power(model.At, model.eta) *
                 (Matrix::Identity(nx, nx) - *gains.M * model.C);
  arts.cert_bar = fit_decay(arts.abar_cl, fit_margin);
  arts.alpha_bar = arts.cert_bar.Gamma *
                   inf_norm(matrix_power(model.At, model.eta) * *gains.M) *
                   model.norm_C / (1.0 - arts.cert_bar.gamma);
  return arts;
}

Vector db_step(const SystemModel& model, const GainSet& gains, const Vector& est,
               const Vector& q_held, DbPhase phase, bool attacked) {
  if (phase == DbPhase::substep) {
    return model.At * est + model.Bt * (gains.K * est);
  }
  Vector next = est;
  if (!attacked) {
    next += *gains.M * (q_held - model.C * est);
  }
  return next;
}

DeadbeatTriggerTables DeadbeatTriggerTables::build(const SystemModel& model,
                                                   const GainSet& gains,
                                                   const DeadbeatArtifacts& arts,
                                                   long levels, long tau_max) {
  if (!gains.M) throw ValidationError("trigger tables: deadbeat gains require M");
  const long nx = model.nx();
  const long ny = model.ny();
  const Matrix a = matrix_power(model.At, model.eta);  // coarse step matrix
  const Matrix c_phi = model.C * arts.phi_a;
  const Matrix& m = *gains.M;
  const double inv_n = 1.0 / static_cast<double>(levels);

  DeadbeatTriggerTables t;
  t.tau_max_ = tau_max;
  t.coef_e_.assign(tau_max + 1, 0.0);
  t.mq_.assign(tau_max + 1, Matrix::Identity(ny, ny));

  Matrix a_pow = Matrix::Identity(nx, nx);  // A^(tau-2) along the loop
  Matrix m_sum = Matrix::Zero(nx, ny);      // sum_{i<=tau-2} A^i M
  for (long tau = 1; tau <= tau_max; ++tau) {
    if (tau == 1) {
      t.coef_e_[tau] =
          inf_norm(c_phi * (Matrix::Identity(nx, nx) - m * model.C)) / model.norm_C +
          inf_norm(c_phi * m) * inv_n;
      t.mq_[tau] = Matrix::Identity(ny, ny);
      continue;
    }
    if (tau > 2) {
      a_pow = a_pow * a;  // A^(tau-2)
    }
    m_sum += a_pow * m;  // now sum_{i=0}^{tau-2} A^i M
    t.coef_e_[tau] = inf_norm(c_phi * a_pow * arts.abar_cl) / model.norm_C +
                     inf_norm(c_phi * a_pow * a * m) * inv_n;
    t.mq_[tau] = c_phi * m_sum + Matrix::Identity(ny, ny);
  }
  return t;
}

double DeadbeatTriggerTables::eval(const Vector& q, double e, long tau) const {
  if (tau < 1 || tau > tau_max_) {
    throw DomainError("deadbeat trigger: tau outside [1, tau_max]");
  }
  return coef_e_[tau] * e + inf_norm(mq_[tau] * q);
}

long db_next_sample_gap(const DeadbeatTriggerTables& tables, const TriggerConfig& cfg,
                        const Vector& q, double e) {
  const double threshold = cfg.sigma * e;
  for (long tau = 1; tau < cfg.tau_max; ++tau) {
    if (tables.eval(q, e, tau) > threshold) return tau;
  }
  return cfg.tau_max;
}

EncoderRange db_e_update(const TriggerConfig& cfg, const DeadbeatArtifacts& arts,
                         EncoderRange range, long gap, double norm_c) {
  if (gap < 1) throw DomainError("db_e_update: gap must be at least 1");
  range.Ex *= e_contraction_factor(arts.cert_bar.gamma, cfg.alpha * cfg.sigma, gap);
  range.E = norm_c * range.Ex;
  return range;
}

}  // namespace stqc
