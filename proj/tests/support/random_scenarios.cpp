#include "support/random_scenarios.hpp"

#include <cmath>

#include "stqc/errors.hpp"

namespace stqc::test {

Matrix reactor_a_cont() {
  Matrix a(4, 4);
  a << 1.38, -0.2077, 6.715, -5.676,  //
      -0.5814, -4.29, 0.0, 0.675,     //
      1.067, 4.273, -6.654, 5.893,    //
      0.048, 4.273, -1.343, -2.104;
  return a;
}

Matrix reactor_b_cont() {
  Matrix b(4, 2);
  b << 0.0, 0.0,  //
      5.679, 0.0,  //
      1.136, -3.146,  //
      1.136, 0.0;
  return b;
}

Matrix reactor_c() {
  Matrix c(2, 4);
  c << 1.0, 0.0, 1.0, -1.0,  //
      0.0, 1.0, 0.0, 0.0;
  return c;
}

Matrix reactor_k1() {
  Matrix k(2, 4);
  k << 1.4110, -3.5708, -0.6385, -4.1134,  //
      6.0726, -0.0486, 4.6801, -2.5005;
  return k;
}

long eigen_rank(const Matrix& m) {
  return Eigen::FullPivLU<Matrix>(m).rank();
}

namespace {

Matrix random_contraction(Rng& rng, long n, double target_norm) {
  Matrix m = rng.matrix(n, n, -1.0, 1.0);
  const double norm = inf_norm(m);
  if (norm == 0.0) return Matrix::Zero(n, n);
  return m * (target_norm / norm);
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t attempt) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (attempt + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  return x;
}

Scenario try_standard(Rng& rng, bool check_invariants) {
  const long nx = rng.integer(2, 4);
  const long ny = rng.integer(1, nx);

  Matrix c = rng.matrix(ny, nx, -1.0, 1.0);
  const Matrix g_obs = random_contraction(rng, nx, rng.uniform(0.2, 0.8));
  const Matrix l = rng.matrix(nx, ny, -1.0, 1.0) * rng.uniform(0.02, 0.15);
  const Matrix a = g_obs + l * c;
  const Matrix b = Matrix::Identity(nx, nx);
  const Matrix g_ctrl = random_contraction(rng, nx, rng.uniform(0.2, 0.8));
  const Matrix k = g_ctrl - a;  // A + B K = g_ctrl with B = I

  SystemModel model = make_model_discrete_coarse(a, b, c, 0.01);
  GainSet gains = make_standard_gains(model, k, l);

  const double margin = rng.uniform(0.3, 0.7);
  const DecayCertificate cert = fit_decay(a - l * c, margin);
  const double alpha = cert.Gamma * inf_norm(l) * model.norm_C / (1.0 - cert.gamma);

  long levels = std::max(101L, static_cast<long>(std::ceil(1.5 * alpha)));
  if (ny >= 4 && levels > 50000) throw ValidationError("retry: alpha too large");
  const double lo = 1.0 / static_cast<double>(levels);
  const double hi = 0.95 / alpha;
  if (lo >= hi) throw ValidationError("retry: empty sigma window");
  const double sigma = rng.uniform(lo, hi);
  const long tau_max = rng.integer(2, 25);
  const double e_in = std::pow(10.0, rng.uniform(-1.0, 1.0));
  Vector x0 = rng.vector(nx, -1.0, 1.0);
  const double scale = rng.uniform(0.2, 1.0) * e_in;
  const double x0n = inf_norm(x0);
  if (x0n > 0.0) x0 *= scale / x0n;
  const long horizon = rng.integer(50, 150);

  return make_scenario(std::move(model), std::move(gains), Variant::standard, sigma,
                       tau_max, levels, e_in, std::move(x0), horizon, DosModel{},
                       check_invariants, margin);
}

Scenario try_deadbeat(Rng& rng, bool check_invariants) {
  const long nx = rng.integer(2, 4);
  // chain lengths: one or two chains covering nx states
  std::vector<long> mu;
  if (nx == 2) {
    mu = {2};
  } else if (rng.unit() < 0.5) {
    mu = {nx};
  } else {
    const long first = rng.integer((nx + 1) / 2, nx - 1);
    mu = {first, nx - first};
  }
  const long eta = mu.front();
  const long nu = static_cast<long>(mu.size());

  // shifted chains plus a diagonal offset (keeps At^eta invertible)
  Matrix a_b = Matrix::Identity(nx, nx) * rng.uniform(0.3, 1.2);
  Matrix b_b = Matrix::Zero(nx, nu);
  long base = 0;
  for (long i = 0; i < nu; ++i) {
    for (long j = 0; j + 1 < mu[static_cast<std::size_t>(i)]; ++j) {
      a_b(base + j + 1, base + j) += 1.0;
    }
    b_b(base, i) = 1.0;
    base += mu[static_cast<std::size_t>(i)];
  }
  // random well-conditioned similarity and input mixing
  Matrix t = Matrix::Identity(nx, nx) + 0.4 * rng.matrix(nx, nx, -1.0, 1.0);
  Eigen::FullPivLU<Matrix> lu(t);
  if (!lu.isInvertible()) throw ValidationError("retry: similarity singular");
  Matrix v = Matrix::Identity(nu, nu) + 0.3 * rng.matrix(nu, nu, -1.0, 1.0);
  if (!Eigen::FullPivLU<Matrix>(v).isInvertible()) {
    throw ValidationError("retry: input mixing singular");
  }
  const Matrix at = t * a_b * lu.inverse();
  const Matrix bt = t * b_b * v;
  const long ny = rng.integer(1, nx);
  const Matrix c = rng.matrix(ny, nx, -1.0, 1.0);

  SystemModel model = make_model_discrete(at, bt, c, 0.01 * eta, eta);
  const Matrix k = design_deadbeat_gain(at, bt, eta);

  // observer correction gain: exact inversion when C is square, a
  // nilpotent boundary loop through the dual synthesis otherwise
  const Matrix a_eta = matrix_power(at, eta);
  Matrix mbar;
  if (ny == nx) {
    Eigen::FullPivLU<Matrix> luc(c);
    if (!luc.isInvertible()) throw ValidationError("retry: C singular");
    const Matrix g_target = random_contraction(rng, nx, rng.uniform(0.2, 0.7));
    mbar = (a_eta - g_target) * luc.inverse();
  } else {
    const long idx = controllability_index(a_eta.transpose(), c.transpose());
    const Matrix kd = design_deadbeat_gain(a_eta.transpose(), c.transpose(), idx);
    mbar = -kd.transpose();
  }
  const Matrix m = observer_gain_from_mbar(at, eta, mbar);
  GainSet gains = make_deadbeat_gains(model, k, m);

  const double margin = rng.uniform(0.3, 0.7);
  const DeadbeatArtifacts arts = make_deadbeat_artifacts(model, gains, margin);
  const double alpha = arts.alpha_bar;
  if (alpha > 2000.0) throw ValidationError("retry: alpha_bar too large");

  long levels = std::max(101L, static_cast<long>(std::ceil(1.5 * alpha)));
  if (ny >= 4 && levels > 50000) throw ValidationError("retry: level count overflow");
  const double lo = 1.0 / static_cast<double>(levels);
  const double hi = 0.95 / alpha;
  if (lo >= hi) throw ValidationError("retry: empty sigma window");
  const double sigma = rng.uniform(lo, hi);
  const long tau_max = rng.integer(2, 25);
  const double e_in = std::pow(10.0, rng.uniform(-1.0, 1.0));
  Vector x0 = rng.vector(nx, -1.0, 1.0);
  const double scale = rng.uniform(0.2, 1.0) * e_in;
  const double x0n = inf_norm(x0);
  if (x0n > 0.0) x0 *= scale / x0n;
  const long horizon = rng.integer(50, 150);

  return make_scenario(std::move(model), std::move(gains), Variant::deadbeat, sigma,
                       tau_max, levels, e_in, std::move(x0), horizon, DosModel{},
                       check_invariants, margin);
}

}  // namespace

Scenario random_standard_scenario(std::uint64_t seed, bool check_invariants) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(mix(seed, attempt));
    try {
      return try_standard(rng, check_invariants);
    } catch (const ValidationError&) {
      if (attempt > 200) throw;
    }
  }
}

Scenario random_deadbeat_scenario(std::uint64_t seed, bool check_invariants) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(mix(seed, attempt));
    try {
      return try_deadbeat(rng, check_invariants);
    } catch (const ValidationError&) {
      if (attempt > 200) throw;
    }
  }
}

}  // namespace stqc::test
