#include <cmath>

#include <doctest.h>

#include "stqc/certificates.hpp"
#include "stqc/errors.hpp"
#include "support/random_scenarios.hpp"

using namespace stqc;

namespace {

Matrix random_schur(test::Rng& rng, long n, double target_norm) {
  Matrix m = rng.matrix(n, n, -1.0, 1.0);
  const double norm = inf_norm(m);
  return norm == 0.0 ? Matrix::Zero(n, n) : Matrix(m * (target_norm / norm));
}

}  // namespace

TEST_SUITE_BEGIN("certificates");

TEST_CASE("fit_decay on diagonal and nilpotent matrices") {
  const DecayCertificate diag = fit_decay(0.5 * Matrix::Identity(2, 2), 0.5);
  CHECK(diag.gamma == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(diag.Gamma == doctest::Approx(1.0).epsilon(1e-8));

  Matrix nil(2, 2);
  nil << 0.0, 1.0, 0.0, 0.0;
  // rho = 0, so margin 0.5 pins gamma at 0.5; powers are 1, 1, 0 and the
  // ratios 1, 2, 0 peak at 2
  const DecayCertificate c = fit_decay(nil, 0.5);
  CHECK(c.gamma == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(c.Gamma == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("fit_decay rejects non-Schur input") {
  CHECK_THROWS_AS((void)fit_decay(Matrix::Identity(2, 2), 0.5), NotSchurError);
}

TEST_CASE("decay certificates dominate every power up to 500") {
  test::Rng rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const long n = rng.integer(2, 5);
    const Matrix g = random_schur(rng, n, rng.uniform(0.3, 0.95));
    const DecayCertificate cert = fit_decay(g, rng.uniform(0.2, 0.8));
    Matrix p = Matrix::Identity(n, n);
    double gpow = 1.0;
    for (long s = 0; s <= 500; ++s) {
      CHECK(inf_norm(p) <= cert.Gamma * gpow * (1.0 + 1e-9) + 1e-300);
      p = p * g;
      gpow *= cert.gamma;
    }
  }
}

TEST_CASE("fit_growth") {
  const GrowthCertificate two = fit_growth(2.0 * Matrix::Identity(2, 2), 1.0);
  CHECK(two.omega_a == doctest::Approx(2.0).epsilon(1e-8));

  // stable matrix: clamped just above 1
  const GrowthCertificate half = fit_growth(0.5 * Matrix::Identity(2, 2), 1.0);
  CHECK(half.omega_a > 1.0);
  CHECK(half.omega_a == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("growth certificates dominate every power up to 400") {
  test::Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const long n = rng.integer(2, 4);
    Matrix a = rng.matrix(n, n, -1.0, 1.0);
    const double big_gamma = rng.uniform(1.0, 5.0);
    const GrowthCertificate cert = fit_growth(a, big_gamma);
    // compare in log space to dodge overflow on unstable draws
    Matrix p = Matrix::Identity(n, n);
    double log_scale = 0.0;
    for (long s = 1; s <= 400; ++s) {
      p = p * a;
      const double norm = inf_norm(p);
      if (norm == 0.0) break;
      p /= norm;
      log_scale += std::log(norm);
      CHECK(std::log(big_gamma) + log_scale <=
            static_cast<double>(s) * std::log(cert.omega_a) + 1e-9);
    }
  }
}

TEST_CASE("weighted norm examples") {
  Matrix g(2, 2);
  g << 0.0, 1.0, 0.0, 0.0;
  const DecayCertificate cert = fit_decay(g, 0.5);  // gamma = 0.5
  Vector x(2);
  x << 0.0, 1.0;
  // terms: ||x|| = 1 at s = 0, 2 ||G x|| = 2 at s = 1, zero afterwards
  CHECK(weighted_norm(g, cert, x) == doctest::Approx(2.0).epsilon(1e-12));

  CHECK(weighted_norm(g, cert, Vector::Zero(2)) == 0.0);

  const Matrix zero = Matrix::Zero(2, 2);
  const DecayCertificate zcert{0.5, 1.0 + 1e-10};
  Vector y(2);
  y << 3.0, -4.0;
  CHECK(weighted_norm(zero, zcert, y) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("weighted norm is a norm with the certified sandwich") {
  test::Rng rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const long n = rng.integer(2, 5);
    const Matrix g = random_schur(rng, n, rng.uniform(0.3, 0.9));
    const DecayCertificate cert = fit_decay(g, rng.uniform(0.3, 0.7));
    const Vector x = rng.vector(n, -3.0, 3.0);
    const Vector y = rng.vector(n, -3.0, 3.0);
    const double nx_ = weighted_norm(g, cert, x);
    const double ny_ = weighted_norm(g, cert, y);

    // sandwich
    CHECK(nx_ >= inf_norm(x) * (1.0 - 1e-12));
    CHECK(nx_ <= cert.Gamma * inf_norm(x) * (1.0 + 1e-9));

    // absolute homogeneity
    const double lambda = rng.uniform(-2.0, 2.0);
    CHECK(weighted_norm(g, cert, Vector(lambda * x)) ==
          doctest::Approx(std::abs(lambda) * nx_).epsilon(1e-10));

    // triangle inequality
    CHECK(weighted_norm(g, cert, Vector(x + y)) <= (nx_ + ny_) * (1.0 + 1e-12));

    // contraction along powers
    Vector gx = x;
    double factor = 1.0;
    for (long s = 1; s <= 20; ++s) {
      gx = g * gx;
      factor *= cert.gamma;
      CHECK(weighted_norm(g, cert, gx) <= factor * nx_ * (1.0 + 1e-9) + 1e-290);
    }
  }
}

TEST_SUITE_END();
