#include <doctest.h>

#include "s3flow/errors.hpp"
#include "s3flow/spectral.hpp"

#include <Eigen/QR>

#include <cmath>
#include <random>

using namespace s3flow;

namespace {

Vec4 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec4 x(n(rng), n(rng), n(rng), n(rng));
  return x.normalized();
}

// Finite-difference <grad a, grad b> at x using an orthonormal tangent frame.
double fd_gradient_inner(const SpectralField& a, const SpectralField& b, const Vec4& x) {
  Eigen::Matrix4d M = Eigen::Matrix4d::Identity();
  M.col(0) = x;
  Eigen::HouseholderQR<Eigen::Matrix4d> qr(M);
  Eigen::Matrix4d Q = qr.householderQ();
  const double h = 1e-5;
  double s = 0.0;
  for (int j = 1; j < 4; ++j) {
    const Vec4 t = Q.col(j);
    const Vec4 xp = (std::cos(h) * x + std::sin(h) * t).normalized();
    const Vec4 xm = (std::cos(h) * x - std::sin(h) * t).normalized();
    const double da = (evaluate_at(a, xp) - evaluate_at(a, xm)) / (2 * h);
    const double db = (evaluate_at(b, xp) - evaluate_at(b, xm)) / (2 * h);
    s += da * db;
  }
  return s;
}

}  // namespace

TEST_CASE("index bookkeeping") {
  CHECK(harmonic_count(0) == 1);
  CHECK(harmonic_count(1) == 5);
  CHECK(harmonic_count(16) == 17 * 18 * 35 / 6);
  for (std::size_t i = 0; i < harmonic_count(6); ++i) {
    const HarmonicIndex h = harmonic_index(i);
    CHECK(flat_index(h) == i);
    CHECK(flat_index(h.k, h.l(), h.m()) == i);
    CHECK(h.l() <= h.k);
    CHECK(std::abs(h.m()) <= h.l());
  }
  CHECK(HarmonicIndex{1, 1}.l() == 0);
  CHECK(HarmonicIndex{1, 4}.m() == 1);
}

TEST_CASE("quadrature weights and moments") {
  const GridPtr g = build_grid(8);
  CHECK(g->size() == std::size_t(9 * 9 * 17));
  double total = 0.0, x4sq = 0.0, x1x2 = 0.0, x3four = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    const Vec4& x = g->point(i);
    CHECK(x.norm() == doctest::Approx(1.0).epsilon(1e-14));
    total += g->weight(i);
    x4sq += g->weight(i) * x[3] * x[3];
    x1x2 += g->weight(i) * x[0] * x[1];
    x3four += g->weight(i) * std::pow(x[2], 4);
  }
  CHECK(total == doctest::Approx(kVolS3).epsilon(1e-14));
  CHECK(x4sq == doctest::Approx(kPi * kPi / 2).epsilon(1e-14));
  CHECK(std::abs(x1x2) < 1e-14);
  // average of x_i^4 on S^3 is 3 / (4 * 6) = 1/8
  CHECK(x3four == doctest::Approx(kVolS3 / 8).epsilon(1e-13));
  CHECK(build_grid(8) == g);
}

TEST_CASE("degree-1 block is the coordinates") {
  const double c = std::sqrt(2.0) / kPi;
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec4 x = random_unit(rng);
    CHECK(evaluate_at(SpectralField::unit({1, 1}), x) == doctest::Approx(c * x[3]));
    CHECK(evaluate_at(SpectralField::unit({1, 2}), x) == doctest::Approx(c * x[1]));
    CHECK(evaluate_at(SpectralField::unit({1, 3}), x) == doctest::Approx(c * x[2]));
    CHECK(evaluate_at(SpectralField::unit({1, 4}), x) == doctest::Approx(c * x[0]));
    for (int i = 0; i < 4; ++i)
      CHECK(evaluate_at(SpectralField::coordinate(i), x) == doctest::Approx(x[i]));
  }
  CHECK(evaluate_at(SpectralField::unit({0, 1}), Vec4(0, 0, 0, 1)) ==
        doctest::Approx(1.0 / std::sqrt(kVolS3)));
  CHECK(SpectralField::constant(2.0, 3).mean() == doctest::Approx(2.0));
}

TEST_CASE("basis is orthonormal under the quadrature") {
  const int K = 6;
  const GridPtr g = build_grid(K);
  for (std::size_t a = 0; a < harmonic_count(K); ++a) {
    const GridField ya = synthesize(SpectralField::unit(harmonic_index(a), K), g);
    const SpectralField proj = analyze(ya, K);
    for (std::size_t b = 0; b < harmonic_count(K); ++b)
      CHECK(std::abs(proj[b] - (a == b ? 1.0 : 0.0)) < 1e-12);
  }
}

TEST_CASE("degree-2 harmonics match an independent polynomial oracle") {
  // Traceless quadratics restrict to pure degree-2 harmonics.
  const GridPtr g = build_grid(4);
  GridField v(g);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const Vec4& x = g->point(i);
    v.values[i] = x[3] * x[3] - 0.25 + 3.0 * x[0] * x[2];
  }
  const SpectralField u = analyze(v, 4);
  double deg2 = 0.0, other = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) (harmonic_index(i).k == 2 ? deg2 : other) += u[i] * u[i];
  CHECK(other < 1e-26);
  CHECK(deg2 > 0.1);
  // the laplacian multiplier then acts as -8
  const SpectralField lu = laplacian(u);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    const Vec4 x = random_unit(rng);
    CHECK(evaluate_at(lu, x) == doctest::Approx(-8.0 * evaluate_at(u, x)).epsilon(1e-12));
    CHECK(evaluate_at(u, x) ==
          doctest::Approx(x[3] * x[3] - 0.25 + 3.0 * x[0] * x[2]).epsilon(1e-12));
  }
}

TEST_CASE("round trip and Parseval") {
  for (int K : {0, 1, 5, 12}) {
    const SpectralField u = random_field(K, 1.0, 0.8, 17 + K);
    CHECK(std::abs(u[0]) == 0.0);
    const GridField v = synthesize(u, build_grid(K));
    const SpectralField back = analyze(v, K);
    CHECK((back - u).max_abs() < 1e-12);
    GridField sq = v;
    for (double& s : sq.values) s *= s;
    CHECK(sq.integrate() == doctest::Approx(u.l2_norm_sq()).epsilon(1e-12));
    // oversampled grid gives the same coefficients
    CHECK((analyze(synthesize(u, build_grid(2 * K + 1)), K) - u).max_abs() < 1e-12);
  }
}

TEST_CASE("synthesis agrees with pointwise evaluation") {
  const SpectralField u = random_field(7, 1.0, 0.9, 99);
  const GridPtr g = build_grid(9);
  const GridField v = synthesize(u, g);
  const std::vector<double> direct = evaluate_at(u, g->points());
  for (std::size_t i = 0; i < g->size(); i += 37) CHECK(v.values[i] == doctest::Approx(direct[i]));
}

TEST_CASE("resolution and domain errors") {
  CHECK_THROWS_AS(synthesize(SpectralField(5), build_grid(4)), ResolutionError);
  CHECK_THROWS_AS(analyze(GridField(build_grid(4)), 5), ResolutionError);
  CHECK_THROWS_AS(evaluate_at(SpectralField(2), Vec4(1, 1, 0, 0)), DomainError);
  CHECK_NOTHROW(evaluate_at(SpectralField(2), Vec4(0, 1, 0, 0)));
}

TEST_CASE("gradient inner product") {
  // sum_i |grad x_i|^2 = 3 on S^3
  SpectralField total(2);
  for (int i = 0; i < 4; ++i) {
    const SpectralField xi = SpectralField::coordinate(i);
    total += gradient_inner(xi, xi);
  }
  CHECK(total.mean() == doctest::Approx(3.0).epsilon(1e-13));
  for (std::size_t i = 1; i < total.size(); ++i) CHECK(std::abs(total[i]) < 1e-13);

  // integral of |grad Y|^2 equals the eigenvalue
  const SpectralField y = SpectralField::unit({3, 7});
  CHECK(gradient_inner(y, y).mean() * kVolS3 == doctest::Approx(15.0).epsilon(1e-12));

  // finite-difference oracle at random points
  const SpectralField a = random_field(4, 1.0, 0.8, 1), b = random_field(3, 1.0, 0.8, 2);
  const SpectralField ab = gradient_inner(a, b);
  CHECK(ab.band_limit() == 7);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 6; ++t) {
    const Vec4 x = random_unit(rng);
    CHECK(evaluate_at(ab, x) == doctest::Approx(fd_gradient_inner(a, b, x)).epsilon(1e-7));
  }
  CHECK(gradient_inner(a, b, 3).band_limit() == 3);
}

TEST_CASE("rotation") {
  const SpectralField u = random_field(5, 1.0, 0.8, 4);
  Eigen::Matrix4d R = Eigen::Matrix4d::Identity();
  const double a = 0.7;
  R(0, 0) = std::cos(a), R(0, 3) = -std::sin(a), R(3, 0) = std::sin(a), R(3, 3) = std::cos(a);
  const SpectralField ur = rotate(u, R);
  std::mt19937_64 rng(8);
  for (int t = 0; t < 5; ++t) {
    const Vec4 x = random_unit(rng);
    CHECK(evaluate_at(ur, R * x) == doctest::Approx(evaluate_at(u, x)).epsilon(1e-12));
  }
  // rotations preserve the per-degree energy
  CHECK(ur.l2_norm_sq() == doctest::Approx(u.l2_norm_sq()).epsilon(1e-12));
}
