#include <doctest.h>

#include "s3flow/beckner.hpp"
#include "s3flow/curvature.hpp"
#include "s3flow/errors.hpp"
#include "s3flow/mobius.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

#include <cmath>
#include <random>

using namespace s3flow;

namespace {

Vec4 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Vec4(n(rng), n(rng), n(rng), n(rng)).normalized();
}

Eigen::Matrix4d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Matrix4d A;
  for (int i = 0; i < 16; ++i) A.data()[i] = n(rng);
  Eigen::Matrix4d Q = Eigen::HouseholderQR<Eigen::Matrix4d>(A).householderQ();
  if (Q.determinant() < 0) Q.col(0) *= -1.0;
  return Q;
}

// Stretch factor |d phi(v)| / |v| along a tangent direction, by central differences.
double fd_stretch(const MobiusMap& phi, const Vec4& x, const Vec4& t) {
  const double h = 1e-6;
  const Vec4 a = phi((std::cos(h) * x + std::sin(h) * t).normalized());
  const Vec4 b = phi((std::cos(h) * x - std::sin(h) * t).normalized());
  return (a - b).norm() / (2 * h);
}

}  // namespace

TEST_CASE("stereographic chart") {
  const Vec4 north(0, 0, 0, 1);
  const StereographicChart c(north);
  CHECK(c.to_chart(north).norm() < 1e-15);
  CHECK((c.from_chart(Eigen::Vector3d::Zero()) - north).norm() < 1e-15);
  CHECK_THROWS_AS(c.to_chart(-north), DomainError);

  std::mt19937_64 rng(42);
  for (int t = 0; t < 20; ++t) {
    const Vec4 p = random_unit(rng);
    const StereographicChart chart(p);
    CHECK((chart.frame().transpose() * chart.frame() - Eigen::Matrix4d::Identity()).norm() < 1e-14);
    CHECK(chart.frame().determinant() == doctest::Approx(1.0));
    const Vec4 x = random_unit(rng);
    CHECK((chart.from_chart(chart.to_chart(x)) - x).norm() < 1e-12);
    CHECK(chart.to_chart(p).norm() < 1e-15);
  }
  // axis-aligned base point picks the remaining axes in index order
  const Eigen::Matrix4d Q = adapted_frame(Vec4(0, 1, 0, 0));
  CHECK(Q.col(0).isApprox(Vec4(1, 0, 0, 0)));
  CHECK(Q.col(1).isApprox(Vec4(0, 0, 1, 0)));
}

TEST_CASE("maps: group laws and conformal factor") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 10; ++t) {
    const MobiusParameter a{random_unit(rng), 0.3 + 0.6 * (t % 3) / 2.0, random_rotation(rng)};
    const MobiusParameter b{random_unit(rng), 0.5};
    const MobiusMap A = a.map(), B = b.map();
    const Vec4 x = random_unit(rng);
    CHECK(((A * B)(x) - A(B(x))).norm() < 1e-12);
    CHECK((A.inverse()(A(x)) - x).norm() < 1e-12);
    CHECK(A(x).norm() == doctest::Approx(1.0).epsilon(1e-13));

    // conformal: every tangent direction is stretched by the same factor
    Eigen::Matrix4d Q = adapted_frame(x);
    for (int j = 0; j < 3; ++j)
      CHECK(fd_stretch(A, x, Q.col(j)) == doctest::Approx(A.conformal_factor(x)).epsilon(1e-7));
    // chain rule
    CHECK((A * B).conformal_factor(x) ==
          doctest::Approx(A.conformal_factor(B(x)) * B.conformal_factor(x)).epsilon(1e-12));

    const MobiusParameter back = MobiusParameter::from_map(A);
    CHECK((back.p - a.p).norm() < 1e-10);
    CHECK(back.eps == doctest::Approx(a.eps).epsilon(1e-12));
    CHECK((back.rot - a.rot).norm() < 1e-10);
    CHECK((A.reorthogonalized().matrix() - A.matrix()).norm() < 1e-10);
  }
  const MobiusMap d = MobiusMap::dilation(Vec4(0, 0, 0, 1), 0.25);
  CHECK(d.conformal_factor(Vec4(0, 0, 0, 1)) == doctest::Approx(4.0));
  CHECK(d.conformal_factor(Vec4(0, 0, 0, -1)) == doctest::Approx(0.25));
  CHECK_THROWS_AS(MobiusMap::dilation(Vec4(0, 0, 0, 1), 1.5), ParameterError);
  CHECK_THROWS_AS(MobiusMap::dilation(Vec4(0, 0, 1, 1), 0.5), ParameterError);
  CHECK((MobiusMap::dilation(Vec4(0, 1, 0, 0), 1.0).matrix() - Lorentz::Identity()).norm() == 0.0);
}

TEST_CASE("flow_of moves points along the tangent field") {
  const Vec4 a(0.1, -0.2, 0.05, 0.3);
  const Vec4 x = Vec4(0.2, 0.4, -0.4, 0.8).normalized();
  const double h = 1e-6;
  const Vec4 v = (MobiusMap::flow_of(h * a)(x) - MobiusMap::flow_of(-h * a)(x)) / (2 * h);
  CHECK((v - (a - a.dot(x) * x)).norm() < 1e-8);
}

TEST_CASE("bubbles") {
  CHECK(bubble({Vec4(0, 0, 0, 1), 1.0}, 8).max_abs() == 0.0);
  std::mt19937_64 rng(1);
  for (double eps : {0.4, 0.6, 0.9}) {
    const Vec4 p = random_unit(rng);
    const SpectralField b = bubble({p, eps}, 24);
    CHECK(exp3(b, nonlinear_grid(24)).integrate() == doctest::Approx(kVolS3).epsilon(1e-10));
    const Vec4 S = center_of_mass(b);
    CHECK(S.normalized().dot(p) == doctest::Approx(1.0).epsilon(1e-10));
  }
  // the concentration point carries the largest conformal factor
  const SpectralField b = bubble({Vec4(0, 0, 1, 0), 0.5}, 24);
  CHECK(evaluate_at(b, Vec4(0, 0, 1, 0)) == doctest::Approx(std::log(2.0)).epsilon(1e-8));
  CHECK(evaluate_at(b, Vec4(0, 0, -1, 0)) == doctest::Approx(std::log(0.5)).epsilon(1e-8));
  CHECK_THROWS_AS(bubble({Vec4(0, 0, 1, 0), 0.0}, 4), ParameterError);
}

TEST_CASE("bubble curvature error is the truncated tail") {
  // coefficients decay like ((1 - eps) / (1 + eps))^k, so the error shrinks geometrically in K
  const Vec4 p = Vec4(0.3, -0.5, 0.7, 0.4).normalized();
  double prev = 0.0;
  for (int K : {24, 32, 40, 48}) {
    const GridField T = t_curvature(bubble({p, 0.3}, K));
    const double err = std::max(std::abs(T.max() - 2), std::abs(T.min() - 2));
    if (prev > 0) CHECK(prev / err > 30.0);
    prev = err;
  }
  CHECK(prev < 1e-6);
}

TEST_CASE("centre of mass of bubbles: frozen values") {
  // |S| for a bubble depends only on eps. Regression values from quadrature at K = 48.
  const Vec4 p(0, 0, 0, 1);
  const double s5 = center_of_mass(bubble({p, 0.5}, 32)).norm();
  const double s25 = center_of_mass(bubble({p, 0.25}, 48)).norm();
  // mean of x4 under the pushed-forward measure: closed form of a 1-d integral,
  // evaluated independently by Simpson's rule in chi.
  auto oracle = [](double eps) {
    const double c = (1 + eps * eps) / (2 * eps), s = (1 - eps * eps) / (2 * eps);
    const int n = 20000;
    double num = 0.0, den = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double chi = kPi * i / n;
      const double wgt = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
      const double l3 = std::pow(1.0 / (c - s * std::cos(chi)), 3);
      const double m = wgt * std::sin(chi) * std::sin(chi);
      num += m * l3 * std::cos(chi);
      den += m;
    }
    return num / den;
  };
  CHECK(s5 == doctest::Approx(oracle(0.5)).epsilon(1e-9));
  CHECK(s25 == doctest::Approx(oracle(0.25)).epsilon(1e-6));
  CHECK(center_of_mass(SpectralField(6)).norm() < 1e-15);
}

TEST_CASE("pullback") {
  const SpectralField w = random_field(8, 0.3, 0.6, 3);
  CHECK((pull_back(w, MobiusMap()) - w).max_abs() < 1e-12);

  // w = 0 gives the bubble factor
  const MobiusParameter prm{Vec4(0.5, -0.5, 0.5, 0.5), 0.6};
  CHECK((pull_back(SpectralField(16), prm.map()) - bubble(prm, 16)).max_abs() < 1e-12);

  // volume and energy invariance, composition
  std::mt19937_64 rng(5);
  const MobiusMap A = MobiusParameter{random_unit(rng), 0.85}.map();
  const MobiusMap B = MobiusParameter{random_unit(rng), 0.9, Eigen::Matrix4d::Identity()}.map();
  const SpectralField v = pull_back(w, A, 24);
  const double vol_w = exp3(w, build_grid(40)).integrate();
  CHECK(exp3(v, nonlinear_grid(24)).integrate() == doctest::Approx(vol_w).epsilon(1e-10));
  CHECK(energy_E(v) == doctest::Approx(energy_E(w)).epsilon(1e-6));

  const SpectralField ab = pull_back(pull_back(w, A, 24), B, 24);
  const SpectralField direct = pull_back(w, A * B, 24);
  const GridPtr g = build_grid(24);
  const GridField x = synthesize(ab, g), y = synthesize(direct, g);
  double err = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) err = std::max(err, std::abs(x.values[i] - y.values[i]));
  CHECK(err < 1e-8);

  // centre of mass of a pullback without forming it
  CHECK((center_of_mass_after(w, A, 5) - center_of_mass(v)).norm() < 1e-10);
}

TEST_CASE("normalize") {
  const CenteringResult id = normalize(SpectralField(6));
  CHECK(id.param.eps == 1.0);
  CHECK(id.iterations == 0);
  CHECK(id.residual.norm() < 1e-15);

  const Vec4 q = Vec4(0.3, -0.1, 0.5, 0.8).normalized();
  const SpectralField b = bubble({q, 0.4}, 24);
  const CenteringResult r = normalize(b);
  CHECK((r.param.p - q).norm() < 1e-8);
  CHECK(std::abs(r.param.eps - 0.4) < 1e-8);
  CHECK(r.residual.norm() <= 1e-12);
  CHECK(std::sqrt(h32_norm_sq(r.centered)) < 1e-6);

  // a centred field needs no further normalization
  const CenteringResult again = normalize(r.centered);
  CHECK(std::abs(again.param.eps - 1.0) < 1e-8);

  // perturbed bubble
  const SpectralField pert = b + 0.01 * random_field(24, 1.0, 0.7, 12);
  const CenteringResult rp = normalize(pert);
  CHECK(rp.residual.norm() <= 1e-12);
  CHECK(std::abs(rp.param.eps - 0.4) < 0.05);
  CHECK(center_of_mass(rp.centered).norm() < 1e-6);
}
