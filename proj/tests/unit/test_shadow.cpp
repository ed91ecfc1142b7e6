#include <doctest.h>

#include "s3flow/errors.hpp"
#include "s3flow/mobius.hpp"
#include "s3flow/shadow.hpp"

#include <Eigen/QR>

#include <cmath>
#include <random>

using namespace s3flow;

namespace {

SpectralField axial(double delta) {
  return SpectralField::constant(2.0, 1) + delta * SpectralField::coordinate(3);
}

const Vec4 kNorth(0, 0, 0, 1);

}  // namespace

TEST_CASE("rhs for constant and axial f") {
  ShadowState s{Vec4(0.5, 0.5, 0.5, 0.5), 0.3};
  const ShadowDerivative d0 = shadow_rhs(s, SpectralField::constant(2.0));
  CHECK(d0.dp.norm() < 1e-14);
  CHECK(std::abs(d0.deps) < 1e-14);
  CHECK(d0.ds == doctest::Approx(0.09));

  const double delta = 0.3;
  s.p = kNorth;
  const ShadowDerivative dn = shadow_rhs(s, axial(delta));
  const double alpha = 2.0 / (2.0 + delta);
  CHECK(dn.dp.norm() < 1e-14);
  CHECK(dn.deps == doctest::Approx(16.0 * alpha * std::pow(0.3, 3) * (-3.0 * delta)));
  s.p = -kNorth;
  const ShadowDerivative ds = shadow_rhs(s, axial(delta));
  CHECK(ds.deps == doctest::Approx(16.0 * (2.0 / (2.0 - delta)) * std::pow(0.3, 3) * 3.0 * delta));
  s.eps = 0.9;
  CHECK(shadow_rhs(s, axial(delta)).ds == 0.5);
}

TEST_CASE("spectral gradient matches finite differences") {
  const SpectralField f = SpectralField::constant(2.0, 4) + random_field(4, 0.2, 0.7, 5);
  const ShadowModel m(f);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 5; ++t) {
    const Vec4 p = Vec4(n(rng), n(rng), n(rng), n(rng)).normalized();
    const Eigen::Matrix4d Q = adapted_frame(p);
    const Vec4 g = m.gradient(p);
    CHECK(std::abs(g.dot(p)) < 1e-12);
    const double h = 1e-5;
    for (int j = 0; j < 3; ++j) {
      const Vec4 e = Q.col(j);
      const double fd = (m.value((std::cos(h) * p + std::sin(h) * e).normalized()) -
                         m.value((std::cos(h) * p - std::sin(h) * e).normalized())) /
                        (2 * h);
      CHECK(g.dot(e) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("trajectories") {
  const ShadowTrajectory c = integrate_shadow({Vec4(0.5, 0.5, 0.5, 0.5), 0.2},
                                              SpectralField::constant(2.0), 5.0, 0.1);
  CHECK_FALSE(c.truncated);
  CHECK(c.states.size() == 51);
  CHECK((c.states.back().p - c.states.front().p).norm() == 0.0);
  CHECK(c.states.back().eps == 0.2);
  CHECK(c.states.back().s == doctest::Approx(5.0 * 0.04));

  const SpectralField f = axial(0.3);
  const ShadowModel m(f);
  const Vec4 p0 = Vec4(0.7, 0.3, -0.2, 0.5).normalized();
  const ShadowTrajectory tr = integrate_shadow({p0, 0.2}, f, 400.0, 0.05);
  CHECK_FALSE(tr.truncated);
  double angle = geodesic_distance(p0, kNorth);
  double fp = m.value(p0);
  for (const ShadowState& s : tr.states) {
    CHECK(s.p.norm() == doctest::Approx(1.0).epsilon(1e-14));
    const double v = m.value(s.p);
    CHECK(v >= fp - 1e-12);
    CHECK(geodesic_distance(s.p, kNorth) <= angle + 1e-12);
    fp = v;
    angle = geodesic_distance(s.p, kNorth);
  }
  CHECK(angle < 0.5 * geodesic_distance(p0, kNorth));
  CHECK(tr.states.back().eps < 0.2);
}

TEST_CASE("fourth-order convergence") {
  const SpectralField f = axial(0.3) + 0.1 * SpectralField::coordinate(1);
  const ShadowState init{Vec4(0.7, 0.3, -0.2, 0.5).normalized(), 0.4};
  auto end = [&](double dt) { return integrate_shadow(init, f, 2.0, dt).states.back(); };
  const ShadowState a = end(0.2), b = end(0.1), c = end(0.05);
  const double e1 = (a.p - b.p).norm() + std::abs(a.eps - b.eps);
  const double e2 = (b.p - c.p).norm() + std::abs(b.eps - c.eps);
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.2));
}

TEST_CASE("rotation equivariance") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Matrix4d A;
  for (int i = 0; i < 16; ++i) A.data()[i] = n(rng);
  Eigen::Matrix4d R = Eigen::HouseholderQR<Eigen::Matrix4d>(A).householderQ();
  const SpectralField f = SpectralField::constant(2.0, 3) + random_field(3, 0.15, 0.7, 8);
  const ShadowState init{Vec4(0.1, 0.8, -0.3, 0.5).normalized(), 0.3};
  const ShadowState rinit{R * init.p, 0.3};
  const ShadowTrajectory a = integrate_shadow(init, f, 3.0, 0.05);
  const ShadowTrajectory b = integrate_shadow(rinit, rotate(f, R), 3.0, 0.05);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    CHECK((R * a.states[i].p - b.states[i].p).norm() < 1e-10);
    CHECK(std::abs(a.states[i].eps - b.states[i].eps) < 1e-10);
  }
}

TEST_CASE("truncation when eps leaves (0, 1)") {
  // near the minimum of f the scale grows
  const ShadowTrajectory t = integrate_shadow({-kNorth, 0.9}, axial(0.3), 50.0, 0.05);
  CHECK(t.truncated);
  CHECK(t.states.back().eps < 1.0);
  CHECK_THROWS_AS(integrate_shadow({kNorth, 0.5}, axial(0.3), 1.0, 0.0), ParameterError);
}

TEST_CASE("comparison report") {
  std::vector<DiagnosticsRecord> flow;
  for (int i = 0; i <= 10; ++i) {
    DiagnosticsRecord r;
    r.t = 0.1 * i;
    r.p = Vec4(0, 1, 0, 0);
    r.eps = 0.25;
    flow.push_back(r);
  }
  const auto start = shadow_start(flow);
  REQUIRE(start.has_value());
  const ShadowTrajectory sh = integrate_shadow(*start, SpectralField::constant(2.0), 1.0, 0.1);
  const ComparisonReport rep = compare_with_full_flow(flow, sh);
  CHECK_FALSE(rep.empty);
  CHECK(rep.samples == 11);
  CHECK(rep.max_geodesic < 1e-15);
  CHECK(rep.max_rel_eps < 1e-15);

  for (auto& r : flow) r.eps = 0.5;
  CHECK(compare_with_full_flow(flow, sh).empty);
  CHECK_FALSE(shadow_start(flow).has_value());
}

TEST_CASE("geodesic distance") {
  CHECK(geodesic_distance(kNorth, kNorth) == 0.0);
  CHECK(geodesic_distance(kNorth, -kNorth) == doctest::Approx(kPi));
  CHECK(geodesic_distance(kNorth, Vec4(1, 0, 0, 0)) == doctest::Approx(kPi / 2));
}
