#include "s3flow/mobius.hpp"

#include "s3flow/curvature.hpp"
#include "s3flow/errors.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace s3flow {

namespace {

// Boost with rapidity vector z (|z| = s, direction p): the dilation centred at
// p with scale e^{-s}. Smooth through z = 0.
Lorentz boost_from_rapidity(const Vec4& z) {
  const double s = z.norm();
  // (cosh s - 1) / s^2 and sinh s / s, with series near zero.
  const double c1 = s < 1e-4 ? 0.5 + s * s / 24.0 : (std::cosh(s) - 1.0) / (s * s);
  const double sh = s < 1e-4 ? 1.0 + s * s / 6.0 : std::sinh(s) / s;
  Lorentz L = Lorentz::Identity();
  L.topLeftCorner<4, 4>() += c1 * z * z.transpose();
  L.topRightCorner<4, 1>() = -sh * z;
  L.bottomLeftCorner<1, 4>() = -sh * z.transpose();
  L(4, 4) = std::cosh(s);
  return L;
}

// Rapidity vector of the boost factor in L = R B (rotation after boost).
Vec4 rapidity_of(const Lorentz& L) {
  // L^{-1} e5 = B^{-1} e5 = (sinh s p, cosh s).
  const Lorentz inv = MobiusMap(L).inverse().matrix();
  const Vec4 c = inv.topRightCorner<4, 1>();
  const double n = c.norm();
  if (n == 0.0) return Vec4::Zero();
  return std::asinh(n) / n * c;
}

Eigen::Matrix4d nearest_rotation(const Eigen::Matrix4d& A) {
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

void check_unit(const Vec4& p) {
  if (!(std::abs(p.norm() - 1.0) <= 1e-12))
    throw ParameterError(fmt::format("base point has norm {:.17g}, expected 1", p.norm()));
}

}  // namespace

MobiusMap MobiusMap::rotation(const Eigen::Matrix4d& R) {
  Lorentz L = Lorentz::Identity();
  L.topLeftCorner<4, 4>() = R;
  return MobiusMap(L);
}

MobiusMap MobiusMap::dilation(const Vec4& p, double eps) {
  check_unit(p);
  if (!(eps > 0.0 && eps <= 1.0))
    throw ParameterError(fmt::format("scale {:.6g} outside (0, 1]", eps));
  return MobiusMap(boost_from_rapidity(std::log(1.0 / eps) * p));
}

MobiusMap MobiusMap::flow_of(const Vec4& a) { return MobiusMap(boost_from_rapidity(-a)); }

Vec4 MobiusMap::operator()(const Vec4& x) const {
  const Eigen::Matrix<double, 5, 1> Y = L_.leftCols<4>() * x + L_.col(4);
  return Y.head<4>() / Y[4];
}

double MobiusMap::conformal_factor(const Vec4& x) const {
  return 1.0 / (L_.row(4).head<4>().dot(x) + L_(4, 4));
}

MobiusMap MobiusMap::inverse() const {
  // eta L^T eta with eta = diag(1,1,1,1,-1).
  Lorentz inv = L_.transpose();
  inv.topRightCorner<4, 1>() *= -1.0;
  inv.bottomLeftCorner<1, 4>() *= -1.0;
  return MobiusMap(inv);
}

MobiusMap MobiusMap::reorthogonalized() const {
  const Vec4 z = rapidity_of(L_);
  const Lorentz B = boost_from_rapidity(z);
  const Lorentz R = L_ * MobiusMap(B).inverse().matrix();
  return rotation(nearest_rotation(R.topLeftCorner<4, 4>())) * MobiusMap(B);
}

MobiusMap MobiusParameter::map() const {
  return MobiusMap::rotation(rot) * MobiusMap::dilation(p, eps);
}

MobiusParameter MobiusParameter::from_map(const MobiusMap& m) {
  const Vec4 z = rapidity_of(m.matrix());
  MobiusParameter out;
  const double s = z.norm();
  if (s > 0.0) {
    out.p = z / s;
    out.eps = std::exp(-s);
  }
  const Lorentz R = m.matrix() * MobiusMap(boost_from_rapidity(z)).inverse().matrix();
  out.rot = nearest_rotation(R.topLeftCorner<4, 4>());
  return out;
}

Eigen::Matrix4d adapted_frame(const Vec4& p) {
  check_unit(p);
  std::array<int, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(p[a]) < std::abs(p[b]); });
  Eigen::Matrix4d Q;
  Q.col(3) = p;
  for (int j = 0; j < 3; ++j) {
    Vec4 t = Vec4::Unit(order[j]);
    t -= p.dot(t) * p;
    for (int i = 0; i < j; ++i) t -= Q.col(i).dot(t) * Q.col(i);
    Q.col(j) = t.normalized();
  }
  if (Q.determinant() < 0) Q.col(2) *= -1.0;
  return Q;
}

StereographicChart::StereographicChart(const Vec4& p) : p_(p), Q_(adapted_frame(p)) {}

Eigen::Vector3d StereographicChart::to_chart(const Vec4& x) const {
  const Vec4 u = Q_.transpose() * x;
  const double den = 1.0 + u[3];
  if (!(den > 1e-12)) throw DomainError("stereographic chart evaluated at the antipode");
  return u.head<3>() / den;
}

Vec4 StereographicChart::from_chart(const Eigen::Vector3d& y) const {
  const double r2 = y.squaredNorm();
  Vec4 u;
  u.head<3>() = 2.0 * y;
  u[3] = 1.0 - r2;
  return Q_ * (u / (1.0 + r2));
}

SpectralField bubble(const MobiusParameter& param, int band_limit, int oversample) {
  const MobiusMap phi = param.map();
  const GridPtr grid = nonlinear_grid(band_limit, oversample);
  GridField v(grid);
  for (std::size_t i = 0; i < grid->size(); ++i)
    v.values[i] = std::log(phi.conformal_factor(grid->point(i)));
  return analyze(v, band_limit);
}

SpectralField pull_back(const SpectralField& w, const MobiusMap& phi, std::optional<int> k_out,
                        int oversample) {
  const int K = k_out.value_or(w.band_limit());
  const GridPtr grid = nonlinear_grid(K, oversample);
  std::vector<Vec4> mapped(grid->size());
  std::vector<double> logl(grid->size());
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const Vec4& x = grid->point(i);
    mapped[i] = phi(x).normalized();
    logl[i] = std::log(phi.conformal_factor(x));
  }
  std::vector<double> vals = evaluate_at(w, mapped);
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] += logl[i];
  return analyze(GridField(grid, std::move(vals)), K);
}

namespace {

// Mean of phi(y) e^{3w(y)} given e^{3w} on a grid.
Vec4 mapped_mean(const GridField& e3w, const MobiusMap& phi) {
  const QuadratureGrid& g = *e3w.grid;
  Vec4 s = Vec4::Zero();
  for (std::size_t i = 0; i < g.size(); ++i) s += g.weight(i) * e3w.values[i] * phi(g.point(i));
  return s / kVolS3;
}

}  // namespace

Vec4 center_of_mass(const SpectralField& w, int oversample) {
  return mapped_mean(exp3(w, nonlinear_grid(w.band_limit(), oversample)), MobiusMap());
}

Vec4 center_of_mass_after(const SpectralField& w, const MobiusMap& phi, int oversample) {
  return mapped_mean(exp3(w, nonlinear_grid(w.band_limit(), oversample)), phi.inverse());
}

CenteringResult normalize(const SpectralField& w, const CenteringOptions& opts) {
  if (!(opts.tol > 0.0)) throw ParameterError("centering tolerance must be positive");
  const GridField e = exp3(w, nonlinear_grid(w.band_limit(), opts.oversample));
  // The centred field is the pullback by dilation(z)^{-1}; its centre of mass is
  // the mean of dilation(z)(y) e^{3w(y)}.
  auto residual = [&](const Vec4& z) { return mapped_mean(e, MobiusMap(boost_from_rapidity(z))); };

  const Vec4 S = residual(Vec4::Zero());
  Vec4 z = Vec4::Zero();
  Vec4 R = S;
  int it = 0;
  if (S.norm() > opts.tol) {
    const double eps0 = std::clamp(1.0 - S.norm(), 0.01, 1.0);
    z = std::log(1.0 / eps0) * S.normalized();
    R = residual(z);
    if (S.norm() < R.norm()) {
      z.setZero();
      R = S;
    }
    while (R.norm() > opts.tol) {
      if (it >= opts.max_iterations)
        throw NonConvergenceError(
            fmt::format("centering did not converge in {} iterations (residual {:.3e})", it,
                        R.norm()),
            R.norm());
      ++it;
      Eigen::Matrix4d J;
      for (int j = 0; j < 4; ++j) {
        Vec4 dz = Vec4::Zero();
        dz[j] = opts.fd_step;
        J.col(j) = (residual(z + dz) - residual(z - dz)) / (2.0 * opts.fd_step);
      }
      const Vec4 step = J.partialPivLu().solve(-R);
      if (!step.allFinite())
        throw NonConvergenceError("singular centering Jacobian", R.norm());
      double lambda = 1.0;
      bool accepted = false;
      for (int h = 0; h < 40; ++h, lambda *= 0.5) {
        const Vec4 zt = z + lambda * step;
        const Vec4 Rt = residual(zt);
        if (Rt.norm() < R.norm()) {
          z = zt;
          R = Rt;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        if (R.norm() <= 1e3 * opts.tol) break;  // rounding floor
        throw NonConvergenceError(
            fmt::format("centering stalled at residual {:.3e}", R.norm()), R.norm());
      }
    }
  }

  CenteringResult out;
  const double s = z.norm();
  if (s > 0.0) {
    out.param.p = z / s;
    out.param.eps = std::exp(-s);
  }
  if (opts.want_field) {
    const MobiusMap phi(boost_from_rapidity(z));
    out.centered = pull_back(w, phi.inverse(), std::nullopt, opts.oversample);
  }
  out.residual = R;
  out.iterations = it;
  return out;
}

}  // namespace s3flow
