#pragma once

// Conformal maps of S^3 as elements of SO^+(4,1) acting on the light cone:
// a 5x5 matrix L sends x to Y[0:4] / Y[4] with Y = L (x, 1), and the conformal
// factor of the map at x is 1 / Y[4]. Composition is matrix product.
//
// The dilation centred at p with scale eps is the boost along p of rapidity
// s = log(1/eps):
//
//   Y = (x + (cosh s - 1) <x,p> p - sinh s p,  cosh s - sinh s <x,p>).
//
// It fixes +-p and spreads a neighbourhood of p of size ~eps over the sphere.
// Its conformal factor is the bubble profile
//
//   w_{p,eps}(x) = log(1 / Y[4]) = log(2 eps / ((1 + eps^2) - (1 - eps^2) <x,p>)),
//
// since cosh s = (1 + eps^2) / (2 eps) and sinh s = (1 - eps^2) / (2 eps).

#include "s3flow/spectral.hpp"

#include <Eigen/Core>

#include <optional>

namespace s3flow {

using Lorentz = Eigen::Matrix<double, 5, 5>;

class MobiusMap {
 public:
  MobiusMap() : L_(Lorentz::Identity()) {}
  explicit MobiusMap(const Lorentz& L) : L_(L) {}

  static MobiusMap identity() { return MobiusMap(); }
  static MobiusMap rotation(const Eigen::Matrix4d& R);
  /// Dilation centred at p with scale eps in (0, 1].
  static MobiusMap dilation(const Vec4& p, double eps);
  /// Boost generated by the tangent field a - <a,x> x for unit time.
  static MobiusMap flow_of(const Vec4& a);

  const Lorentz& matrix() const { return L_; }

  Vec4 operator()(const Vec4& x) const;
  /// Conformal factor lambda with (Phi^* g)(x) = lambda(x)^2 g(x).
  double conformal_factor(const Vec4& x) const;

  MobiusMap inverse() const;
  /// (a * b)(x) = a(b(x)).
  friend MobiusMap operator*(const MobiusMap& a, const MobiusMap& b) {
    return MobiusMap(a.L_ * b.L_);
  }

  /// Restores exact Lorentz orthogonality after many multiplications.
  MobiusMap reorthogonalized() const;

 private:
  Lorentz L_;
};

struct MobiusParameter {
  Vec4 p = Vec4(0, 0, 0, 1);
  double eps = 1.0;
  Eigen::Matrix4d rot = Eigen::Matrix4d::Identity();

  /// dilation(p, eps) o rot. ParameterError on |p| != 1 or eps outside (0, 1].
  MobiusMap map() const;
  /// Polar decomposition of a map into dilation o rotation.
  static MobiusParameter from_map(const MobiusMap& m);
};

/// Stereographic chart sending p to the origin of R^3 and -p to infinity.
/// The rotation around p is fixed by Gram-Schmidt on p followed by the
/// coordinate axes taken in order of increasing |p_i| (ties by index).
class StereographicChart {
 public:
  explicit StereographicChart(const Vec4& p);

  const Vec4& base() const { return p_; }
  const Eigen::Matrix4d& frame() const { return Q_; }

  /// DomainError at the antipode of p.
  Eigen::Vector3d to_chart(const Vec4& x) const;
  Vec4 from_chart(const Eigen::Vector3d& y) const;

 private:
  Vec4 p_;
  Eigen::Matrix4d Q_;  // orthogonal, last column p
};

/// Orthonormal frame whose last column is p (same convention as the chart).
Eigen::Matrix4d adapted_frame(const Vec4& p);

/// Conformal factor of the pullback of the round metric by dilation(p, eps),
/// expanded to band_limit on the oversampled grid.
SpectralField bubble(const MobiusParameter& param, int band_limit, int oversample = 2);

/// Conformal factor of Phi^*(e^{2w} g): w o Phi + log lambda_Phi, expanded to
/// k_out (default: the band limit of w) on the grid of design oversample * k_out.
SpectralField pull_back(const SpectralField& w, const MobiusMap& phi,
                        std::optional<int> k_out = std::nullopt, int oversample = 2);

/// Mean of x e^{3w} over S^3.
Vec4 center_of_mass(const SpectralField& w, int oversample = 2);

/// center_of_mass(pull_back(w, phi)) without forming the pullback:
/// the mean of phi^{-1}(y) e^{3 w(y)}.
Vec4 center_of_mass_after(const SpectralField& w, const MobiusMap& phi, int oversample = 2);

struct CenteringResult {
  /// w is the pullback of `centered` by param.map(); the inverse map centres w.
  MobiusParameter param;
  SpectralField centered;
  Vec4 residual = Vec4::Zero();
  int iterations = 0;
};

struct CenteringOptions {
  double tol = 1e-12;
  int max_iterations = 60;
  double fd_step = 1e-6;
  int oversample = 2;
  /// Skip forming the centred field (param and residual only).
  bool want_field = true;
};

/// Finds the dilation whose inverse centres w: damped Newton on the rapidity
/// vector s p in R^4. NonConvergenceError carries the best residual.
CenteringResult normalize(const SpectralField& w, const CenteringOptions& opts = {});

}  // namespace s3flow
