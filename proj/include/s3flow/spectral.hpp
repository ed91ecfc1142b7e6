#pragma once

// Real hyperspherical harmonics on S^3 and the quadrature used to transform
// between coefficient tables and grid values.
//
// Coordinates: x1 = sin(chi) sin(theta) cos(phi), x2 = sin(chi) sin(theta) sin(phi),
// x3 = sin(chi) cos(theta), x4 = cos(chi), with measure sin^2(chi) sin(theta).
// The basis function of degree k is
//
//   Y_{k,l,m} = R_{k,l}(chi) S_{l,m}(theta, phi),   0 <= l <= k, |m| <= l,
//
// where S_{l,m} is a real orthonormal S^2 harmonic (no Condon-Shortley phase)
// and R_{k,l} = sin^l(chi) C^{l+1}_{k-l}(cos chi), normalized against
// sin^2(chi) d(chi). Every Y has unit L^2(S^3) norm and -Delta Y = k(k+2) Y.
// Within a degree the intra-degree index is ell = l^2 + l + m + 1, so the
// degree-1 block is (x4, x2, x3, x1) up to the common factor sqrt(2)/pi.

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace s3flow {

using Vec4 = Eigen::Vector4d;

inline constexpr double kPi = std::numbers::pi;
/// vol(S^3) for the round metric.
inline constexpr double kVolS3 = 2.0 * kPi * kPi;

struct HarmonicIndex {
  int k = 0;    // degree
  int ell = 1;  // 1 .. (k+1)^2

  int l() const;
  int m() const;
  friend bool operator==(const HarmonicIndex&, const HarmonicIndex&) = default;
};

/// Number of coefficients with degree <= band_limit: sum_{k<=K} (k+1)^2.
std::size_t harmonic_count(int band_limit);
std::size_t flat_index(HarmonicIndex idx);
std::size_t flat_index(int k, int l, int m);
HarmonicIndex harmonic_index(std::size_t flat);

/// -Delta eigenvalue of degree k.
inline double laplace_eigenvalue(int k) { return double(k) * double(k + 2); }

class SpectralField {
 public:
  SpectralField() : SpectralField(0) {}
  explicit SpectralField(int band_limit);
  SpectralField(int band_limit, std::vector<double> coeffs);

  static SpectralField constant(double value, int band_limit = 0);
  /// The harmonic sqrt(2)/pi * x_i restricted to S^3 (i = 0..3 for x1..x4),
  /// scaled to the coordinate function x_i itself.
  static SpectralField coordinate(int i, int band_limit = 1);
  static SpectralField unit(HarmonicIndex idx, int band_limit = -1);

  int band_limit() const { return band_limit_; }
  std::size_t size() const { return coeffs_.size(); }
  std::span<const double> coeffs() const { return coeffs_; }
  std::span<double> coeffs() { return coeffs_; }

  double operator[](std::size_t i) const { return coeffs_[i]; }
  double& operator[](std::size_t i) { return coeffs_[i]; }
  double at(HarmonicIndex idx) const;
  double& at(HarmonicIndex idx);

  /// Zero-pad or truncate to a new band limit.
  SpectralField resized(int band_limit) const;

  /// Average over S^3 (only the degree-0 coefficient contributes).
  double mean() const;
  double l2_norm_sq() const;
  double max_abs() const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double s);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(SpectralField a, double s) { return a *= s; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
  friend bool operator==(const SpectralField&, const SpectralField&) = default;

 private:
  int band_limit_;
  std::vector<double> coeffs_;
};

/// L^2(S^3) inner product of two expansions.
double inner(const SpectralField& a, const SpectralField& b);

class QuadratureGrid;
struct GridField;
using GridPtr = std::shared_ptr<const QuadratureGrid>;

/// Tensor-product Gauss rule on S^3 together with basis tables up to k_design.
///
/// chi: Gauss rule for sin^2(chi) (second-kind Chebyshev in cos chi),
/// theta: Gauss-Legendre in cos theta, phi: uniform. Products Y_a Y_b with
/// deg a + deg b <= 2 k_design are integrated exactly.
class QuadratureGrid {
 public:
  explicit QuadratureGrid(int k_design);

  int k_design() const { return k_design_; }
  int n_chi() const { return n_chi_; }
  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  std::size_t size() const { return points_.size(); }

  std::span<const Vec4> points() const { return points_; }
  std::span<const double> weights() const { return weights_; }
  const Vec4& point(std::size_t node) const { return points_[node]; }
  double weight(std::size_t node) const { return weights_[node]; }

  std::span<const double> chi() const { return chi_; }
  std::span<const double> theta() const { return theta_; }
  std::span<const double> phi() const { return phi_; }

 private:
  friend GridField synthesize(const SpectralField&, const GridPtr&);
  friend SpectralField analyze(const GridField&, int);

  int k_design_;
  int n_chi_, n_theta_, n_phi_;
  std::vector<double> chi_, theta_, phi_;
  std::vector<double> w_chi_, w_theta_;
  double w_phi_;
  std::vector<Vec4> points_;
  std::vector<double> weights_;

  // Basis tables, all up to degree k_design.
  std::vector<double> radial_;    // [i_chi][k(k+1)/2 + l]
  std::vector<double> legendre_;  // [i_theta][l(l+1)/2 + m], m >= 0
  std::vector<double> trig_;      // [i_phi][m + k_design]
};

/// Returns the (cached, immutable) grid for the given design degree.
GridPtr build_grid(int k_design);

/// Function values on the nodes of a quadrature grid.
struct GridField {
  GridPtr grid;
  std::vector<double> values;

  GridField() = default;
  explicit GridField(GridPtr g, double fill = 0.0);
  GridField(GridPtr g, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  double integrate() const;
  double min() const;
  double max() const;
  double max_abs() const;
};

/// Pointwise sum of the expansion at every node. Throws ResolutionError when
/// the band limit exceeds the grid's design degree.
GridField synthesize(const SpectralField& u, const GridPtr& grid);

/// Weighted inner products against the basis, up to band_limit.
SpectralField analyze(const GridField& v, int band_limit);

/// Exact basis-sum evaluation at arbitrary unit vectors (DomainError otherwise).
std::vector<double> evaluate_at(const SpectralField& u, std::span<const Vec4> points);
double evaluate_at(const SpectralField& u, const Vec4& point);

/// Expansion of <grad a, grad b> via 2<grad a, grad b> = Delta(ab) - a Delta b - b Delta a.
/// The exact result has band limit K_a + K_b; pass k_out to truncate.
SpectralField gradient_inner(const SpectralField& a, const SpectralField& b,
                             std::optional<int> k_out = std::nullopt);

/// Laplace-Beltrami of the round metric.
SpectralField laplacian(const SpectralField& u);

/// Gaussian coefficients scaled by amplitude * decay^k for degrees 1..K (mean zero).
SpectralField random_field(int band_limit, double amplitude, double decay, std::uint64_t seed);

/// Rotate a field: returns u o R^T, i.e. the field whose values at R x equal u(x).
SpectralField rotate(const SpectralField& u, const Eigen::Matrix4d& rotation);

}  // namespace s3flow
