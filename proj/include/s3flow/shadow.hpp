#pragma once

// Leading-order ODE for the concentration point p and scale eps:
//
//   dp/dt   = (32/3) alpha eps^2 grad f(p)      (tangential gradient)
//   deps/dt = 16 alpha eps^3 Lap f(p)
//   ds/dt   = min(1/2, eps^2)                     (rescaled clock)
//
// with alpha = 2 / f(p). The eps-equation comes from the law
// d/dt (1 - |P|^2) = 384 alpha eps^4 Lap f(p) for the ball point P together with
// 1 - |P|^2 = 12 eps^2: differentiating gives 24 eps deps/dt = 384 alpha eps^4 Lap f.

#include "s3flow/flow.hpp"
#include "s3flow/spectral.hpp"

#include <array>
#include <vector>

namespace s3flow {

struct ShadowState {
  Vec4 p = Vec4(0, 0, 0, 1);
  double eps = 0.5;
  double s = 0.0;
  double t = 0.0;
};

struct ShadowDerivative {
  Vec4 dp = Vec4::Zero();
  double deps = 0.0;
  double ds = 0.0;
};

/// f together with the expansions of its tangential gradient components and
/// Laplacian, for repeated point evaluation.
class ShadowModel {
 public:
  explicit ShadowModel(const SpectralField& f);

  double value(const Vec4& p) const;
  /// Tangential gradient of f at p, as a vector of R^4.
  Vec4 gradient(const Vec4& p) const;
  double laplacian(const Vec4& p) const;

  ShadowDerivative rhs(const ShadowState& s) const;

 private:
  SpectralField f_;
  std::array<SpectralField, 4> grad_;
  SpectralField lap_;
};

ShadowDerivative shadow_rhs(const ShadowState& state, const SpectralField& f);

struct ShadowTrajectory {
  std::vector<ShadowState> states;
  /// eps left (0, 1); the trajectory stops at the last valid state.
  bool truncated = false;
};

/// Classical RK4 in t with fixed dt; p is renormalized after every step.
ShadowTrajectory integrate_shadow(const ShadowState& init, const SpectralField& f, double horizon,
                                  double dt);

struct ComparisonReport {
  bool empty = true;
  std::size_t samples = 0;
  double window_start = 0.0;
  double window_end = 0.0;
  double max_geodesic = 0.0;  // sup of the angle between the p-tracks
  double max_rel_eps = 0.0;   // sup of |eps_shadow - eps_flow| / eps_flow
};

inline constexpr double kComparisonEps = 0.3;

/// Compares tracks on the flow records with available (p, eps) and eps <= 0.3
/// that fall inside the shadow trajectory's time span (linear interpolation in t).
ComparisonReport compare_with_full_flow(const std::vector<DiagnosticsRecord>& flow,
                                        const ShadowTrajectory& shadow,
                                        double eps_window = kComparisonEps);

/// Shadow initial state taken from the first record whose eps <= eps_window.
std::optional<ShadowState> shadow_start(const std::vector<DiagnosticsRecord>& flow,
                                        double eps_window = kComparisonEps);

/// Angle between two unit vectors.
double geodesic_distance(const Vec4& a, const Vec4& b);

}  // namespace s3flow
