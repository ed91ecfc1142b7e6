#pragma once

// T-curvature of g = e^{2w} g_round on S^3 in boundary form,
//   T = e^{-3w} (P^3 w + 2),
// the normalization alpha, the energies E and E_f, and residual diagnostics.
// Nonlinear terms are evaluated on an oversampled grid (design degree
// oversample * K).

#include "s3flow/spectral.hpp"

#include <utility>

namespace s3flow {

inline constexpr int kDefaultOversample = 2;
/// |3w| beyond this raises OverflowError.
inline constexpr double kExpClamp = 700.0;

/// Grid used for nonlinear terms of a band-limit-K field.
GridPtr nonlinear_grid(int band_limit, int oversample = kDefaultOversample);

/// e^{3w} on the grid nodes.
GridField exp3(const SpectralField& w, const GridPtr& grid);

/// Grid values of a prescribed function; PositivityError if any value is <= 0.
GridField prescribed_values(const SpectralField& f, const GridPtr& grid);

GridField t_curvature(const SpectralField& w, const GridPtr& grid);
GridField t_curvature(const SpectralField& w, int oversample = kDefaultOversample);

/// alpha = 4 pi^2 / int f e^{3w}.
double compute_alpha(const SpectralField& w, const SpectralField& f,
                     int oversample = kDefaultOversample);

/// E = 2 <w, P^3 w> + 8 int w.
double energy_E(const SpectralField& w);

/// E_f = E - (16 pi^2 / 3) log(mean of f e^{3w}).
double energy_Ef(const SpectralField& w, const SpectralField& f,
                 int oversample = kDefaultOversample);

/// Everything the flow needs at one state. `f` holds grid values of the
/// prescribed function (already composed with any frame map).
struct CurvatureBundle {
  SpectralField w;
  GridField f;
  GridField e3w;
  GridField T;
  double alpha = 0.0;
  double volume = 0.0;
  double total_T = 0.0;
  double f_integral = 0.0;  // int f e^{3w}

  double energy_E() const;
  double energy_Ef() const;
  /// alpha f - T on the grid.
  GridField residual() const;
};

CurvatureBundle curvature_bundle(const SpectralField& w, const GridField& f_values);
CurvatureBundle curvature_bundle(const SpectralField& w, const SpectralField& f,
                                 int oversample = kDefaultOversample);

/// F2 = int (alpha f - T)^2 e^{3w},  G2 = <r, P^3 r> with r the residual expanded
/// up to the grid's design degree.
std::pair<double, double> diagnostics_F2_G2(const CurvatureBundle& b);
std::pair<double, double> diagnostics_F2_G2(const SpectralField& w, const SpectralField& f,
                                            int oversample = kDefaultOversample);

/// int <grad T, grad x_i> e^{3w} for i = 1..4. T is expanded to degree
/// 2K - 1 and the gradient pairing with the coordinates is evaluated exactly,
/// so the result tends to zero as the grid is refined.
Vec4 kazdan_warner_residual(const SpectralField& w, int oversample = kDefaultOversample);

/// (3 / 16 pi^2) E - log(mean of e^{3w}); non-negative for every w.
double ache_chang_gap(const SpectralField& w, int oversample = kDefaultOversample);

}  // namespace s3flow
