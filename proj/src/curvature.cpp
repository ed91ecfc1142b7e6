#include "s3flow/curvature.hpp"

#include "s3flow/beckner.hpp"
#include "s3flow/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace s3flow {

GridPtr nonlinear_grid(int band_limit, int oversample) {
  if (oversample < 1) throw ParameterError("oversample must be >= 1");
  return build_grid(oversample * std::max(band_limit, 1));
}

GridField exp3(const SpectralField& w, const GridPtr& grid) {
  GridField out = synthesize(w, grid);
  for (double& v : out.values) {
    const double a = 3.0 * v;
    if (!(std::abs(a) <= kExpClamp))
      throw OverflowError(fmt::format("|3w| = {:.6g} exceeds the exponential clamp", std::abs(a)));
    v = std::exp(a);
  }
  return out;
}

GridField prescribed_values(const SpectralField& f, const GridPtr& grid) {
  GridField out = synthesize(f, grid);
  const double m = out.min();
  if (!(m > 0.0))
    throw PositivityError(fmt::format("prescribed function has minimum {:.6g} on the grid", m));
  return out;
}

GridField t_curvature(const SpectralField& w, const GridPtr& grid) {
  const GridField e = exp3(w, grid);
  GridField T = synthesize(apply_P3(w), grid);
  for (std::size_t i = 0; i < T.size(); ++i) T.values[i] = (T.values[i] + 2.0) / e.values[i];
  return T;
}

GridField t_curvature(const SpectralField& w, int oversample) {
  return t_curvature(w, nonlinear_grid(w.band_limit(), oversample));
}

double energy_E(const SpectralField& w) {
  return 2.0 * p3_form(w) + 8.0 * w[0] * std::sqrt(kVolS3);
}

CurvatureBundle curvature_bundle(const SpectralField& w, const GridField& f_values) {
  CurvatureBundle b;
  const GridPtr& grid = f_values.grid;
  b.w = w;
  b.f = f_values;
  b.e3w = exp3(w, grid);
  const GridField p3w = synthesize(apply_P3(w), grid);
  b.T = GridField(grid);
  const auto wts = grid->weights();
  double vol = 0.0, tot = 0.0, fi = 0.0;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double e = b.e3w.values[i];
    b.T.values[i] = (p3w.values[i] + 2.0) / e;
    vol += wts[i] * e;
    tot += wts[i] * (p3w.values[i] + 2.0);
    fi += wts[i] * f_values.values[i] * e;
  }
  b.volume = vol;
  b.total_T = tot;
  b.f_integral = fi;
  b.alpha = 2.0 * kVolS3 / fi;
  return b;
}

CurvatureBundle curvature_bundle(const SpectralField& w, const SpectralField& f, int oversample) {
  const GridPtr grid = build_grid(
      std::max(oversample * std::max(w.band_limit(), 1), f.band_limit()));
  return curvature_bundle(w, prescribed_values(f, grid));
}

double CurvatureBundle::energy_E() const { return s3flow::energy_E(w); }

double CurvatureBundle::energy_Ef() const {
  return energy_E() - 16.0 * kPi * kPi / 3.0 * std::log(f_integral / kVolS3);
}

GridField CurvatureBundle::residual() const {
  GridField r(f.grid);
  for (std::size_t i = 0; i < r.size(); ++i) r.values[i] = alpha * f.values[i] - T.values[i];
  return r;
}

double compute_alpha(const SpectralField& w, const SpectralField& f, int oversample) {
  return curvature_bundle(w, f, oversample).alpha;
}

double energy_Ef(const SpectralField& w, const SpectralField& f, int oversample) {
  return curvature_bundle(w, f, oversample).energy_Ef();
}

std::pair<double, double> diagnostics_F2_G2(const CurvatureBundle& b) {
  const GridField r = b.residual();
  const auto wts = r.grid->weights();
  double F2 = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) F2 += wts[i] * r.values[i] * r.values[i] * b.e3w.values[i];
  const double G2 = p3_form(analyze(r, r.grid->k_design()));
  return {F2, G2};
}

std::pair<double, double> diagnostics_F2_G2(const SpectralField& w, const SpectralField& f,
                                            int oversample) {
  return diagnostics_F2_G2(curvature_bundle(w, f, oversample));
}

Vec4 kazdan_warner_residual(const SpectralField& w, int oversample) {
  const GridPtr grid = nonlinear_grid(w.band_limit(), oversample);
  const int D = grid->k_design();
  const GridField e = exp3(w, grid);
  const SpectralField TL = analyze(t_curvature(w, grid), D - 1);
  const GridField t_vals = synthesize(TL, grid);
  const GridField lap_t = synthesize(laplacian(TL), grid);
  const auto wts = grid->weights();
  Vec4 out;
  for (int c = 0; c < 4; ++c) {
    // <grad T, grad x> = (Delta(T x) + 3 T x - x Delta T) / 2, using Delta x = -3 x.
    GridField tx(grid);
    for (std::size_t i = 0; i < grid->size(); ++i) tx.values[i] = t_vals.values[i] * grid->point(i)[c];
    const GridField lap_tx = synthesize(laplacian(analyze(tx, D)), grid);
    double s = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i) {
      const double x = grid->point(i)[c];
      const double g = 0.5 * (lap_tx.values[i] + 3.0 * tx.values[i] - x * lap_t.values[i]);
      s += wts[i] * g * e.values[i];
    }
    out[c] = s;
  }
  return out;
}

double ache_chang_gap(const SpectralField& w, int oversample) {
  const GridField e = exp3(w, nonlinear_grid(w.band_limit(), oversample));
  return 3.0 / (16.0 * kPi * kPi) * energy_E(w) - std::log(e.integrate() / kVolS3);
}

}  // namespace s3flow
