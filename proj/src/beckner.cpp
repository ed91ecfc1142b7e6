#include "s3flow/beckner.hpp"

#include "s3flow/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace s3flow {

namespace {

std::size_t degree_begin(int k) { return harmonic_count(k - 1); }

}  // namespace

SpectralField MultiplierSpec::apply(const SpectralField& u) const {
  if (u.band_limit() > max_degree())
    throw ResolutionError(fmt::format("multiplier table stops at degree {}, field has {}",
                                      max_degree(), u.band_limit()));
  SpectralField out = u;
  for (int k = 0; k <= u.band_limit(); ++k)
    for (std::size_t i = degree_begin(k); i < degree_begin(k + 1); ++i) out[i] *= values_[k];
  return out;
}

double MultiplierSpec::quadratic_form(const SpectralField& u) const {
  if (u.band_limit() > max_degree())
    throw ResolutionError(fmt::format("multiplier table stops at degree {}, field has {}",
                                      max_degree(), u.band_limit()));
  double s = 0.0;
  for (int k = 0; k <= u.band_limit(); ++k) {
    double block = 0.0;
    for (std::size_t i = degree_begin(k); i < degree_begin(k + 1); ++i) block += u[i] * u[i];
    s += values_[k] * block;
  }
  return s;
}

std::int64_t boundary_eigenvalue_exact(int k) {
  if (k < 0) throw ParameterError("degree must be non-negative");
  return std::int64_t(k) * (k + 1) * (k + 2);
}

double boundary_eigenvalue(int k) { return double(boundary_eigenvalue_exact(k)); }

MultiplierSpec p3_multiplier(int band_limit) {
  std::vector<double> v(band_limit + 1);
  for (int k = 0; k <= band_limit; ++k) v[k] = boundary_eigenvalue(k);
  return MultiplierSpec(std::move(v));
}

MultiplierSpec p3_sqrt_multiplier(int band_limit) {
  std::vector<double> v(band_limit + 1);
  for (int k = 0; k <= band_limit; ++k) v[k] = std::sqrt(boundary_eigenvalue(k));
  return MultiplierSpec(std::move(v));
}

SpectralField apply_P3(const SpectralField& u) { return p3_multiplier(u.band_limit()).apply(u); }

SpectralField apply_P3_sqrt(const SpectralField& u) {
  return p3_sqrt_multiplier(u.band_limit()).apply(u);
}

double p3_form(const SpectralField& u) { return p3_multiplier(u.band_limit()).quadratic_form(u); }

double h32_norm_sq(const SpectralField& u) { return u.l2_norm_sq() + p3_form(u); }

}  // namespace s3flow
