#pragma once

// Degree-wise multiplier operators on S^3: the Beckner operator
// P^3 = (-Delta + 1)^{1/2} (-Delta) and its square root.

#include "s3flow/spectral.hpp"

#include <cstdint>
#include <vector>

namespace s3flow {

/// A real multiplier per degree, 0..max_degree().
class MultiplierSpec {
 public:
  MultiplierSpec() = default;
  explicit MultiplierSpec(std::vector<double> values) : values_(std::move(values)) {}

  int max_degree() const { return int(values_.size()) - 1; }
  double operator()(int k) const { return values_.at(std::size_t(k)); }
  double& operator[](int k) { return values_.at(std::size_t(k)); }

  /// Coefficient-wise scaling. Throws ResolutionError if u has degrees beyond the table.
  SpectralField apply(const SpectralField& u) const;
  /// sum_k m_k |u_k|^2.
  double quadratic_form(const SpectralField& u) const;

 private:
  std::vector<double> values_;
};

/// k(k+1)(k+2), in exact integer arithmetic.
std::int64_t boundary_eigenvalue_exact(int k);
double boundary_eigenvalue(int k);

MultiplierSpec p3_multiplier(int band_limit);
MultiplierSpec p3_sqrt_multiplier(int band_limit);

SpectralField apply_P3(const SpectralField& u);
SpectralField apply_P3_sqrt(const SpectralField& u);

/// <u, P^3 u> = sum_k mu_k |u_k|^2.
double p3_form(const SpectralField& u);

/// ||u||_{L^2}^2 + ||u||_{H^{3/2}}^2 (seminorm from P^3).
double h32_norm_sq(const SpectralField& u);

}  // namespace s3flow
