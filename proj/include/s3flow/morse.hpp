#pragma once

#include "s3flow/spectral.hpp"

#include <json.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace s3flow {

struct MorseDatum {
  int morse_index = 0;  // number of negative Hessian eigenvalues, 0..3
  bool laplacian_negative = false;
  double value = 1.0;
  std::optional<Vec4> location;
  std::optional<double> laplacian;

  void validate() const;
};

using MorseCounts = std::array<int, 4>;
using MorseWitness = std::array<int, 4>;

struct SystemSolution {
  bool feasible = false;
  std::optional<MorseWitness> witness;
};

struct MorseReport {
  MorseCounts m{};
  bool feasible = false;
  std::optional<MorseWitness> witness;
  int degree_sum = 0;
  bool theorem_existence = false;
  bool corollary_existence = false;
  std::vector<double> beta;  // -(16 pi^2 / 3) log f at each counted point
  std::vector<std::string> warnings;
};

/// m_i = number of points with negative Laplacian and index 3 - i.
MorseCounts compute_counts(const std::vector<MorseDatum>& data);

/// Triangular elimination of m0 = 1 + k0, m_i = k_{i-1} + k_i, k3 = 0.
SystemSolution solve_system(const MorseCounts& m);

/// Sum of (-1)^index over points with negative Laplacian.
int degree_sum(const std::vector<MorseDatum>& data);
/// The same sum from counts alone.
int degree_sum(const MorseCounts& m);

/// Coefficientwise check of sum t^i m_i = 1 + (1 + t) sum t^i k_i.
bool morse_polynomial_check(const MorseCounts& m, const MorseWitness& k);

double beta_value(double f_value);

MorseReport morse_report(const std::vector<MorseDatum>& data);

struct MorseExtractOptions {
  double condition_limit = 1e6;
  double laplacian_rel = 1e-8;
  double fd_step = 1e-4;
  int max_newton = 40;
  double gradient_tol = 1e-11;
  double dedupe_distance = 1e-6;
  double equal_value_rel = 1e-10;
};

/// Critical points of f with Morse index and Laplacian sign, sorted by value
/// (descending). Throws HypothesisViolation when a critical point is degenerate.
std::vector<MorseDatum> extract_morse_data(const SpectralField& f,
                                           const MorseExtractOptions& opt = {});

/// Warnings for critical values that coincide (relative tolerance).
std::vector<std::string> equal_value_warnings(const std::vector<MorseDatum>& data,
                                              double rel = 1e-10);

std::vector<MorseDatum> morse_data_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MorseDatum& d);
nlohmann::json to_json(const MorseReport& r);

}  // namespace s3flow
