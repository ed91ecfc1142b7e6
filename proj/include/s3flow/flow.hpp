#pragma once

// Semi-implicit integration of  d/dt w = alpha f - T(w)  with volume projection.
//
// The state carries a conformal frame Phi: the physical factor is
// pull_back(v, Phi), where v is the stored field. In the lab frame Phi stays
// the identity. In the co-moving frame Phi follows the concentration so that v
// stays centred (mean of x e^{3v} = 0) and smooth:
//
//   d/dt v = alpha f o Phi^{-1} - T(v) + <grad v, grad (a.x)> - a.x,
//   Phi <- flow_of(dt a)^{-1} Phi,
//
// with a = M^{-1} (3 b + gain c), M_ij = int e^{3v} (delta_ij - x_i x_j),
// b = int x (alpha f o Phi^{-1} - T) e^{3v} and c = int x e^{3v}.

#include "s3flow/curvature.hpp"
#include "s3flow/mobius.hpp"
#include "s3flow/spectral.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace s3flow {

enum class SigmaMode { MinGrid, One, MaxGrid };
enum class FrameMode { Lab, CoMoving };
enum class Outcome { Converged, Concentrating, HorizonReached };

std::string to_string(SigmaMode m);
std::string to_string(FrameMode m);
std::string to_string(Outcome o);

struct FlowConfig {
  int K = 16;
  double dt = 1e-3;
  double t_max = 10.0;
  double tol_converged = 1e-10;
  double eps_min = 0.05;
  int oversample = kDefaultOversample;
  SigmaMode sigma_mode = SigmaMode::MinGrid;
  std::uint64_t seed = 0;
  int n_diag = 10;
  FrameMode frame = FrameMode::Lab;
  double energy_slack = 1e-10;
  double frame_gain = 10.0;
  double dt_min = 1e-9;
  std::size_t max_steps = 100'000'000;

  /// ParameterError naming the offending field.
  void validate() const;
};

struct FlowState {
  double t = 0.0;
  SpectralField w;
  MobiusMap frame;

  /// The physical conformal factor pull_back(w, frame) (w itself in the lab frame).
  SpectralField lab_factor(std::optional<int> k_out = std::nullopt) const;
};

struct DiagnosticsRecord {
  double t = 0.0;
  double alpha = 0.0;
  double E_f = 0.0;
  double E = 0.0;
  double volume = 0.0;
  double total_T = 0.0;
  double F2 = 0.0;
  double G2 = 0.0;
  std::optional<Vec4> b;
  Vec4 S = Vec4::Zero();
  std::optional<Vec4> p;
  std::optional<double> eps;
  double dt_used = 0.0;
};

/// Adds (1/3) log(2 pi^2 / int e^{3w}) so that the volume is 2 pi^2.
SpectralField project_volume(const SpectralField& w, int oversample = kDefaultOversample);

/// Grid values of f o frame^{-1} on the nonlinear grid of the state.
GridField frame_values(const SpectralField& f, const MobiusMap& frame, int band_limit,
                       int oversample = kDefaultOversample);

/// int x (alpha f - T) e^{3w} over the bundle's grid.
Vec4 residual_moments(const CurvatureBundle& b);

/// The b-vector of a lab-frame factor after centring:
/// int x (alpha f o Phi^{-1} - T(v)) e^{3v} with v the centred field and Phi
/// the normalizing map. Evaluated on the lab grid through the substitution
/// x = Phi(y), as int Phi(y) (alpha f - T(w))(y) e^{3w(y)}.
/// Propagates NonConvergenceError.
Vec4 compute_b(const SpectralField& w, const SpectralField& f,
               const CenteringOptions& opts = {});

/// b-vector of a state given directly in a frame (v, Phi). Used when the lab
/// factor is too concentrated to expand.
Vec4 compute_b_in_frame(const SpectralField& v, const MobiusMap& frame, const SpectralField& f,
                        int oversample = kDefaultOversample);

/// (sqrt 2 / pi) b.
inline Vec4 scaled_b(const Vec4& b) { return std::sqrt(2.0) / kPi * b; }

/// One IMEX step of size dt (no acceptance logic).
FlowState step(const FlowState& state, const SpectralField& f, double dt, const FlowConfig& cfg);

/// Diagnostics of a state. (p, eps) are filled from the frame in co-moving
/// mode, or by centring when `centre` is set in the lab frame.
DiagnosticsRecord diagnose(const FlowState& state, const SpectralField& f, const FlowConfig& cfg,
                           bool centre);

struct RunResult {
  std::vector<DiagnosticsRecord> trajectory;
  Outcome outcome = Outcome::HorizonReached;
  FlowState final_state;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

/// Initial state for a lab-frame factor: projected, and centred in co-moving mode.
FlowState initial_state(const SpectralField& w0, const FlowConfig& cfg);

RunResult run(const SpectralField& w0, const SpectralField& f, const FlowConfig& cfg,
              const std::function<void(const DiagnosticsRecord&)>& on_record = {});
RunResult run(const FlowState& init, const SpectralField& f, const FlowConfig& cfg,
              const std::function<void(const DiagnosticsRecord&)>& on_record = {});

}  // namespace s3flow
