#pragma once

#include "s3flow/flow.hpp"
#include "s3flow/mobius.hpp"
#include "s3flow/spectral.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace s3flow {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kOutputDirEnv = "S3FLOW_OUTPUT_DIR";

enum class Mode { Flow, Shadow, Spectrum, Morse, Bubble, Verify };
std::string to_string(Mode m);

struct RunConfig {
  Mode mode = Mode::Flow;
  FlowConfig flow;
  std::string f_spec = "const2";
  std::string init_spec = "zero";
  std::filesystem::path output_dir = ".";
  bool csv = true;
  bool json = true;
  std::string prefix = "run";
  std::string data_path;  // Morse records (JSON)
  Vec4 p = Vec4(0, 0, 0, 1);
  double eps = 0.5;
  double horizon = 10.0;
  double shadow_dt = 0.01;
  std::vector<std::string> only;
  bool inject_fault = false;
  bool help = false;
  std::string help_text;

  /// Canonical key=value pairs (the same keys the config file accepts).
  std::map<std::string, std::string> keys() const;
};

/// Flat key=value file; '#' starts a comment. Unknown keys are rejected.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Subcommand and flags; `--config FILE` supplies defaults that flags override.
RunConfig parse_config(const std::vector<std::string>& args);
RunConfig parse_config(int argc, const char* const* argv);

/// Applies validated key=value settings; throws UsageError naming the key.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Presets: const2, const:C, axial:D (2 + D x4), quadric:D
/// (2 + D(x1^2 + 2x2^2 + 3x3^2 + 4x4^2)), harmonics:k:ell:c,... (added to 2),
/// coeffs:c0,c1,... (flat order), file:PATH (snapshot). Result must be positive.
SpectralField parse_f_spec(const std::string& spec);

/// zero, bubble (uses p and eps), random:AMP (uses seed), bubble+random:AMP,
/// snapshot:PATH.
FlowState parse_init_spec(const RunConfig& cfg);

/// Output directory: the --output_dir flag, else the environment override, else the config value.
std::filesystem::path resolve_output_dir(const RunConfig& cfg);

std::string format_double(double v);

inline constexpr const char* kCsvHeader =
    "t,alpha,E_f,E,volume,F2,G2,b1,b2,b3,b4,S1,S2,S3,S4,p1,p2,p3,p4,eps,dt_used";
std::string diagnostics_csv(const std::vector<DiagnosticsRecord>& records);
void write_diagnostics_csv(const std::filesystem::path& path,
                           const std::vector<DiagnosticsRecord>& records);

/// Writes to a temporary sibling and renames it into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

struct Snapshot {
  int band_limit = 0;
  int grid_resolution = 0;
  double t = 0.0;
  std::string config_hash;
  std::string version = kToolVersion;
  SpectralField w;
  MobiusMap frame;

  FlowState state() const { return {t, w, frame}; }
};

Snapshot make_snapshot(const FlowState& state, const RunConfig& cfg);
nlohmann::json to_json(const Snapshot& s);
Snapshot snapshot_from_json(const nlohmann::json& j);
void save_snapshot(const std::filesystem::path& path, const Snapshot& s);
Snapshot load_snapshot(const std::filesystem::path& path);

/// FNV-1a (64 bit) of the canonical key list, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace s3flow
