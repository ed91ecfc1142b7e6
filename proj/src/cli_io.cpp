#include "s3flow/cli_io.hpp"

#include "s3flow/errors.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace s3flow {

namespace fs = std::filesystem;

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Flow: return "flow";
    case Mode::Shadow: return "shadow";
    case Mode::Spectrum: return "spectrum";
    case Mode::Morse: return "morse";
    case Mode::Bubble: return "bubble";
    case Mode::Verify: return "verify";
  }
  return "?";
}

namespace {

struct KeySpec {
  const char* name;
  const char* help;
};

constexpr KeySpec kKeys[] = {
    {"K", "band limit"},
    {"dt", "initial (and maximal) time step"},
    {"t_max", "time horizon"},
    {"tol", "convergence threshold on F2"},
    {"eps_min", "concentration threshold on eps"},
    {"oversample", "nonlinear grid oversampling factor"},
    {"sigma", "IMEX stabilizer: min, one or max"},
    {"seed", "random seed"},
    {"n_diag", "steps between centred diagnostics"},
    {"frame", "lab or comoving"},
    {"frame_gain", "centring gain of the co-moving frame"},
    {"energy_slack", "tolerated E_f increase per step"},
    {"dt_min", "smallest step before giving up"},
    {"max_steps", "step cap"},
    {"f", "prescribed function preset"},
    {"init", "initial factor: zero, bubble, random:AMP, bubble+random:AMP, snapshot:PATH"},
    {"output_dir", "output directory"},
    {"formats", "comma list from csv,json"},
    {"prefix", "output file prefix"},
    {"data", "Morse records (JSON)"},
    {"p", "point x1,x2,x3,x4 (normalized)"},
    {"eps", "bubble scale in (0, 1]"},
    {"horizon", "shadow integration horizon"},
    {"shadow_dt", "shadow RK4 step"},
    {"only", "comma list of verify items"},
};

bool known_key(const std::string& k) {
  return k == "inject_fault" ||
         std::any_of(std::begin(kKeys), std::end(kKeys), [&](const KeySpec& s) { return k == s.name; });
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* b = value.data();
  const char* e = b + value.size();
  const auto [ptr, ec] = std::from_chars(b, e, out);
  if (ec != std::errc{} || ptr != e || value.empty())
    throw UsageError(fmt::format("{}: '{}' is not a valid number", key, value));
  return out;
}

double parse_positive(const std::string& key, const std::string& value) {
  const double v = parse_number<double>(key, value);
  if (!(v > 0)) throw UsageError(fmt::format("{}: must be positive, got {}", key, value));
  return v;
}

int parse_positive_int(const std::string& key, const std::string& value) {
  const long v = parse_number<long>(key, value);
  if (v <= 0 || v > 1'000'000) throw UsageError(fmt::format("{}: must be a positive integer, got {}", key, value));
  return int(v);
}

Vec4 parse_point(const std::string& key, const std::string& value) {
  const auto parts = split(value, ',');
  if (parts.size() != 4) throw UsageError(fmt::format("{}: expected four comma-separated numbers", key));
  Vec4 p;
  for (int i = 0; i < 4; ++i) p[i] = parse_number<double>(key, parts[std::size_t(i)]);
  if (!(p.norm() > 0)) throw UsageError(fmt::format("{}: the zero vector is not a point", key));
  return p.normalized();
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

SpectralField check_positive(SpectralField f, const std::string& spec) {
  const GridField v = synthesize(f, build_grid(std::max(8, 2 * f.band_limit())));
  if (!(v.min() > 0))
    throw UsageError(fmt::format("f: preset '{}' is not positive (min {:.6g})", spec, v.min()));
  return f;
}

}  // namespace

std::map<std::string, std::string> RunConfig::keys() const {
  std::map<std::string, std::string> k;
  k["K"] = std::to_string(flow.K);
  k["dt"] = format_double(flow.dt);
  k["t_max"] = format_double(flow.t_max);
  k["tol"] = format_double(flow.tol_converged);
  k["eps_min"] = format_double(flow.eps_min);
  k["oversample"] = std::to_string(flow.oversample);
  k["sigma"] = flow.sigma_mode == SigmaMode::MinGrid ? "min" : flow.sigma_mode == SigmaMode::One ? "one" : "max";
  k["seed"] = std::to_string(flow.seed);
  k["n_diag"] = std::to_string(flow.n_diag);
  k["frame"] = flow.frame == FrameMode::Lab ? "lab" : "comoving";
  k["frame_gain"] = format_double(flow.frame_gain);
  k["energy_slack"] = format_double(flow.energy_slack);
  k["dt_min"] = format_double(flow.dt_min);
  k["max_steps"] = std::to_string(flow.max_steps);
  k["f"] = f_spec;
  k["init"] = init_spec;
  k["output_dir"] = output_dir.string();
  std::vector<std::string> formats;
  if (csv) formats.push_back("csv");
  if (json) formats.push_back("json");
  k["formats"] = join(formats);
  k["prefix"] = prefix;
  k["data"] = data_path;
  k["p"] = fmt::format("{},{},{},{}", format_double(p[0]), format_double(p[1]), format_double(p[2]),
                       format_double(p[3]));
  k["eps"] = format_double(eps);
  k["horizon"] = format_double(horizon);
  k["shadow_dt"] = format_double(shadow_dt);
  k["only"] = join(only);
  return k;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  FlowConfig& fc = cfg.flow;
  if (key == "K") {
    const long k = parse_number<long>(key, value);
    if (k < 1 || k > 128) throw UsageError(fmt::format("K: band limit must be in [1, 128], got {}", value));
    fc.K = int(k);
  } else if (key == "dt") {
    fc.dt = parse_positive(key, value);
  } else if (key == "t_max") {
    fc.t_max = parse_positive(key, value);
  } else if (key == "tol") {
    fc.tol_converged = parse_positive(key, value);
  } else if (key == "eps_min") {
    fc.eps_min = parse_positive(key, value);
    if (fc.eps_min >= 1) throw UsageError("eps_min: must be below 1");
  } else if (key == "oversample") {
    fc.oversample = parse_positive_int(key, value);
  } else if (key == "sigma") {
    if (value == "min") fc.sigma_mode = SigmaMode::MinGrid;
    else if (value == "one") fc.sigma_mode = SigmaMode::One;
    else if (value == "max") fc.sigma_mode = SigmaMode::MaxGrid;
    else throw UsageError(fmt::format("sigma: expected min, one or max, got '{}'", value));
  } else if (key == "seed") {
    fc.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "n_diag") {
    fc.n_diag = parse_positive_int(key, value);
  } else if (key == "frame") {
    if (value == "lab") fc.frame = FrameMode::Lab;
    else if (value == "comoving") fc.frame = FrameMode::CoMoving;
    else throw UsageError(fmt::format("frame: expected lab or comoving, got '{}'", value));
  } else if (key == "frame_gain") {
    fc.frame_gain = parse_number<double>(key, value);
    if (!(fc.frame_gain >= 0)) throw UsageError("frame_gain: must be non-negative");
  } else if (key == "energy_slack") {
    fc.energy_slack = parse_number<double>(key, value);
    if (!(fc.energy_slack >= 0)) throw UsageError("energy_slack: must be non-negative");
  } else if (key == "dt_min") {
    fc.dt_min = parse_positive(key, value);
  } else if (key == "max_steps") {
    fc.max_steps = std::size_t(parse_positive_int(key, value));
  } else if (key == "f") {
    if (value.empty()) throw UsageError("f: empty preset");
    cfg.f_spec = value;
  } else if (key == "init") {
    if (value.empty()) throw UsageError("init: empty value");
    cfg.init_spec = value;
  } else if (key == "output_dir") {
    if (value.empty()) throw UsageError("output_dir: empty path");
    cfg.output_dir = value;
  } else if (key == "formats") {
    cfg.csv = cfg.json = false;
    for (const std::string& f : split(value, ',')) {
      if (f == "csv") cfg.csv = true;
      else if (f == "json") cfg.json = true;
      else if (!f.empty()) throw UsageError(fmt::format("formats: unknown format '{}'", f));
    }
  } else if (key == "prefix") {
    if (value.empty() || value.find('/') != std::string::npos)
      throw UsageError("prefix: must be a non-empty file name");
    cfg.prefix = value;
  } else if (key == "data") {
    cfg.data_path = value;
  } else if (key == "p") {
    cfg.p = parse_point(key, value);
  } else if (key == "eps") {
    cfg.eps = parse_positive(key, value);
    if (cfg.eps > 1) throw UsageError(fmt::format("eps: must be in (0, 1], got {}", value));
  } else if (key == "horizon") {
    cfg.horizon = parse_positive(key, value);
  } else if (key == "shadow_dt") {
    cfg.shadow_dt = parse_positive(key, value);
  } else if (key == "only") {
    cfg.only.clear();
    for (const std::string& s : split(value, ','))
      if (!s.empty()) cfg.only.push_back(s);
  } else if (key == "inject_fault") {
    if (value == "1" || value == "true") cfg.inject_fault = true;
    else if (value == "0" || value == "false") cfg.inject_fault = false;
    else throw UsageError(fmt::format("inject_fault: expected true or false, got '{}'", value));
  } else {
    throw UsageError(fmt::format("unknown key '{}'", key));
  }
}

std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(fmt::format("cannot read config file {}", path.string()));
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(fmt::format("{}:{}: expected key=value", path.string(), lineno));
    const std::string key = trim(line.substr(0, eq));
    if (!known_key(key)) throw UsageError(fmt::format("{}:{}: unknown key '{}'", path.string(), lineno, key));
    if (out.count(key)) throw UsageError(fmt::format("{}:{}: duplicate key '{}'", path.string(), lineno, key));
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"Spectral lab for the prescribed T-curvature flow on S^3", "s3flow"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  const std::pair<Mode, const char*> modes[] = {
      {Mode::Flow, "run the curvature flow"},
      {Mode::Shadow, "integrate the (p, eps) shadow ODE"},
      {Mode::Spectrum, "print the boundary operator spectrum"},
      {Mode::Morse, "Morse counts and the existence gate"},
      {Mode::Bubble, "bubble invariants and centring"},
      {Mode::Verify, "run the acceptance battery"},
  };
  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, std::string> config_file;
  std::map<std::string, bool> fault;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;
  for (const auto& [mode, desc] : modes) {
    const std::string name = to_string(mode);
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_file[name], "flat key=value file; flags override it");
    for (const KeySpec& k : kKeys)
      options[name][k.name] = sub->add_option(std::string("--") + k.name, values[name][k.name], k.help);
    if (mode == Mode::Verify)
      options[name]["inject_fault"] = sub->add_flag("--inject_fault", fault[name],
                                                    "perturb one multiplier (negative control)");
  }

  RunConfig cfg;
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success&) {
    cfg.help = true;
    const auto subs = app.get_subcommands();
    cfg.help_text = subs.empty() ? app.help() : subs.front()->help();
    if (cfg.help_text.empty() || args.end() != std::find(args.begin(), args.end(), "--version"))
      cfg.help_text = std::string(kToolVersion) + "\n";
    return cfg;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  for (const auto& [mode, desc] : modes)
    if (to_string(mode) == name) cfg.mode = mode;

  std::map<std::string, std::string> merged;
  if (!config_file[name].empty()) merged = read_config_file(config_file[name]);
  for (const auto& [key, opt] : options[name])
    if (opt->count() > 0) merged[key] = key == "inject_fault" ? (fault[name] ? "true" : "false") : values[name][key];
  for (const auto& [key, value] : merged) apply_setting(cfg, key, value);

  try {
    cfg.flow.validate();
  } catch (const ParameterError& e) {
    throw UsageError(fmt::format("flow configuration: {}", e.what()));
  }
  if (cfg.mode != Mode::Verify && !cfg.only.empty()) throw UsageError("only: applies to verify");
  if (cfg.inject_fault && cfg.mode != Mode::Verify) throw UsageError("inject_fault: applies to verify");
  if (!cfg.data_path.empty() && cfg.mode != Mode::Morse) throw UsageError("data: applies to morse");
  if (cfg.mode == Mode::Morse && !cfg.data_path.empty() && merged.count("f"))
    throw UsageError("data: conflicts with f (give Morse records or a function, not both)");
  if (cfg.mode == Mode::Flow || cfg.mode == Mode::Shadow || (cfg.mode == Mode::Morse && cfg.data_path.empty()))
    parse_f_spec(cfg.f_spec);
  return cfg;
}

RunConfig parse_config(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return parse_config(args);
}

SpectralField parse_f_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto need_arg = [&] {
    if (arg.empty()) throw UsageError(fmt::format("f: preset '{}' needs a parameter", kind));
  };
  if (kind == "const2" && arg.empty()) return SpectralField::constant(2.0);
  if (kind == "const") {
    need_arg();
    return check_positive(SpectralField::constant(parse_number<double>("f", arg)), spec);
  }
  if (kind == "axial") {
    need_arg();
    return check_positive(SpectralField::constant(2.0, 1) + parse_number<double>("f", arg) * SpectralField::coordinate(3),
                          spec);
  }
  if (kind == "quadric") {
    need_arg();
    const double d = parse_number<double>("f", arg);
    const GridPtr g = build_grid(4);
    GridField v(g);
    for (std::size_t i = 0; i < g->size(); ++i) {
      const Vec4& x = g->point(i);
      v.values[i] = 2.0 + d * (x[0] * x[0] + 2 * x[1] * x[1] + 3 * x[2] * x[2] + 4 * x[3] * x[3]);
    }
    return check_positive(analyze(v, 2), spec);
  }
  if (kind == "harmonics") {
    need_arg();
    std::vector<std::tuple<int, int, double>> terms;
    int kmax = 0;
    for (const std::string& t : split(arg, ',')) {
      const auto parts = split(t, ':');
      if (parts.size() != 3) throw UsageError(fmt::format("f: harmonic term '{}' is not k:ell:c", t));
      const int k = parse_number<int>("f", parts[0]);
      const int ell = parse_number<int>("f", parts[1]);
      if (k < 0 || k > 128 || ell < 1 || ell > (k + 1) * (k + 1))
        throw UsageError(fmt::format("f: harmonic index ({}, {}) out of range", k, ell));
      terms.emplace_back(k, ell, parse_number<double>("f", parts[2]));
      kmax = std::max(kmax, k);
    }
    SpectralField f = SpectralField::constant(2.0, kmax);
    for (const auto& [k, ell, c] : terms) f.at({k, ell}) += c;
    return check_positive(f, spec);
  }
  if (kind == "coeffs") {
    need_arg();
    std::vector<double> c;
    for (const std::string& t : split(arg, ',')) c.push_back(parse_number<double>("f", t));
    int k = 0;
    while (harmonic_count(k) < c.size()) ++k;
    if (harmonic_count(k) != c.size())
      throw UsageError(fmt::format("f: {} coefficients do not fill a band limit", c.size()));
    return check_positive(SpectralField(k, std::move(c)), spec);
  }
  if (kind == "file") {
    need_arg();
    return check_positive(load_snapshot(arg).w, spec);
  }
  throw UsageError(fmt::format("f: unknown preset '{}'", spec));
}

FlowState parse_init_spec(const RunConfig& cfg) {
  const std::string& spec = cfg.init_spec;
  const int K = cfg.flow.K;
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  FlowState s;
  if (kind == "zero" && arg.empty()) {
    s.w = SpectralField(K);
  } else if (kind == "bubble" && arg.empty()) {
    s.w = bubble({cfg.p, cfg.eps}, K, cfg.flow.oversample);
  } else if (kind == "random" || kind == "bubble+random") {
    if (arg.empty()) throw UsageError(fmt::format("init: '{}' needs an amplitude", kind));
    const double amp = parse_number<double>("init", arg);
    s.w = amp * random_field(K, 1.0, 0.5, cfg.flow.seed);
    if (kind == "bubble+random") s.w += bubble({cfg.p, cfg.eps}, K, cfg.flow.oversample);
  } else if (kind == "snapshot") {
    if (arg.empty()) throw UsageError("init: snapshot needs a path");
    const Snapshot snap = load_snapshot(arg);
    if (snap.band_limit != K)
      throw UsageError(fmt::format("init: snapshot band limit {} differs from K = {}", snap.band_limit, K));
    return snap.state();
  } else {
    throw UsageError(fmt::format("init: unknown initial state '{}'", spec));
  }
  return s;
}

fs::path resolve_output_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv(kOutputDirEnv); env && *env && cfg.output_dir == fs::path("."))
    return fs::path(env);
  return cfg.output_dir;
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

std::string diagnostics_csv(const std::vector<DiagnosticsRecord>& records) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const DiagnosticsRecord& r : records) {
    auto num = [&](double v) {
      out += format_double(v);
      out += ',';
    };
    auto blank = [&](int n) { out.append(std::size_t(n), ','); };
    for (double v : {r.t, r.alpha, r.E_f, r.E, r.volume, r.F2, r.G2}) num(v);
    if (r.b) for (int i = 0; i < 4; ++i) num((*r.b)[i]);
    else blank(4);
    for (int i = 0; i < 4; ++i) num(r.S[i]);
    if (r.p) for (int i = 0; i < 4; ++i) num((*r.p)[i]);
    else blank(4);
    if (r.eps) num(*r.eps);
    else blank(1);
    out += format_double(r.dt_used);
    out += '\n';
  }
  return out;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error(fmt::format("cannot create directory {}: {}", path.parent_path().string(), ec.message()));
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing", tmp.string()));
    out << text;
    out.flush();
    if (!out) throw std::runtime_error(fmt::format("write failed for {}", tmp.string()));
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error(fmt::format("cannot rename into {}", path.string()));
  }
}

void write_diagnostics_csv(const fs::path& path, const std::vector<DiagnosticsRecord>& records) {
  write_text_atomic(path, diagnostics_csv(records));
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [key, value] : cfg.keys()) {
    if (key == "output_dir" || key == "prefix" || key == "formats") continue;
    for (char c : key + "=" + value + "\n") {
      h ^= std::uint8_t(c);
      h *= 0x100000001b3ULL;
    }
  }
  return fmt::format("{:016x}", h);
}

Snapshot make_snapshot(const FlowState& state, const RunConfig& cfg) {
  Snapshot s;
  s.band_limit = state.w.band_limit();
  s.grid_resolution = cfg.flow.oversample * std::max(state.w.band_limit(), 1);
  s.t = state.t;
  s.config_hash = config_hash(cfg);
  s.w = state.w;
  s.frame = state.frame;
  return s;
}

nlohmann::json to_json(const Snapshot& s) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (std::size_t i = 0; i < s.w.size(); ++i) {
    const HarmonicIndex h = harmonic_index(i);
    coeffs.push_back({h.k, h.ell, s.w[i]});
  }
  nlohmann::json frame = nlohmann::json::array();
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) frame.push_back(s.frame.matrix()(r, c));
  return {{"header",
           {{"band_limit", s.band_limit},
            {"grid_resolution", s.grid_resolution},
            {"time", s.t},
            {"config_hash", s.config_hash},
            {"version", s.version}}},
          {"frame", frame},
          {"coefficients", coeffs}};
}

Snapshot snapshot_from_json(const nlohmann::json& j) {
  try {
    Snapshot s;
    const auto& h = j.at("header");
    s.band_limit = h.at("band_limit").get<int>();
    if (s.band_limit < 0 || s.band_limit > 256) throw ParameterError("snapshot band limit out of range");
    s.grid_resolution = h.at("grid_resolution").get<int>();
    s.t = h.at("time").get<double>();
    s.config_hash = h.at("config_hash").get<std::string>();
    s.version = h.at("version").get<std::string>();
    s.w = SpectralField(s.band_limit);
    std::vector<bool> seen(s.w.size(), false);
    for (const auto& c : j.at("coefficients")) {
      const int k = c.at(0).get<int>(), ell = c.at(1).get<int>();
      if (k < 0 || k > s.band_limit || ell < 1 || ell > (k + 1) * (k + 1))
        throw ParameterError(fmt::format("snapshot coefficient ({}, {}) out of range", k, ell));
      const std::size_t i = flat_index({k, ell});
      if (seen[i]) throw ParameterError(fmt::format("snapshot coefficient ({}, {}) repeated", k, ell));
      seen[i] = true;
      s.w[i] = c.at(2).get<double>();
    }
    if (j.contains("frame")) {
      const auto& f = j.at("frame");
      if (f.size() != 25) throw ParameterError("snapshot frame needs 25 entries");
      Lorentz L;
      for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c) L(r, c) = f.at(std::size_t(5 * r + c)).get<double>();
      s.frame = MobiusMap(L);
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(fmt::format("malformed snapshot: {}", e.what()));
  }
}

void save_snapshot(const fs::path& path, const Snapshot& s) { write_text_atomic(path, to_json(s).dump(1) + "\n"); }

Snapshot load_snapshot(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot read snapshot {}", path.string()));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return snapshot_from_json(j);
}

}  // namespace s3flow
