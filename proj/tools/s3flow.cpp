#include "s3flow/beckner.hpp"
#include "s3flow/cli_io.hpp"
#include "s3flow/curvature.hpp"
#include "s3flow/errors.hpp"
#include "s3flow/flow.hpp"
#include "s3flow/mobius.hpp"
#include "s3flow/morse.hpp"
#include "s3flow/shadow.hpp"
#include "s3flow/verify.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <iostream>

using namespace s3flow;
namespace fs = std::filesystem;

namespace {

int cmd_flow(const RunConfig& cfg, const fs::path& out) {
  const SpectralField f = parse_f_spec(cfg.f_spec);
  FlowState init = parse_init_spec(cfg);
  if (cfg.init_spec.rfind("snapshot:", 0) != 0) init = initial_state(init.w, cfg.flow);
  const RunResult res = run(init, f, cfg.flow, [](const DiagnosticsRecord& r) {
    static std::size_t n = 0;
    if (n++ % 100 == 0)
      fmt::print("t {:10.5f}  E_f {:.10f}  F2 {:.3e}  alpha {:.8f}\n", r.t, r.E_f, r.F2, r.alpha);
  });
  const DiagnosticsRecord& last = res.trajectory.back();
  fmt::print("{} at t = {:.6g} after {} steps ({} rejected); F2 = {:.3e}\n", to_string(res.outcome), last.t,
             res.accepted, res.rejected, last.F2);
  if (last.p) fmt::print("p = ({:.6f}, {:.6f}, {:.6f}, {:.6f}), eps = {:.6g}\n", (*last.p)[0], (*last.p)[1],
                         (*last.p)[2], (*last.p)[3], *last.eps);
  if (cfg.csv) {
    const fs::path p = out / (cfg.prefix + "_diagnostics.csv");
    write_diagnostics_csv(p, res.trajectory);
    fmt::print("wrote {}\n", p.string());
  }
  if (cfg.json) {
    const fs::path p = out / (cfg.prefix + "_final.json");
    save_snapshot(p, make_snapshot(res.final_state, cfg));
    fmt::print("wrote {}\n", p.string());
  }
  return 0;
}

int cmd_shadow(const RunConfig& cfg, const fs::path& out) {
  const SpectralField f = parse_f_spec(cfg.f_spec);
  const ShadowTrajectory tr = integrate_shadow({cfg.p, cfg.eps}, f, cfg.horizon, cfg.shadow_dt);
  const ShadowState& e = tr.states.back();
  fmt::print("t = {:.6g}: p = ({:.6f}, {:.6f}, {:.6f}, {:.6f}), eps = {:.6g}{}\n", e.t, e.p[0], e.p[1], e.p[2],
             e.p[3], e.eps, tr.truncated ? " (eps left (0, 1))" : "");
  if (cfg.csv) {
    std::string text = "t,p1,p2,p3,p4,eps,s\n";
    for (const ShadowState& s : tr.states)
      text += fmt::format("{},{},{},{},{},{},{}\n", format_double(s.t), format_double(s.p[0]), format_double(s.p[1]),
                          format_double(s.p[2]), format_double(s.p[3]), format_double(s.eps), format_double(s.s));
    const fs::path p = out / (cfg.prefix + "_shadow.csv");
    write_text_atomic(p, text);
    fmt::print("wrote {}\n", p.string());
  }
  return 0;
}

int cmd_spectrum(const RunConfig& cfg) {
  const MultiplierSpec spec = p3_multiplier(cfg.flow.K);
  fmt::print("{:>4} {:>8} {:>10} {:>14}\n", "k", "mult", "Lambda_k", "sqrt");
  for (int k = 0; k <= cfg.flow.K; ++k)
    fmt::print("{:>4} {:>8} {:>10} {:>14.10f}\n", k, (k + 1) * (k + 1), boundary_eigenvalue_exact(k),
               std::sqrt(spec(k)));
  return 0;
}

int cmd_morse(const RunConfig& cfg, const fs::path& out) {
  std::vector<MorseDatum> data;
  if (!cfg.data_path.empty()) {
    std::ifstream in(cfg.data_path);
    if (!in) throw UsageError(fmt::format("data: cannot read {}", cfg.data_path));
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(fmt::format("data: {}: {}", cfg.data_path, e.what()));
    }
    data = morse_data_from_json(j);
  } else {
    data = extract_morse_data(parse_f_spec(cfg.f_spec));
  }
  const MorseReport r = morse_report(data);
  nlohmann::json j = to_json(r);
  j["points"] = nlohmann::json::array();
  for (const MorseDatum& d : data) j["points"].push_back(to_json(d));
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (cfg.json) {
    const fs::path p = out / (cfg.prefix + "_morse.json");
    write_text_atomic(p, text);
    std::cerr << "wrote " << p.string() << "\n";
  }
  return 0;
}

int cmd_bubble(const RunConfig& cfg, const fs::path& out) {
  const int K = cfg.flow.K;
  const SpectralField w = bubble({cfg.p, cfg.eps}, K, cfg.flow.oversample);
  const CurvatureBundle b = curvature_bundle(w, SpectralField::constant(2.0), cfg.flow.oversample);
  const CenteringResult c = normalize(w, {.oversample = cfg.flow.oversample});
  fmt::print("sup|T - 2|        {:.3e}\n", std::max(std::abs(b.T.max() - 2), std::abs(b.T.min() - 2)));
  fmt::print("E                 {:.3e}\n", energy_E(w));
  fmt::print("volume error      {:.3e}\n", b.volume / kVolS3 - 1);
  fmt::print("Ache-Chang gap    {:.3e}\n", ache_chang_gap(w, cfg.flow.oversample));
  fmt::print("recovered p       ({:.12f}, {:.12f}, {:.12f}, {:.12f})\n", c.param.p[0], c.param.p[1], c.param.p[2],
             c.param.p[3]);
  fmt::print("recovered eps     {:.12f}  (centring residual {:.2e}, {} iterations)\n", c.param.eps, c.residual.norm(),
             c.iterations);
  if (cfg.json) {
    const fs::path p = out / (cfg.prefix + "_bubble.json");
    save_snapshot(p, make_snapshot({0.0, w, MobiusMap::identity()}, cfg));
    fmt::print("wrote {}\n", p.string());
  }
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  VerifyOptions opt;
  opt.only = cfg.only;
  opt.inject_fault = cfg.inject_fault;
  for (const std::string& n : opt.only)
    if (std::find(verify_item_names().begin(), verify_item_names().end(), n) == verify_item_names().end())
      throw UsageError(fmt::format("only: unknown verify item '{}'", n));
  std::size_t run = 0, passed = 0;
  for (const std::string& name : verify_item_names()) {
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), name) == opt.only.end()) continue;
    const VerifyItem it = run_verify_item(name, opt);
    std::cout << format_item(it) << std::flush;
    ++run;
    passed += it.passed;
  }
  fmt::print("{}/{} items passed\n", passed, run);
  return passed == run ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    const RunConfig cfg = parse_config(argc, argv);
    if (cfg.help) {
      std::cout << cfg.help_text;
      return 0;
    }
    const fs::path out = resolve_output_dir(cfg);
    switch (cfg.mode) {
      case Mode::Flow: return cmd_flow(cfg, out);
      case Mode::Shadow: return cmd_shadow(cfg, out);
      case Mode::Spectrum: return cmd_spectrum(cfg);
      case Mode::Morse: return cmd_morse(cfg, out);
      case Mode::Bubble: return cmd_bubble(cfg, out);
      case Mode::Verify: return cmd_verify(cfg);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const HypothesisViolation& e) {
    std::cerr << "hypothesis violation: " << e.what() << "\n";
    for (const std::string& o : e.offenders()) std::cerr << "  " << o << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
