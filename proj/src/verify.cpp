#include "s3flow/verify.hpp"

#include "s3flow/beckner.hpp"
#include "s3flow/curvature.hpp"
#include "s3flow/errors.hpp"
#include "s3flow/flow.hpp"
#include "s3flow/mobius.hpp"
#include "s3flow/morse.hpp"
#include "s3flow/shadow.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <random>

namespace s3flow {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

SpectralField axial_f() { return SpectralField::constant(2.0, 1) + 0.3 * SpectralField::coordinate(3); }

Vec4 random_point(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Vec4(n(rng), n(rng), n(rng), n(rng)).normalized();
}

VerifyItem check_spectrum(const VerifyOptions& opt) {
  VerifyItem it;
  const int K = 16;
  MultiplierSpec spec = p3_multiplier(K);
  if (opt.inject_fault) spec[5] *= 1.0 + 1e-9;
  double worst = 0.0, leak = 0.0;
  bool multiplicity_ok = harmonic_count(K) == std::size_t((K + 1) * (K + 2) * (2 * K + 3) / 6);
  it.detail = fmt::format("{:>3} {:>6} {:>8} {:>12}\n", "k", "mult", "Lambda", "rel.err");
  for (int k = 0; k <= K; ++k) {
    const std::int64_t exact = std::int64_t(k) * (k + 1) * (k + 2);
    std::size_t count = 0;
    double err_k = 0.0;
    for (std::size_t i = 0; i < harmonic_count(K); ++i) {
      if (harmonic_index(i).k != k) continue;
      ++count;
      const SpectralField v = spec.apply(SpectralField::unit(harmonic_index(i), K));
      const double lam = v[i];
      const double err = exact == 0 ? std::abs(lam) : std::abs(lam - double(exact)) / double(exact);
      err_k = std::max(err_k, err);
      for (std::size_t j = 0; j < v.size(); ++j)
        if (j != i) leak = std::max(leak, std::abs(v[j]));
    }
    multiplicity_ok = multiplicity_ok && count == std::size_t((k + 1) * (k + 1));
    worst = std::max(worst, err_k);
    it.detail += fmt::format("{:>3} {:>6} {:>8} {:>12.3e}\n", k, count, exact, err_k);
  }
  it.passed = worst < 1e-12 && leak == 0.0 && multiplicity_ok;
  it.measured = fmt::format("max rel err {:.3e}, off-diagonal {:.1e}, multiplicities {}", worst, leak,
                            multiplicity_ok ? "exact" : "WRONG");
  return it;
}

VerifyItem check_conservation(const VerifyOptions&) {
  VerifyItem it;
  FlowConfig cfg;
  cfg.K = 16;
  cfg.dt = 1e-3;
  cfg.t_max = 1e3;
  cfg.max_steps = 1000;
  const SpectralField f = axial_f();
  const SpectralField w0 =
      bubble({Vec4(std::sin(0.5), 0, 0, std::cos(0.5)), 0.8}, cfg.K) + 0.05 * random_field(cfg.K, 1.0, 0.5, 21);

  double m_f = 1e300, M_f = -1e300;
  for (const GridPtr& g : {nonlinear_grid(cfg.K, cfg.oversample), build_grid(48)}) {
    const GridField v = synthesize(f, g);
    m_f = std::min(m_f, v.min());
    M_f = std::max(M_f, v.max());
  }
  const auto t0 = Clock::now();
  const RunResult res = run(w0, f, cfg);
  const double secs = seconds_since(t0);
  double vol = 0.0, tot = 0.0;
  std::size_t alpha_bad = 0;
  for (const DiagnosticsRecord& r : res.trajectory) {
    vol = std::max(vol, std::abs(r.volume - kVolS3) / kVolS3);
    tot = std::max(tot, std::abs(r.total_T - 4 * kPi * kPi) / (4 * kPi * kPi));
    if (!(2.0 / M_f <= r.alpha && r.alpha <= 2.0 / m_f)) ++alpha_bad;
  }
  it.passed = res.accepted == 1000 && vol < 1e-10 && tot < 1e-8 && alpha_bad == 0 && secs < 60.0;
  it.measured = fmt::format("{} records: volume {:.2e}, total T {:.2e}, alpha outside [2/M, 2/m]: {}, {:.1f}s "
                            "for {} steps",
                            res.trajectory.size(), vol, tot, alpha_bad, secs, res.accepted);
  return it;
}

VerifyItem check_descent(const VerifyOptions&) {
  VerifyItem it;
  FlowConfig cfg;
  cfg.K = 16;
  cfg.dt = 1e-3;
  cfg.t_max = 1e3;
  cfg.max_steps = 300;
  const SpectralField f = axial_f();
  const SpectralField w0 =
      project_volume(bubble({Vec4(0.6, 0, 0, 0.8), 0.6}, cfg.K) + 0.05 * random_field(cfg.K, 1.0, 0.5, 3));

  const RunResult res = run(w0, f, cfg);
  double rise = -1e300;
  for (std::size_t i = 1; i < res.trajectory.size(); ++i)
    rise = std::max(rise, res.trajectory[i].E_f - res.trajectory[i - 1].E_f);

  const FlowState s0{0.0, w0, MobiusMap::identity()};
  const DiagnosticsRecord d0 = diagnose(s0, f, cfg, false);
  std::vector<double> errs;
  for (double dt = 1e-4; errs.size() < 4; dt /= 2) {
    const DiagnosticsRecord d1 = diagnose(step(s0, f, dt, cfg), f, cfg, false);
    errs.push_back(std::abs((d1.E_f - d0.E_f) / dt + 4.0 * d0.F2));
  }
  bool ratios_ok = true;
  std::string ratios;
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double r = errs[i] / errs[i + 1];
    ratios_ok = ratios_ok && r >= 1.7 && r <= 2.3;
    ratios += fmt::format("{}{:.3f}", i ? " " : "", r);
  }
  it.passed = rise <= 1e-10 && ratios_ok;
  it.measured = fmt::format("max E_f rise {:.2e} over {} accepted steps; dE_f/dt + 4F2 error ratios [{}] "
                            "(F2 = {:.4g})",
                            rise, res.accepted, ratios, d0.F2);
  return it;
}

VerifyItem check_convergence(const VerifyOptions&) {
  VerifyItem it;
  FlowConfig cfg;
  cfg.K = 16;
  cfg.dt = 1e-3;
  cfg.t_max = 20.0;
  cfg.sigma_mode = SigmaMode::MaxGrid;
  cfg.tol_converged = 1e-13;
  const SpectralField f = SpectralField::constant(2.0);
  const SpectralField w0 = bubble({Vec4(0, 0, 0, 1), 0.6}, cfg.K) + 0.05 * random_field(cfg.K, 1.0, 0.5, 1);

  const auto t0 = Clock::now();
  const RunResult res = run(w0, f, cfg);
  const double secs = seconds_since(t0);
  const auto& tr = res.trajectory;
  const bool reached = std::any_of(tr.begin(), tr.end(), [](const DiagnosticsRecord& r) { return r.F2 < 1e-10; });
  const GridField T = t_curvature(res.final_state.w, cfg.oversample);
  const double terr = std::max(std::abs(T.max() - 2.0), std::abs(T.min() - 2.0));

  // least squares of log F2 against t over the final decade
  const double last = tr.back().F2;
  std::size_t first = tr.size() - 1;
  while (first > 0 && tr[first - 1].F2 <= 10.0 * last) --first;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  const double n = double(tr.size() - first);
  for (std::size_t i = first; i < tr.size(); ++i) {
    const double x = tr[i].t, y = std::log(tr[i].F2);
    sx += x, sy += y, sxx += x * x, sxy += x * y, syy += y * y;
  }
  const double cxx = sxx - sx * sx / n, cxy = sxy - sx * sy / n, cyy = syy - sy * sy / n;
  const double slope = cxx > 0 ? cxy / cxx : 0.0;
  const double r2 = cxx > 0 && cyy > 0 ? cxy * cxy / (cxx * cyy) : 0.0;
  it.passed = res.outcome == Outcome::Converged && reached && terr < 1e-6 && slope < 0 && r2 > 0.99 &&
              n >= 3 && secs < 600.0;
  it.measured = fmt::format("{} at t = {:.4f} (F2 = {:.2e}); sup|T - 2| = {:.2e}; final-decade fit slope {:.3f}, "
                            "R^2 {:.5f} over {} records; {:.1f}s",
                            to_string(res.outcome), tr.back().t, last, terr, slope, r2, std::size_t(n), secs);
  return it;
}

VerifyItem check_bubbles(const VerifyOptions&) {
  VerifyItem it;
  const int K = 32;
  std::mt19937_64 rng(5);
  std::vector<Vec4> points;
  for (int i = 0; i < 5; ++i) points.push_back(random_point(rng));
  bool ok = true, only_truncation = true;
  for (double eps : {0.3, 0.5, 0.8}) {
    double terr = 0, eerr = 0, verr = 0, perr = 0, serr = 0;
    for (const Vec4& p : points) {
      const SpectralField w = bubble({p, eps}, K);
      const CurvatureBundle b = curvature_bundle(w, SpectralField::constant(2.0), kDefaultOversample);
      terr = std::max(terr, std::max(std::abs(b.T.max() - 2.0), std::abs(b.T.min() - 2.0)));
      eerr = std::max(eerr, std::abs(energy_E(w)));
      verr = std::max(verr, std::abs(b.volume - kVolS3) / kVolS3);
      const CenteringResult c = normalize(w, {.want_field = false});
      perr = std::max(perr, (c.param.p - p).norm());
      serr = std::max(serr, std::abs(c.param.eps - eps));
    }
    const bool rest = eerr < 1e-6 && verr < 1e-10 && perr < 1e-8 && serr < 1e-8;
    const bool pass = terr < 1e-6 && rest;
    ok = ok && pass;
    // coefficients decay like ((1 - eps) / (1 + eps))^k; P3 amplifies the tail by k^3
    const double tail = std::pow((1 - eps) / (1 + eps), K + 1) * std::pow(K + 1.0, 3);
    if (!rest || (terr >= 1e-6 && tail < 1e-6)) only_truncation = false;
    it.detail += fmt::format("eps {:.1f}: sup|T-2| {:.2e}  |E| {:.2e}  volume {:.2e}  p {:.2e}  eps {:.2e}  {}\n", eps,
                             terr, eerr, verr, perr, serr, pass ? "ok" : "FAIL");
  }
  it.passed = ok;
  it.measured = "K = 32, five random centres per scale";
  if (!ok && only_truncation)
    it.blocker = "sup|T - 2| at eps = 0.3 is set by the K = 32 truncation of the bubble, not by the solver";
  return it;
}

VerifyItem check_kazdan_warner(const VerifyOptions&) {
  VerifyItem it;
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    const SpectralField w = random_field(16, 0.2, 0.5, 600 + std::uint64_t(s));
    worst = std::max(worst, kazdan_warner_residual(w).cwiseAbs().maxCoeff());
  }
  const GridPtr fine = build_grid(64);
  GridField v(fine);
  for (std::size_t i = 0; i < fine->size(); ++i) {
    const Vec4& x = fine->point(i);
    v.values[i] = 0.3 * std::exp(0.5 * x[0]) - 0.2 / (1.6 - x[3]);
  }
  const double r8 = kazdan_warner_residual(analyze(v, 8)).cwiseAbs().maxCoeff();
  const double r16 = kazdan_warner_residual(analyze(v, 16)).cwiseAbs().maxCoeff();
  it.passed = worst < 1e-8 && r8 >= 10.0 * r16;
  it.measured = fmt::format("max |component| over 20 fields {:.2e}; smooth factor K=8 {:.2e}, K=16 {:.2e} "
                            "(ratio {:.1f})",
                            worst, r8, r16, r8 / r16);
  return it;
}

VerifyItem check_ache_chang(const VerifyOptions&) {
  VerifyItem it;
  double gmin = 1e300;
  for (int s = 0; s < 100; ++s)
    gmin = std::min(gmin, ache_chang_gap(random_field(16, 0.2, 0.6, 700 + std::uint64_t(s))));
  const double g0 = std::abs(ache_chang_gap(SpectralField(16)));
  double gb = 0.0;
  std::mt19937_64 rng(9);
  for (double eps : {0.3, 0.5, 0.8})
    for (int i = 0; i < 2; ++i) gb = std::max(gb, std::abs(ache_chang_gap(bubble({random_point(rng), eps}, 32))));
  it.passed = gmin >= -1e-9 && g0 < 1e-10 && gb < 1e-6;
  it.measured = fmt::format("min gap over 100 fields {:.3e}; |gap(0)| {:.1e}; max |gap| at bubbles {:.1e}", gmin,
                            g0, gb);
  return it;
}

VerifyItem check_b_vector(const VerifyOptions&) {
  VerifyItem it;
  const SpectralField f = axial_f();
  const int K = 16;
  const Vec4 p(0.6 * std::sin(1.0), 0.8 * std::sin(1.0), 0.0, std::cos(1.0));
  const Vec4 grad = 0.3 * (Vec4(0, 0, 0, 1) - p[3] * p);
  bool ok = true;
  for (double eps : {0.2, 0.1}) {
    const MobiusMap frame = MobiusMap::dilation(p, eps);
    const Vec4 b = compute_b_in_frame(SpectralField(K), frame, f);
    const double alpha = curvature_bundle(SpectralField(K), frame_values(f, frame, K)).alpha;
    const Vec4 pred = 4 * kPi * kPi / 3 * alpha * eps * grad;
    const Vec4 bt = b - b.dot(p) * p;
    const double rel = (bt - pred).norm() / pred.norm();
    ok = ok && rel <= 3 * eps;
    it.detail += fmt::format("eps {:.1f}: |b_T| {:.6f}  predicted {:.6f}  rel err {:.3e} (bound {:.1f})\n", eps,
                             bt.norm(), pred.norm(), rel, 3 * eps);
  }
  it.passed = ok;
  it.measured = "tangential b against (4 pi^2 / 3) alpha eps grad f(p)";
  return it;
}

VerifyItem check_morse(const VerifyOptions&) {
  VerifyItem it;
  const auto t0 = Clock::now();
  std::size_t mismatches = 0, identity_bad = 0, corollary_bad = 0, feasible = 0;
  for (int a = 0; a <= 5; ++a)
    for (int b = 0; b <= 5; ++b)
      for (int c = 0; c <= 5; ++c)
        for (int d = 0; d <= 5; ++d) {
          const MorseCounts m{a, b, c, d};
          const int hi = std::max({a, b, c, d}) + 1;
          std::optional<MorseWitness> brute;
          std::size_t holds = 0;
          for (int k0 = 0; k0 <= hi; ++k0)
            for (int k1 = 0; k1 <= hi; ++k1)
              for (int k2 = 0; k2 <= hi; ++k2)
                for (int k3 = 0; k3 <= hi; ++k3) {
                  const MorseWitness k{k0, k1, k2, k3};
                  if (m[0] == 1 + k0 && m[1] == k0 + k1 && m[2] == k1 + k2 && m[3] == k2 + k3 && k3 == 0) brute = k;
                  if (morse_polynomial_check(m, k)) ++holds;
                }
          const SystemSolution s = solve_system(m);
          if (s.feasible != brute.has_value() || (s.feasible && *s.witness != *brute)) ++mismatches;
          if (s.feasible) {
            ++feasible;
            if (!morse_polynomial_check(m, *s.witness) || holds != 1) ++identity_bad;
          } else if (holds != 0) {
            ++identity_bad;
          }
          std::vector<MorseDatum> data;
          for (int i = 0; i < 4; ++i)
            for (int j = 0; j < m[i]; ++j) {
              MorseDatum dd;
              dd.morse_index = 3 - i;
              dd.laplacian_negative = true;
              dd.value = 2.0 + 0.01 * double(data.size());
              data.push_back(dd);
            }
          const MorseReport r = morse_report(data);
          // t = -1 in the polynomial identity gives sum (-1)^i m_i = 1, i.e. degree sum -1
          const int alternating = m[0] - m[1] + m[2] - m[3];
          const bool corollary = alternating != 1;
          if (r.corollary_existence != corollary || (corollary && !r.theorem_existence) ||
              r.degree_sum != degree_sum(m))
            ++corollary_bad;
        }
  const double secs = seconds_since(t0);
  it.passed = mismatches == 0 && identity_bad == 0 && corollary_bad == 0 && secs < 1.0;
  it.measured = fmt::format("1296 cases ({} feasible): solver mismatches {}, identity failures {}, corollary "
                            "failures {}; {:.3f}s",
                            feasible, mismatches, identity_bad, corollary_bad, secs);
  return it;
}

VerifyItem check_concentration(const VerifyOptions&) {
  VerifyItem it;
  FlowConfig cfg;
  cfg.K = 12;
  cfg.dt = 1.6e-2;
  cfg.t_max = 200.0;
  cfg.sigma_mode = SigmaMode::MaxGrid;
  cfg.frame = FrameMode::CoMoving;
  cfg.eps_min = 0.02;
  const SpectralField f = axial_f();
  const double theta0 = 0.6;
  const Vec4 q(std::sin(theta0), 0, 0, std::cos(theta0));
  const Vec4 north(0, 0, 0, 1);

  const auto t0 = Clock::now();
  const RunResult res = run(bubble({q, 0.5}, cfg.K), f, cfg);
  const auto& tr = res.trajectory;
  const DiagnosticsRecord& end = tr.back();
  const double dist = geodesic_distance(*end.p, north);
  double eps_rise = 0.0;
  for (std::size_t i = 1; i < tr.size(); ++i) eps_rise = std::max(eps_rise, *tr[i].eps - *tr[i - 1].eps);
  const bool decreasing = *end.eps < *tr.front().eps && eps_rise <= 1e-9;

  ComparisonReport cmp;
  if (const auto start = shadow_start(tr)) {
    const ShadowTrajectory sh = integrate_shadow(*start, f, end.t - start->t, 0.01);
    cmp = compare_with_full_flow(tr, sh);
  }
  const double secs = seconds_since(t0);
  const bool track_ok = res.outcome == Outcome::Converged || (dist <= 0.1 && decreasing);
  it.passed = track_ok && !cmp.empty && cmp.max_geodesic <= 0.15 && secs < 900.0;
  it.measured = fmt::format("{} at t = {:.1f}: endpoint {:.4f} from the north pole, eps {:.2e} -> {:.2e} (max rise "
                            "{:.1e}); shadow window [{:.2f}, {:.1f}] p deviation {:.4f}; {:.0f}s",
                            to_string(res.outcome), end.t, dist, *tr.front().eps, *end.eps, eps_rise,
                            cmp.window_start, cmp.window_end, cmp.max_geodesic, secs);
  return it;
}

struct Entry {
  int id;
  const char* name;
  VerifyItem (*fn)(const VerifyOptions&);
};

const Entry kEntries[] = {
    {1, "spectrum", check_spectrum},       {2, "conservation", check_conservation},
    {3, "descent", check_descent},         {4, "convergence", check_convergence},
    {5, "bubbles", check_bubbles},         {6, "kazdan_warner", check_kazdan_warner},
    {7, "ache_chang", check_ache_chang},   {8, "b_vector", check_b_vector},
    {9, "morse", check_morse},             {10, "concentration", check_concentration},
};

}  // namespace

const std::vector<std::string>& verify_item_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const Entry& e : kEntries) v.emplace_back(e.name);
    return v;
  }();
  return names;
}

VerifyItem run_verify_item(const std::string& name, const VerifyOptions& opt) {
  for (const Entry& e : kEntries) {
    if (name != e.name) continue;
    const auto t0 = Clock::now();
    VerifyItem it;
    try {
      it = e.fn(opt);
    } catch (const std::exception& ex) {
      it.passed = false;
      it.measured = fmt::format("threw: {}", ex.what());
    }
    it.id = e.id;
    it.name = e.name;
    it.seconds = seconds_since(t0);
    return it;
  }
  throw UsageError(fmt::format("only: unknown verify item '{}'", name));
}

std::vector<VerifyItem> verify_suite(const VerifyOptions& opt) {
  for (const std::string& n : opt.only)
    if (std::find(verify_item_names().begin(), verify_item_names().end(), n) == verify_item_names().end())
      throw UsageError(fmt::format("only: unknown verify item '{}'", n));
  std::vector<VerifyItem> out;
  for (const std::string& n : verify_item_names())
    if (opt.only.empty() || std::find(opt.only.begin(), opt.only.end(), n) != opt.only.end())
      out.push_back(run_verify_item(n, opt));
  return out;
}

std::string verdict_line(const VerifyItem& item) {
  return fmt::format("{} [{:>2}] {:<14} {}", item.passed ? "PASS" : "FAIL", item.id, item.name, item.measured);
}

std::string format_item(const VerifyItem& item) {
  std::string out = verdict_line(item) + "\n";
  if (!item.passed && !item.blocker.empty()) out += "       known blocker: " + item.blocker + "\n";
  std::size_t pos = 0;
  while (pos < item.detail.size()) {
    const auto nl = item.detail.find('\n', pos);
    out += "       " + item.detail.substr(pos, nl - pos) + "\n";
    pos = nl == std::string::npos ? item.detail.size() : nl + 1;
  }
  return out;
}

std::string verdict_table(const std::vector<VerifyItem>& items) {
  std::string out;
  std::size_t passed = 0;
  for (const VerifyItem& it : items) {
    out += format_item(it);
    passed += it.passed;
  }
  out += fmt::format("{}/{} items passed\n", passed, items.size());
  return out;
}

}  // namespace s3flow
