#include "s3flow/flow.hpp"

#include "s3flow/beckner.hpp"
#include "s3flow/errors.hpp"

#include <Eigen/LU>
#include <fmt/format.h>

#include <cmath>

namespace s3flow {

std::string to_string(SigmaMode m) {
  switch (m) {
    case SigmaMode::MinGrid: return "min";
    case SigmaMode::One: return "one";
    case SigmaMode::MaxGrid: return "max";
  }
  return "?";
}

std::string to_string(FrameMode m) { return m == FrameMode::Lab ? "lab" : "comoving"; }

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Converged: return "Converged";
    case Outcome::Concentrating: return "Concentrating";
    case Outcome::HorizonReached: return "HorizonReached";
  }
  return "?";
}

void FlowConfig::validate() const {
  auto bad = [](const char* key, const std::string& why) {
    throw ParameterError(fmt::format("{}: {}", key, why));
  };
  if (K < 0) bad("K", "must be >= 0");
  if (!(dt > 0)) bad("dt", "must be positive");
  if (!(t_max > 0)) bad("t_max", "must be positive");
  if (!(tol_converged > 0)) bad("tol_converged", "must be positive");
  if (!(eps_min > 0 && eps_min < 1)) bad("eps_min", "must lie in (0, 1)");
  if (oversample < 1) bad("oversample", "must be >= 1");
  if (n_diag < 1) bad("n_diag", "must be >= 1");
  if (!(energy_slack >= 0)) bad("energy_slack", "must be non-negative");
  if (!(frame_gain >= 0)) bad("frame_gain", "must be non-negative");
  if (!(dt_min > 0 && dt_min <= dt)) bad("dt_min", "must lie in (0, dt]");
}

namespace {

GridPtr state_grid(int K, const SpectralField& f, int oversample) {
  return build_grid(std::max(oversample * std::max(K, 1), f.band_limit()));
}

bool is_identity(const MobiusMap& m) { return m.matrix() == Lorentz::Identity(); }

GridField frame_values_on(const SpectralField& f, const MobiusMap& frame, const GridPtr& grid) {
  if (is_identity(frame)) return prescribed_values(f, grid);
  const MobiusMap inv = frame.inverse();
  std::vector<Vec4> pts(grid->size());
  for (std::size_t i = 0; i < grid->size(); ++i) pts[i] = inv(grid->point(i)).normalized();
  GridField out(grid, evaluate_at(f, pts));
  const double m = out.min();
  if (!(m > 0.0))
    throw PositivityError(fmt::format("prescribed function has minimum {:.6g} on the grid", m));
  return out;
}

Vec4 mapped_mean(const GridField& e3w, const MobiusMap& phi) {
  const QuadratureGrid& g = *e3w.grid;
  Vec4 s = Vec4::Zero();
  for (std::size_t i = 0; i < g.size(); ++i) s += g.weight(i) * e3w.values[i] * phi(g.point(i));
  return s / kVolS3;
}

double sigma_of(const CurvatureBundle& b, SigmaMode mode) {
  switch (mode) {
    case SigmaMode::One: return 1.0;
    case SigmaMode::MinGrid: return 1.0 / b.e3w.max();
    case SigmaMode::MaxGrid: return 1.0 / b.e3w.min();
  }
  return 1.0;
}

// Boost generator keeping the centre of mass of v at the origin.
Vec4 frame_velocity(const CurvatureBundle& b, double gain) {
  const QuadratureGrid& g = *b.e3w.grid;
  Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
  Vec4 c = Vec4::Zero();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec4& x = g.point(i);
    const double we = g.weight(i) * b.e3w.values[i];
    M -= we * x * x.transpose();
    M.diagonal().array() += we;
    c += we * x;
  }
  return M.partialPivLu().solve(3.0 * residual_moments(b) + gain * c);
}

}  // namespace

SpectralField FlowState::lab_factor(std::optional<int> k_out) const {
  if (is_identity(frame)) return k_out ? w.resized(*k_out) : w;
  return pull_back(w, frame, k_out);
}

SpectralField project_volume(const SpectralField& w, int oversample) {
  const double vol = exp3(w, nonlinear_grid(w.band_limit(), oversample)).integrate();
  SpectralField out = w;
  out += SpectralField::constant(std::log(kVolS3 / vol) / 3.0);
  return out;
}

GridField frame_values(const SpectralField& f, const MobiusMap& frame, int band_limit,
                       int oversample) {
  return frame_values_on(f, frame, state_grid(band_limit, f, oversample));
}

Vec4 residual_moments(const CurvatureBundle& b) {
  const QuadratureGrid& g = *b.e3w.grid;
  Vec4 s = Vec4::Zero();
  for (std::size_t i = 0; i < g.size(); ++i)
    s += g.weight(i) * (b.alpha * b.f.values[i] - b.T.values[i]) * b.e3w.values[i] * g.point(i);
  return s;
}

Vec4 compute_b_in_frame(const SpectralField& v, const MobiusMap& frame, const SpectralField& f,
                        int oversample) {
  return residual_moments(
      curvature_bundle(v, frame_values(f, frame, v.band_limit(), oversample)));
}

namespace {

Vec4 mapped_residual_moments(const CurvatureBundle& b, const MobiusMap& phi) {
  const QuadratureGrid& g = *b.e3w.grid;
  Vec4 s = Vec4::Zero();
  for (std::size_t i = 0; i < g.size(); ++i)
    s += g.weight(i) * (b.alpha * b.f.values[i] - b.T.values[i]) * b.e3w.values[i] *
         phi(g.point(i));
  return s;
}

}  // namespace

Vec4 compute_b(const SpectralField& w, const SpectralField& f, const CenteringOptions& opts) {
  CenteringOptions o = opts;
  o.want_field = false;
  const CenteringResult c = normalize(w, o);
  return mapped_residual_moments(curvature_bundle(w, f, opts.oversample), c.param.map());
}

namespace {

CurvatureBundle state_bundle(const FlowState& state, const SpectralField& f, const FlowConfig& cfg) {
  const GridPtr grid = state_grid(state.w.band_limit(), f, cfg.oversample);
  return curvature_bundle(state.w, frame_values_on(f, state.frame, grid));
}

FlowState step_with(const FlowState& state, const CurvatureBundle& b, double dt,
                    const FlowConfig& cfg) {
  if (!(dt > 0)) throw ParameterError("dt must be positive");
  const SpectralField& v = state.w;
  const int K = v.band_limit();
  const GridPtr& grid = b.e3w.grid;
  const double sigma = sigma_of(b, cfg.sigma_mode);

  GridField rhs = b.residual();
  Vec4 a = Vec4::Zero();
  if (cfg.frame == FrameMode::CoMoving) {
    a = frame_velocity(b, cfg.frame_gain);
    SpectralField ax(1);
    for (int i = 0; i < 4; ++i) ax += a[i] * SpectralField::coordinate(i);
    const GridField transport = synthesize(gradient_inner(v, ax), grid);
    for (std::size_t i = 0; i < grid->size(); ++i)
      rhs.values[i] += transport.values[i] - a.dot(grid->point(i));
  }

  SpectralField N = analyze(rhs, K);
  const SpectralField p3v = apply_P3(v);
  FlowState out;
  out.t = state.t + dt;
  out.w = SpectralField(K);
  for (int k = 0, i = 0; k <= K; ++k) {
    const double mu = boundary_eigenvalue(k);
    for (int j = 0; j < (k + 1) * (k + 1); ++j, ++i)
      out.w[i] = (v[i] + dt * (N[i] + sigma * p3v[i])) / (1.0 + dt * sigma * mu);
  }
  out.w = project_volume(out.w, cfg.oversample);
  out.frame = state.frame;
  if (cfg.frame == FrameMode::CoMoving)
    out.frame = (MobiusMap::flow_of(-dt * a) * state.frame).reorthogonalized();
  return out;
}

DiagnosticsRecord diagnose_with(const FlowState& state, const CurvatureBundle& b,
                                const FlowConfig& cfg, bool centre) {
  DiagnosticsRecord r;
  r.t = state.t;
  r.alpha = b.alpha;
  r.E = b.energy_E();
  r.E_f = b.energy_Ef();
  r.volume = b.volume;
  r.total_T = b.total_T;
  std::tie(r.F2, r.G2) = diagnostics_F2_G2(b);
  r.S = mapped_mean(b.e3w, state.frame.inverse());
  if (cfg.frame == FrameMode::CoMoving) {
    const MobiusParameter prm = MobiusParameter::from_map(state.frame);
    r.p = prm.p;
    r.eps = prm.eps;
    r.b = residual_moments(b);
  } else if (centre) {
    try {
      CenteringOptions opts;
      opts.oversample = cfg.oversample;
      opts.want_field = false;
      const CenteringResult c = normalize(state.w, opts);
      r.p = c.param.p;
      r.eps = c.param.eps;
      r.b = mapped_residual_moments(b, c.param.map());
    } catch (const NonConvergenceError&) {
      // (p, eps) and b stay unavailable for this record
    }
  }
  return r;
}

}  // namespace

FlowState step(const FlowState& state, const SpectralField& f, double dt, const FlowConfig& cfg) {
  return step_with(state, state_bundle(state, f, cfg), dt, cfg);
}

DiagnosticsRecord diagnose(const FlowState& state, const SpectralField& f, const FlowConfig& cfg,
                           bool centre) {
  return diagnose_with(state, state_bundle(state, f, cfg), cfg, centre);
}

FlowState initial_state(const SpectralField& w0, const FlowConfig& cfg) {
  FlowState s;
  s.w = project_volume(w0.resized(cfg.K), cfg.oversample);
  if (cfg.frame == FrameMode::CoMoving) {
    CenteringOptions opts;
    opts.oversample = cfg.oversample;
    const CenteringResult c = normalize(s.w, opts);
    s.w = project_volume(c.centered, cfg.oversample);
    s.frame = c.param.map();
  }
  return s;
}

RunResult run(const SpectralField& w0, const SpectralField& f, const FlowConfig& cfg,
              const std::function<void(const DiagnosticsRecord&)>& on_record) {
  cfg.validate();
  return run(initial_state(w0, cfg), f, cfg, on_record);
}

RunResult run(const FlowState& init, const SpectralField& f, const FlowConfig& cfg,
              const std::function<void(const DiagnosticsRecord&)>& on_record) {
  cfg.validate();
  RunResult res;
  FlowState state = init;
  double dt = cfg.dt;
  int streak = 0;
  std::size_t steps = 0;

  auto emit = [&](DiagnosticsRecord r, double dt_used) {
    r.dt_used = dt_used;
    if (on_record) on_record(r);
    res.trajectory.push_back(std::move(r));
  };

  CurvatureBundle bundle = state_bundle(state, f, cfg);
  DiagnosticsRecord rec = diagnose_with(state, bundle, cfg, true);
  emit(rec, 0.0);
  for (;;) {
    if (rec.F2 < cfg.tol_converged) {
      res.outcome = Outcome::Converged;
      break;
    }
    if (rec.eps && *rec.eps < cfg.eps_min) {
      res.outcome = Outcome::Concentrating;
      break;
    }
    if (state.t >= cfg.t_max * (1 - 1e-12) || steps >= cfg.max_steps) {
      res.outcome = Outcome::HorizonReached;
      break;
    }
    const double h = std::min(dt, cfg.t_max - state.t);
    FlowState next = step_with(state, bundle, h, cfg);
    CurvatureBundle nbundle = state_bundle(next, f, cfg);
    const bool centre = cfg.frame == FrameMode::Lab && (steps + 1) % cfg.n_diag == 0;
    DiagnosticsRecord nrec = diagnose_with(next, nbundle, cfg, centre);
    if (nrec.E_f > rec.E_f + cfg.energy_slack && h > cfg.dt_min) {
      dt = std::max(0.5 * h, cfg.dt_min);
      streak = 0;
      ++res.rejected;
      continue;
    }
    state = std::move(next);
    bundle = std::move(nbundle);
    rec = nrec;
    ++steps;
    ++res.accepted;
    emit(rec, h);
    if (++streak >= 20) {
      dt = std::min(2.0 * dt, cfg.dt);
      streak = 0;
    }
  }
  res.final_state = state;
  return res;
}

}  // namespace s3flow
