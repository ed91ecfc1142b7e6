#include "s3flow/shadow.hpp"

#include "s3flow/errors.hpp"

#include <algorithm>
#include <cmath>

namespace s3flow {

ShadowModel::ShadowModel(const SpectralField& f) : f_(f), lap_(s3flow::laplacian(f)) {
  for (int i = 0; i < 4; ++i)
    grad_[i] = gradient_inner(f, SpectralField::coordinate(i), std::max(f.band_limit(), 1) + 1);
}

double ShadowModel::value(const Vec4& p) const { return evaluate_at(f_, p); }

Vec4 ShadowModel::gradient(const Vec4& p) const {
  Vec4 g;
  for (int i = 0; i < 4; ++i) g[i] = evaluate_at(grad_[i], p);
  return g;
}

double ShadowModel::laplacian(const Vec4& p) const { return evaluate_at(lap_, p); }

ShadowDerivative ShadowModel::rhs(const ShadowState& s) const {
  // RK stages leave the sphere slightly; f is read at the radial projection
  const Vec4 q = s.p.normalized();
  const double alpha = 2.0 / value(q);
  ShadowDerivative d;
  d.dp = 32.0 / 3.0 * alpha * s.eps * s.eps * gradient(q);
  d.deps = 16.0 * alpha * s.eps * s.eps * s.eps * laplacian(q);
  d.ds = std::min(0.5, s.eps * s.eps);
  return d;
}

ShadowDerivative shadow_rhs(const ShadowState& state, const SpectralField& f) {
  return ShadowModel(f).rhs(state);
}

namespace {

ShadowState advance(const ShadowState& s, const ShadowDerivative& d, double h) {
  ShadowState o = s;
  o.p = s.p + h * d.dp;
  o.eps = s.eps + h * d.deps;
  o.s = s.s + h * d.ds;
  o.t = s.t + h;
  return o;
}

}  // namespace

ShadowTrajectory integrate_shadow(const ShadowState& init, const SpectralField& f, double horizon,
                                  double dt) {
  if (!(dt > 0)) throw ParameterError("dt must be positive");
  if (!(std::abs(init.p.norm() - 1.0) <= 1e-12)) throw ParameterError("p must be a unit vector");
  const ShadowModel model(f);
  ShadowTrajectory out;
  out.states.push_back(init);
  ShadowState s = init;
  const double t_end = init.t + horizon;
  while (s.t < t_end - 1e-12 * std::max(1.0, std::abs(t_end))) {
    const double h = std::min(dt, t_end - s.t);
    const ShadowDerivative k1 = model.rhs(s);
    const ShadowState s2 = advance(s, k1, h / 2);
    if (!(s2.eps > 0 && s2.eps < 1)) { out.truncated = true; break; }
    const ShadowDerivative k2 = model.rhs(s2);
    const ShadowState s3 = advance(s, k2, h / 2);
    if (!(s3.eps > 0 && s3.eps < 1)) { out.truncated = true; break; }
    const ShadowDerivative k3 = model.rhs(s3);
    const ShadowState s4 = advance(s, k3, h);
    if (!(s4.eps > 0 && s4.eps < 1)) { out.truncated = true; break; }
    const ShadowDerivative k4 = model.rhs(s4);
    ShadowDerivative k;
    k.dp = (k1.dp + 2 * k2.dp + 2 * k3.dp + k4.dp) / 6.0;
    k.deps = (k1.deps + 2 * k2.deps + 2 * k3.deps + k4.deps) / 6.0;
    k.ds = (k1.ds + 2 * k2.ds + 2 * k3.ds + k4.ds) / 6.0;
    ShadowState next = advance(s, k, h);
    next.p.normalize();
    if (!(next.eps > 0 && next.eps < 1)) { out.truncated = true; break; }
    s = next;
    out.states.push_back(s);
  }
  return out;
}

double geodesic_distance(const Vec4& a, const Vec4& b) {
  // accurate for nearby and for nearly antipodal points
  return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
}

std::optional<ShadowState> shadow_start(const std::vector<DiagnosticsRecord>& flow,
                                        double eps_window) {
  for (const auto& r : flow)
    if (r.p && r.eps && *r.eps <= eps_window) {
      ShadowState s;
      s.p = r.p->normalized();
      s.eps = *r.eps;
      s.t = r.t;
      return s;
    }
  return std::nullopt;
}

ComparisonReport compare_with_full_flow(const std::vector<DiagnosticsRecord>& flow,
                                        const ShadowTrajectory& shadow, double eps_window) {
  ComparisonReport rep;
  const auto& st = shadow.states;
  if (st.empty()) return rep;
  std::size_t j = 0;
  for (const auto& r : flow) {
    if (!r.p || !r.eps || *r.eps > eps_window) continue;
    const double slack = 1e-9 * std::max(1.0, std::abs(r.t));
    if (r.t < st.front().t - slack || r.t > st.back().t + slack) continue;
    while (j + 1 < st.size() && st[j + 1].t < r.t) ++j;
    ShadowState a = st[j];
    if (j + 1 < st.size()) {
      const ShadowState& b = st[j + 1];
      const double u = b.t > a.t ? std::clamp((r.t - a.t) / (b.t - a.t), 0.0, 1.0) : 0.0;
      a.p = ((1 - u) * a.p + u * b.p).normalized();
      a.eps = (1 - u) * a.eps + u * b.eps;
    }
    if (rep.empty) rep.window_start = r.t;
    rep.empty = false;
    rep.window_end = r.t;
    ++rep.samples;
    rep.max_geodesic = std::max(rep.max_geodesic, geodesic_distance(a.p, *r.p));
    rep.max_rel_eps = std::max(rep.max_rel_eps, std::abs(a.eps - *r.eps) / *r.eps);
  }
  return rep;
}

}  // namespace s3flow
