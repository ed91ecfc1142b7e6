#include "s3flow/morse.hpp"

#include "s3flow/beckner.hpp"
#include "s3flow/errors.hpp"
#include "s3flow/mobius.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace s3flow {

void MorseDatum::validate() const {
  if (morse_index < 0 || morse_index > 3)
    throw ParameterError(fmt::format("morse index {} outside [0, 3]", morse_index));
  if (!(value > 0)) throw ParameterError(fmt::format("critical value {} must be positive", value));
}

MorseCounts compute_counts(const std::vector<MorseDatum>& data) {
  MorseCounts m{};
  for (const MorseDatum& d : data)
    if (d.laplacian_negative) ++m[3 - d.morse_index];
  return m;
}

SystemSolution solve_system(const MorseCounts& m) {
  MorseWitness k{};
  k[0] = m[0] - 1;
  k[1] = m[1] - k[0];
  k[2] = m[2] - k[1];
  k[3] = 0;
  SystemSolution s;
  s.feasible = k[0] >= 0 && k[1] >= 0 && k[2] >= 0 && m[3] == k[2];
  if (s.feasible) s.witness = k;
  return s;
}

int degree_sum(const std::vector<MorseDatum>& data) {
  int s = 0;
  for (const MorseDatum& d : data)
    if (d.laplacian_negative) s += d.morse_index % 2 == 0 ? 1 : -1;
  return s;
}

int degree_sum(const MorseCounts& m) { return -m[0] + m[1] - m[2] + m[3]; }

bool morse_polynomial_check(const MorseCounts& m, const MorseWitness& k) {
  for (int v : k)
    if (v < 0) return false;
  // 1 + (1 + t) sum t^i k_i has degree up to 4; the t^4 coefficient is k3.
  std::array<int, 5> rhs{};
  rhs[0] = 1;
  for (int i = 0; i < 4; ++i) {
    rhs[i] += k[i];
    rhs[i + 1] += k[i];
  }
  for (int i = 0; i < 4; ++i)
    if (rhs[i] != m[i]) return false;
  return rhs[4] == 0;
}

double beta_value(double f_value) {
  if (!(f_value > 0)) throw PositivityError("beta needs a positive critical value");
  return -16.0 * kPi * kPi / 3.0 * std::log(f_value);
}

std::vector<std::string> equal_value_warnings(const std::vector<MorseDatum>& data, double rel) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t j = i + 1; j < data.size(); ++j) {
      const double a = data[i].value, b = data[j].value;
      if (std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)))
        out.push_back(fmt::format("critical points {} and {} share the value {:.17g}", i, j, a));
    }
  return out;
}

MorseReport morse_report(const std::vector<MorseDatum>& data) {
  for (const MorseDatum& d : data) d.validate();
  MorseReport r;
  r.m = compute_counts(data);
  const SystemSolution s = solve_system(r.m);
  r.feasible = s.feasible;
  r.witness = s.witness;
  r.degree_sum = degree_sum(data);
  r.theorem_existence = !r.feasible;
  r.corollary_existence = r.degree_sum != -1;
  for (const MorseDatum& d : data)
    if (d.laplacian_negative) r.beta.push_back(beta_value(d.value));
  r.warnings = equal_value_warnings(data);
  return r;
}

namespace {

struct CriticalSearch {
  SpectralField f, lap;
  std::array<SpectralField, 4> grad;

  explicit CriticalSearch(const SpectralField& field) : f(field), lap(laplacian(field)) {
    const int k = std::max(field.band_limit(), 1) + 1;
    for (int i = 0; i < 4; ++i) grad[i] = gradient_inner(field, SpectralField::coordinate(i), k);
  }

  Vec4 gradient(const Vec4& x) const {
    Vec4 g;
    for (int i = 0; i < 4; ++i) g[i] = evaluate_at(grad[i], x);
    return g - g.dot(x) * x;
  }

  // chart y -> (p + E y) / |p + E y| around p with tangent frame E
  Eigen::Vector3d chart_gradient(const Vec4& p, const Eigen::Matrix<double, 4, 3>& E,
                                 const Eigen::Vector3d& y) const {
    const Vec4 q = p + E * y;
    const double r = q.norm();
    return E.transpose() * gradient(q / r) / r;
  }

  Eigen::Matrix3d hessian(const Vec4& p, const Eigen::Matrix<double, 4, 3>& E, double h) const {
    Eigen::Matrix3d H;
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector3d e = Eigen::Vector3d::Unit(k) * h;
      H.col(k) = (chart_gradient(p, E, e) - chart_gradient(p, E, -e)) / (2 * h);
    }
    return 0.5 * (H + H.transpose());
  }
};

Eigen::Matrix<double, 4, 3> tangent_frame(const Vec4& p) {
  return adapted_frame(p).leftCols<3>();
}

std::string describe(const Vec4& x, const char* why) {
  return fmt::format("({:.9f}, {:.9f}, {:.9f}, {:.9f}): {}", x[0], x[1], x[2], x[3], why);
}

}  // namespace

std::vector<MorseDatum> extract_morse_data(const SpectralField& f, const MorseExtractOptions& opt) {
  const CriticalSearch cs(f);
  const GridPtr g = build_grid(std::max(8, 2 * f.band_limit()));
  const GridField fv = synthesize(f, g);
  double fnorm = 0.0;
  for (double v : fv.values) {
    if (!(v > 0)) throw PositivityError("f must be positive for the Morse gate");
    fnorm = std::max(fnorm, std::abs(v));
  }

  std::vector<double> g2(g->size(), 0.0);
  for (int i = 0; i < 4; ++i) {
    const GridField gi = synthesize(cs.grad[i], g);
    for (std::size_t n = 0; n < g2.size(); ++n) g2[n] += gi.values[n] * gi.values[n];
  }
  const double g2max = *std::max_element(g2.begin(), g2.end());
  if (g2max < 1e-24 * fnorm * fnorm)
    throw HypothesisViolation("f is constant: every point is critical", {"all of S^3"});

  // seeds: strict local minima of |grad f|^2 in the (chi, theta, phi) index neighbourhood
  const int nc = g->n_chi(), nt = g->n_theta(), np = g->n_phi();
  auto node = [&](int i, int j, int k) { return (std::size_t(i) * nt + j) * np + ((k + np) % np); };
  std::vector<Vec4> seeds;
  for (int i = 0; i < nc; ++i)
    for (int j = 0; j < nt; ++j)
      for (int k = 0; k < np; ++k) {
        const double v = g2[node(i, j, k)];
        bool is_min = true, strict = false;
        for (int di = -1; di <= 1 && is_min; ++di)
          for (int dj = -1; dj <= 1 && is_min; ++dj)
            for (int dk = -1; dk <= 1; ++dk) {
              const int ii = i + di, jj = j + dj;
              if (ii < 0 || ii >= nc || jj < 0 || jj >= nt || (di == 0 && dj == 0 && dk == 0)) continue;
              const double u = g2[node(ii, jj, k + dk)];
              if (u < v) { is_min = false; break; }
              if (u > v) strict = true;
            }
        if (is_min && strict) seeds.push_back(g->point(node(i, j, k)));
      }

  std::vector<Vec4> found;
  std::vector<MorseDatum> out;
  std::vector<std::string> offenders;
  const double gtol = opt.gradient_tol * std::max(1.0, fnorm);
  for (Vec4 p : seeds) {
    bool converged = false;
    for (int it = 0; it < opt.max_newton; ++it) {
      const auto E = tangent_frame(p);
      const Eigen::Vector3d G = E.transpose() * cs.gradient(p);
      if (G.norm() < gtol) { converged = true; break; }
      const Eigen::Matrix3d H = cs.hessian(p, E, opt.fd_step);
      Eigen::Vector3d y = H.fullPivLu().solve(-G);
      if (!y.allFinite()) break;
      if (y.norm() > 0.5) y *= 0.5 / y.norm();
      p = (p + E * y).normalized();
    }
    if (!converged) continue;
    bool dup = false;
    for (const Vec4& q : found)
      if ((q - p).norm() < opt.dedupe_distance) { dup = true; break; }
    if (dup) continue;
    found.push_back(p);

    const auto E = tangent_frame(p);
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cs.hessian(p, E, opt.fd_step));
    const Eigen::Vector3d lam = es.eigenvalues();
    const double amax = lam.cwiseAbs().maxCoeff(), amin = lam.cwiseAbs().minCoeff();
    const double lap = evaluate_at(cs.lap, p);
    if (!(amin > 0) || amax / amin > opt.condition_limit)
      offenders.push_back(describe(p, "degenerate Hessian"));
    if (std::abs(lap) < opt.laplacian_rel * fnorm) offenders.push_back(describe(p, "vanishing Laplacian"));

    MorseDatum d;
    d.morse_index = int((lam.array() < 0).count());
    d.laplacian_negative = lap < 0;
    d.value = evaluate_at(f, p);
    d.location = p;
    d.laplacian = lap;
    out.push_back(d);
  }
  if (!offenders.empty())
    throw HypothesisViolation(fmt::format("{} degenerate critical point(s)", offenders.size()),
                              std::move(offenders));
  std::sort(out.begin(), out.end(), [](const MorseDatum& a, const MorseDatum& b) { return a.value > b.value; });
  return out;
}

std::vector<MorseDatum> morse_data_from_json(const nlohmann::json& j) {
  const nlohmann::json& list = j.is_object() ? j.at("points") : j;
  if (!list.is_array()) throw UsageError("Morse data must be a list of records");
  std::vector<MorseDatum> out;
  for (const auto& r : list) {
    MorseDatum d;
    try {
      d.morse_index = r.at("index").get<int>();
      if (r.contains("laplacian_negative"))
        d.laplacian_negative = r.at("laplacian_negative").get<bool>();
      else
        d.laplacian_negative = r.at("laplacian_sign").get<double>() < 0;
      d.value = r.at("value").get<double>();
      if (r.contains("location")) {
        const auto v = r.at("location").get<std::vector<double>>();
        if (v.size() != 4) throw UsageError("location needs four coordinates");
        d.location = Vec4(v[0], v[1], v[2], v[3]);
      }
      if (r.contains("laplacian")) d.laplacian = r.at("laplacian").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(fmt::format("bad Morse record {}: {}", r.dump(), e.what()));
    }
    d.validate();
    out.push_back(d);
  }
  return out;
}

nlohmann::json to_json(const MorseDatum& d) {
  nlohmann::json j{{"index", d.morse_index}, {"laplacian_negative", d.laplacian_negative}, {"value", d.value}};
  if (d.location) j["location"] = {(*d.location)[0], (*d.location)[1], (*d.location)[2], (*d.location)[3]};
  if (d.laplacian) j["laplacian"] = *d.laplacian;
  return j;
}

nlohmann::json to_json(const MorseReport& r) {
  nlohmann::json j{{"m", r.m},
                   {"feasible", r.feasible},
                   {"witness", nullptr},
                   {"degree_sum", r.degree_sum},
                   {"theorem_existence", r.theorem_existence},
                   {"corollary_existence", r.corollary_existence},
                   {"beta", r.beta},
                   {"warnings", r.warnings}};
  if (r.witness) j["witness"] = *r.witness;
  return j;
}

}  // namespace s3flow
