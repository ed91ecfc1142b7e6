#include "s3flow/spectral.hpp"

#include "s3flow/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>

namespace s3flow {

namespace {

std::size_t tri(int k) { return std::size_t(k) * std::size_t(k + 1) / 2; }

std::size_t degree_offset(int k) {
  return std::size_t(k) * std::size_t(k + 1) * std::size_t(2 * k + 1) / 6;
}

// Normalized radial profiles R_{k,l}(chi) for 0 <= l <= k <= L, given cos and sin of chi.
void radial_profiles(double c, double s, int L, double* out) {
  double start = std::sqrt(2.0 / kPi);
  for (int l = 0; l <= L; ++l) {
    const double lambda = l + 1.0;
    auto a = [lambda](int n) {
      return 0.5 * std::sqrt(n * (n + 2.0 * lambda - 1.0) / ((n + lambda) * (n + lambda - 1.0)));
    };
    double prev = 0.0;
    double cur = start;
    out[tri(l) + l] = cur;
    for (int n = 0; l + n + 1 <= L; ++n) {
      const double next = (c * cur - (n > 0 ? a(n) * prev : 0.0)) / a(n + 1);
      prev = cur;
      cur = next;
      out[tri(l + n + 1) + l] = cur;
    }
    start *= s * std::sqrt((l + 2.0) / (l + 1.5));
  }
}

// Orthonormal associated Legendre functions on S^2 (no Condon-Shortley phase), m >= 0.
void legendre_table(double ct, double st, int L, double* out) {
  double pmm = 1.0 / std::sqrt(4.0 * kPi);
  for (int m = 0; m <= L; ++m) {
    if (m > 0) pmm *= std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * st;
    out[tri(m) + m] = pmm;
    if (m + 1 > L) break;
    double p1 = std::sqrt(2.0 * m + 3.0) * ct * pmm;
    out[tri(m + 1) + m] = p1;
    double p0 = pmm;
    for (int l = m + 2; l <= L; ++l) {
      const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
      const double b = std::sqrt((double(l - 1) * (l - 1) - double(m) * m) /
                                 (4.0 * (l - 1) * (l - 1) - 1.0));
      const double p2 = a * (ct * p1 - b * p0);
      out[tri(l) + m] = p2;
      p0 = p1;
      p1 = p2;
    }
  }
}

// trig factor indexed by m + L, m in [-L, L].
void trig_table(double phi, int L, double* out) {
  out[L] = 1.0;
  for (int m = 1; m <= L; ++m) {
    out[L + m] = std::sqrt(2.0) * std::cos(m * phi);
    out[L - m] = std::sqrt(2.0) * std::sin(m * phi);
  }
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace

// ---- indexing -------------------------------------------------------------

int HarmonicIndex::l() const {
  int l = 0;
  while ((l + 1) * (l + 1) < ell) ++l;
  return l;
}

int HarmonicIndex::m() const {
  const int ll = l();
  return ell - 1 - ll * ll - ll;
}

std::size_t harmonic_count(int band_limit) {
  if (band_limit < 0) return 0;
  return degree_offset(band_limit + 1);
}

std::size_t flat_index(HarmonicIndex idx) { return degree_offset(idx.k) + std::size_t(idx.ell - 1); }

std::size_t flat_index(int k, int l, int m) {
  return degree_offset(k) + std::size_t(l * l + l + m);
}

HarmonicIndex harmonic_index(std::size_t flat) {
  int k = 0;
  while (degree_offset(k + 1) <= flat) ++k;
  return {k, int(flat - degree_offset(k)) + 1};
}

// ---- SpectralField --------------------------------------------------------

SpectralField::SpectralField(int band_limit)
    : band_limit_(band_limit), coeffs_(harmonic_count(band_limit), 0.0) {
  if (band_limit < 0) throw ParameterError("band limit must be non-negative");
}

SpectralField::SpectralField(int band_limit, std::vector<double> coeffs)
    : band_limit_(band_limit), coeffs_(std::move(coeffs)) {
  if (band_limit < 0) throw ParameterError("band limit must be non-negative");
  if (coeffs_.size() != harmonic_count(band_limit))
    throw ParameterError(fmt::format("expected {} coefficients for band limit {}, got {}",
                                     harmonic_count(band_limit), band_limit, coeffs_.size()));
}

SpectralField SpectralField::constant(double value, int band_limit) {
  SpectralField u(band_limit);
  u.coeffs_[0] = value * std::sqrt(kVolS3);
  return u;
}

SpectralField SpectralField::coordinate(int i, int band_limit) {
  if (i < 0 || i > 3) throw ParameterError("coordinate index must be 0..3");
  SpectralField u(std::max(band_limit, 1));
  // ell order within degree 1 is (x4, x2, x3, x1).
  static constexpr int kEll[4] = {4, 2, 3, 1};
  u.at({1, kEll[i]}) = kPi / std::sqrt(2.0);
  return u;
}

SpectralField SpectralField::unit(HarmonicIndex idx, int band_limit) {
  SpectralField u(band_limit < 0 ? idx.k : band_limit);
  u.at(idx) = 1.0;
  return u;
}

double SpectralField::at(HarmonicIndex idx) const {
  const std::size_t i = flat_index(idx);
  return i < coeffs_.size() ? coeffs_[i] : 0.0;
}

double& SpectralField::at(HarmonicIndex idx) {
  const std::size_t i = flat_index(idx);
  if (i >= coeffs_.size()) throw ResolutionError("harmonic index beyond band limit");
  return coeffs_[i];
}

SpectralField SpectralField::resized(int band_limit) const {
  SpectralField out(band_limit);
  const std::size_t n = std::min(out.size(), size());
  std::copy_n(coeffs_.begin(), n, out.coeffs_.begin());
  return out;
}

double SpectralField::mean() const { return coeffs_[0] / std::sqrt(kVolS3); }

double SpectralField::l2_norm_sq() const {
  double s = 0.0;
  for (double c : coeffs_) s += c * c;
  return s;
}

double SpectralField::max_abs() const {
  double s = 0.0;
  for (double c : coeffs_) s = std::max(s, std::abs(c));
  return s;
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  if (other.band_limit_ > band_limit_) *this = resized(other.band_limit_);
  for (std::size_t i = 0; i < other.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  if (other.band_limit_ > band_limit_) *this = resized(other.band_limit_);
  for (std::size_t i = 0; i < other.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

double inner(const SpectralField& a, const SpectralField& b) {
  const std::size_t n = std::min(a.size(), b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// ---- grid -----------------------------------------------------------------

QuadratureGrid::QuadratureGrid(int k_design)
    : k_design_(k_design), n_chi_(k_design + 1), n_theta_(k_design + 1), n_phi_(2 * k_design + 1) {
  if (k_design < 0) throw ParameterError("design degree must be non-negative");
  const int L = k_design;

  chi_.resize(n_chi_);
  w_chi_.resize(n_chi_);
  for (int j = 0; j < n_chi_; ++j) {
    chi_[j] = (j + 1) * kPi / (n_chi_ + 1);
    const double s = std::sin(chi_[j]);
    w_chi_[j] = kPi / (n_chi_ + 1) * s * s;
  }

  std::vector<double> t;
  gauss_legendre(n_theta_, t, w_theta_);
  theta_.resize(n_theta_);
  for (int j = 0; j < n_theta_; ++j) theta_[j] = std::acos(t[j]);

  phi_.resize(n_phi_);
  for (int j = 0; j < n_phi_; ++j) phi_[j] = 2.0 * kPi * j / n_phi_;
  w_phi_ = 2.0 * kPi / n_phi_;

  points_.reserve(size_t(n_chi_) * n_theta_ * n_phi_);
  weights_.reserve(points_.capacity());
  for (int i = 0; i < n_chi_; ++i) {
    const double sc = std::sin(chi_[i]), cc = std::cos(chi_[i]);
    for (int j = 0; j < n_theta_; ++j) {
      const double st = std::sin(theta_[j]), ct = std::cos(theta_[j]);
      for (int k = 0; k < n_phi_; ++k) {
        points_.emplace_back(sc * st * std::cos(phi_[k]), sc * st * std::sin(phi_[k]), sc * ct, cc);
        weights_.push_back(w_chi_[i] * w_theta_[j] * w_phi_);
      }
    }
  }

  const std::size_t nr = tri(L + 1);
  radial_.resize(n_chi_ * nr);
  for (int i = 0; i < n_chi_; ++i)
    radial_profiles(std::cos(chi_[i]), std::sin(chi_[i]), L, &radial_[i * nr]);
  legendre_.resize(n_theta_ * nr);
  for (int j = 0; j < n_theta_; ++j)
    legendre_table(std::cos(theta_[j]), std::sin(theta_[j]), L, &legendre_[j * nr]);
  const std::size_t nt = 2 * L + 1;
  trig_.resize(n_phi_ * nt);
  for (int k = 0; k < n_phi_; ++k) trig_table(phi_[k], L, &trig_[k * nt]);
}

GridPtr build_grid(int k_design) {
  static std::mutex mutex;
  static std::map<int, GridPtr> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(k_design);
  if (it != cache.end()) return it->second;
  auto grid = std::make_shared<const QuadratureGrid>(k_design);
  cache.emplace(k_design, grid);
  return grid;
}

GridField::GridField(GridPtr g, double fill) : grid(std::move(g)), values(grid->size(), fill) {}

GridField::GridField(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid->size()) throw ParameterError("grid value count mismatch");
}

double GridField::integrate() const {
  double s = 0.0;
  const auto w = grid->weights();
  for (std::size_t i = 0; i < values.size(); ++i) s += w[i] * values[i];
  return s;
}

double GridField::min() const { return *std::min_element(values.begin(), values.end()); }
double GridField::max() const { return *std::max_element(values.begin(), values.end()); }

double GridField::max_abs() const {
  double s = 0.0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

// ---- transforms -----------------------------------------------------------

GridField synthesize(const SpectralField& u, const GridPtr& grid) {
  const int K = u.band_limit();
  const QuadratureGrid& g = *grid;
  if (K > g.k_design_)
    throw ResolutionError(fmt::format("band limit {} exceeds grid design degree {}", K,
                                      g.k_design_));
  const int L = g.k_design_;
  const std::size_t nr = tri(L + 1);
  const std::size_t nt = 2 * L + 1;
  const std::size_t nlm = std::size_t(K + 1) * (K + 1);

  // G[i][lm] = sum_k R_{k,l}(chi_i) c_{k,l,m}
  std::vector<double> G(g.n_chi_ * nlm, 0.0);
  for (int i = 0; i < g.n_chi_; ++i) {
    const double* R = &g.radial_[i * nr];
    double* Gi = &G[i * nlm];
    for (int k = 0; k <= K; ++k) {
      const std::size_t off = degree_offset(k);
      for (int l = 0; l <= k; ++l) {
        const double r = R[tri(k) + l];
        for (int m = -l; m <= l; ++m) Gi[l * l + l + m] += r * u[off + l * l + l + m];
      }
    }
  }

  // F[i][j][m] = sum_l P_{l,|m|}(theta_j) G[i][lm]
  const std::size_t nm = 2 * K + 1;
  std::vector<double> F(std::size_t(g.n_chi_) * g.n_theta_ * nm, 0.0);
  for (int i = 0; i < g.n_chi_; ++i) {
    const double* Gi = &G[i * nlm];
    for (int j = 0; j < g.n_theta_; ++j) {
      const double* P = &g.legendre_[j * nr];
      double* Fij = &F[(std::size_t(i) * g.n_theta_ + j) * nm];
      for (int l = 0; l <= K; ++l)
        for (int m = -l; m <= l; ++m) Fij[m + K] += P[tri(l) + std::abs(m)] * Gi[l * l + l + m];
    }
  }

  GridField out(grid);
  for (int ij = 0; ij < g.n_chi_ * g.n_theta_; ++ij) {
    const double* Fij = &F[ij * nm];
    for (int k = 0; k < g.n_phi_; ++k) {
      const double* T = &g.trig_[k * nt + L];
      double s = 0.0;
      for (int m = -K; m <= K; ++m) s += T[m] * Fij[m + K];
      out.values[std::size_t(ij) * g.n_phi_ + k] = s;
    }
  }
  return out;
}

SpectralField analyze(const GridField& v, int band_limit) {
  const QuadratureGrid& g = *v.grid;
  const int K = band_limit;
  if (K < 0) throw ParameterError("band limit must be non-negative");
  if (K > g.k_design_)
    throw ResolutionError(fmt::format("band limit {} exceeds grid design degree {}", K,
                                      g.k_design_));
  const int L = g.k_design_;
  const std::size_t nr = tri(L + 1);
  const std::size_t nt = 2 * L + 1;
  const std::size_t nm = 2 * K + 1;
  const std::size_t nlm = std::size_t(K + 1) * (K + 1);

  std::vector<double> F(std::size_t(g.n_chi_) * g.n_theta_ * nm, 0.0);
  for (int ij = 0; ij < g.n_chi_ * g.n_theta_; ++ij) {
    double* Fij = &F[ij * nm];
    for (int k = 0; k < g.n_phi_; ++k) {
      const double val = g.w_phi_ * v.values[std::size_t(ij) * g.n_phi_ + k];
      const double* T = &g.trig_[k * nt + L];
      for (int m = -K; m <= K; ++m) Fij[m + K] += val * T[m];
    }
  }

  std::vector<double> G(g.n_chi_ * nlm, 0.0);
  for (int i = 0; i < g.n_chi_; ++i) {
    double* Gi = &G[i * nlm];
    for (int j = 0; j < g.n_theta_; ++j) {
      const double* P = &g.legendre_[j * nr];
      const double* Fij = &F[(std::size_t(i) * g.n_theta_ + j) * nm];
      const double wt = g.w_theta_[j];
      for (int l = 0; l <= K; ++l)
        for (int m = -l; m <= l; ++m)
          Gi[l * l + l + m] += wt * P[tri(l) + std::abs(m)] * Fij[m + K];
    }
  }

  SpectralField out(K);
  for (int i = 0; i < g.n_chi_; ++i) {
    const double* R = &g.radial_[i * nr];
    const double* Gi = &G[i * nlm];
    const double wc = g.w_chi_[i];
    for (int k = 0; k <= K; ++k) {
      const std::size_t off = degree_offset(k);
      for (int l = 0; l <= k; ++l) {
        const double r = wc * R[tri(k) + l];
        for (int m = -l; m <= l; ++m) out[off + l * l + l + m] += r * Gi[l * l + l + m];
      }
    }
  }
  return out;
}

std::vector<double> evaluate_at(const SpectralField& u, std::span<const Vec4> points) {
  const int K = u.band_limit();
  const std::size_t nr = tri(K + 1);
  std::vector<double> R(nr), P(nr), T(2 * K + 1), ST(std::size_t(K + 1) * (K + 1));
  std::vector<double> out;
  out.reserve(points.size());
  for (const Vec4& x : points) {
    if (!(std::abs(x.norm() - 1.0) <= 1e-12))
      throw DomainError(fmt::format("evaluation point has norm {:.17g}", x.norm()));
    const double s = std::hypot(std::hypot(x[0], x[1]), x[2]);
    double ct = 1.0, st = 0.0, phi = 0.0;
    if (s > 0.0) {
      ct = x[2] / s;
      st = std::hypot(x[0], x[1]) / s;
      phi = std::atan2(x[1], x[0]);
    }
    radial_profiles(x[3], s, K, R.data());
    legendre_table(ct, st, K, P.data());
    trig_table(phi, K, T.data());
    for (int l = 0; l <= K; ++l)
      for (int m = -l; m <= l; ++m) ST[l * l + l + m] = P[tri(l) + std::abs(m)] * T[m + K];
    double sum = 0.0;
    for (int k = 0; k <= K; ++k) {
      const std::size_t off = degree_offset(k);
      for (int l = 0; l <= k; ++l) {
        double a = 0.0;
        for (int m = -l; m <= l; ++m) a += ST[l * l + l + m] * u[off + l * l + l + m];
        sum += R[tri(k) + l] * a;
      }
    }
    out.push_back(sum);
  }
  return out;
}

double evaluate_at(const SpectralField& u, const Vec4& point) {
  return evaluate_at(u, std::span<const Vec4>(&point, 1))[0];
}

SpectralField laplacian(const SpectralField& u) {
  SpectralField out = u;
  for (int k = 0; k <= u.band_limit(); ++k) {
    const double lam = -laplace_eigenvalue(k);
    for (std::size_t i = degree_offset(k); i < degree_offset(k + 1); ++i) out[i] *= lam;
  }
  return out;
}

SpectralField gradient_inner(const SpectralField& a, const SpectralField& b,
                             std::optional<int> k_out) {
  const int Kt = a.band_limit() + b.band_limit();
  const GridPtr grid = build_grid(std::max(Kt, 1));
  const GridField ag = synthesize(a, grid), bg = synthesize(b, grid);
  const GridField lag = synthesize(laplacian(a), grid), lbg = synthesize(laplacian(b), grid);
  GridField prod(grid), mixed(grid);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    prod.values[i] = ag.values[i] * bg.values[i];
    mixed.values[i] = ag.values[i] * lbg.values[i] + bg.values[i] * lag.values[i];
  }
  SpectralField out = laplacian(analyze(prod, Kt)) - analyze(mixed, Kt);
  out *= 0.5;
  if (k_out) out = out.resized(*k_out);
  return out;
}

SpectralField random_field(int band_limit, double amplitude, double decay, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralField u(band_limit);
  for (int k = 1; k <= band_limit; ++k) {
    const double scale = amplitude * std::pow(decay, k);
    for (std::size_t i = degree_offset(k); i < degree_offset(k + 1); ++i) u[i] = scale * normal(rng);
  }
  return u;
}

SpectralField rotate(const SpectralField& u, const Eigen::Matrix4d& rotation) {
  const GridPtr grid = build_grid(u.band_limit());
  std::vector<Vec4> pulled(grid->size());
  for (std::size_t i = 0; i < grid->size(); ++i) {
    pulled[i] = rotation.transpose() * grid->point(i);
    pulled[i].normalize();
  }
  return analyze(GridField(grid, evaluate_at(u, pulled)), u.band_limit());
}

}  // namespace s3flow
