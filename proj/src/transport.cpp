#include "wlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>

#include "wlab/forms.hpp"
#include "wlab/semigroup.hpp"

namespace wlab {

namespace {

constexpr double kPi = std::numbers::pi;

void check_density_pair(const DensityField& a, const DensityField& b, const ModelSpace& space,
                        const MeasureField& mu) {
  if (a.size() != space.size() || b.size() != space.size() || mu.mu_weights.size() != space.size())
    throw std::invalid_argument("density/space/measure size mismatch");
  double ma = 0.0, mb = 0.0;
  for (std::size_t k = 0; k < space.size(); ++k) {
    ma += a.rho[k] * mu.mu_weights[k];
    mb += b.rho[k] * mu.mu_weights[k];
  }
  if (std::abs(ma - 1.0) > 1e-8 || std::abs(mb - 1.0) > 1e-8)
    throw std::invalid_argument("densities must be normalized against mu");
}

// ---------------------------------------------------------------- 1D core

// Exact W2^2 between two measures that are piecewise uniform on the common
// cells [edges[j], edges[j+1]): merge the CDF breakpoints in mass space and
// integrate the squared quantile difference segment by segment.
double line_w2_squared(const std::vector<double>& m0, const std::vector<double>& m1,
                       const std::vector<double>& edges) {
  std::size_t N = m0.size();
  std::vector<double> c0(N + 1, 0.0), c1(N + 1, 0.0);
  for (std::size_t j = 0; j < N; ++j) {
    c0[j + 1] = c0[j] + m0[j];
    c1[j + 1] = c1[j] + m1[j];
  }
  // guard against rounding drift at the top
  c0[N] = c1[N] = std::min(c0[N], c1[N]);

  auto quantile_on = [&](const std::vector<double>& c, std::size_t cell, double m) {
    double len = edges[cell + 1] - edges[cell];
    double mass = c[cell + 1] - c[cell];
    if (mass <= 0.0) return edges[cell + 1];
    return edges[cell] + (m - c[cell]) * len / mass;
  };

  double total = 0.0;
  std::size_t i0 = 0, i1 = 0;
  double m = 0.0;
  const double top = c0[N];
  while (m < top) {
    while (i0 < N && c0[i0 + 1] <= m + 1e-300) ++i0;
    while (i1 < N && c1[i1 + 1] <= m + 1e-300) ++i1;
    if (i0 >= N || i1 >= N) break;
    double m_next = std::min({c0[i0 + 1], c1[i1 + 1], top});
    if (m_next <= m) {
      m = m_next;
      continue;
    }
    double qa0 = quantile_on(c0, i0, m), qa1 = quantile_on(c1, i1, m);
    double qb0 = quantile_on(c0, i0, m_next), qb1 = quantile_on(c1, i1, m_next);
    double da = qa0 - qa1, db = qb0 - qb1, dm = (da + db) / 2.0;
    // Simpson: exact for the quadratic integrand
    total += (m_next - m) * (da * da + 4.0 * dm * dm + db * db) / 6.0;
    m = m_next;
  }
  return total;
}

// cell masses (rho * mu) for a density field
std::vector<double> cell_masses(const DensityField& rho, const MeasureField& mu) {
  std::vector<double> m(rho.size());
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = rho.rho[k] * mu.mu_weights[k];
  return m;
}

double circle_cut_cost(const std::vector<double>& m0, const std::vector<double>& m1, int cut,
                       double h) {
  int N = static_cast<int>(m0.size());
  std::vector<double> r0(N), r1(N), edges(N + 1);
  for (int j = 0; j < N; ++j) {
    r0[j] = m0[(cut + j) % N];
    r1[j] = m1[(cut + j) % N];
    edges[j] = j * h;  // positions relative to the cut
  }
  edges[N] = N * h;
  return line_w2_squared(r0, r1, edges);
}

// ------------------------------------------------------------- Sinkhorn

struct StageResult {
  double sharp_cost = 0.0;
  int iterations = 0;
  double marginal_error = 0.0;
};

// Stabilized scaling solver: potentials are absorbed into the kernel whenever
// the scaling factors leave the safe exponential range, so small eps is fine.
class SinkhornSolver {
 public:
  SinkhornSolver(const std::vector<double>& a, const std::vector<double>& b,
                 const std::vector<double>& cost)
      : a_(a), b_(b), C_(cost), na_(a.size()), nb_(b.size()), f_(na_, 0.0), g_(nb_, 0.0) {
    if (C_.size() != na_ * nb_) throw std::invalid_argument("cost matrix size mismatch");
  }

  StageResult run(double eps, int max_iter, double tol) {
    eps_ = eps;
    rebuild_kernel();
    std::vector<double> u(na_, 1.0), v(nb_, 1.0), row(na_), col(nb_);
    StageResult res;
    for (int it = 1; it <= max_iter; ++it) {
      // v-update then u-update; rows are exact after the u-update
      for (std::size_t j = 0; j < nb_; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < na_; ++i) s += K_[i * nb_ + j] * u[i] * a_[i];
        v[j] = s > 0.0 ? 1.0 / s : 1.0;
      }
      for (std::size_t i = 0; i < na_; ++i) {
        double s = 0.0;
        const double* Ki = &K_[i * nb_];
        for (std::size_t j = 0; j < nb_; ++j) s += Ki[j] * v[j] * b_[j];
        u[i] = s > 0.0 ? 1.0 / s : 1.0;
      }
      res.iterations = it;

      double lu = 0.0, lv = 0.0;
      for (double x : u) lu = std::max(lu, std::abs(std::log(x)));
      for (double x : v) lv = std::max(lv, std::abs(std::log(x)));
      if (lu > 40.0 || lv > 40.0) {
        absorb(u, v);
        continue;
      }
      if (it % 8 == 0 || it == max_iter) {
        double err = 0.0;
        for (std::size_t j = 0; j < nb_; ++j) {
          double s = 0.0;
          for (std::size_t i = 0; i < na_; ++i) s += K_[i * nb_ + j] * u[i] * a_[i];
          err += std::abs(s * v[j] * b_[j] - b_[j]);
        }
        if (err <= tol) {
          absorb(u, v);
          res.marginal_error = err;
          res.sharp_cost = sharp_cost();
          return res;
        }
        res.marginal_error = err;
      }
    }
    absorb(u, v);
    res.sharp_cost = sharp_cost();
    converged_ = false;
    return res;
  }

  bool converged() const { return converged_; }

 private:
  void absorb(std::vector<double>& u, std::vector<double>& v) {
    for (std::size_t i = 0; i < na_; ++i) f_[i] += eps_ * std::log(u[i]);
    for (std::size_t j = 0; j < nb_; ++j) g_[j] += eps_ * std::log(v[j]);
    rebuild_kernel();
    std::fill(u.begin(), u.end(), 1.0);
    std::fill(v.begin(), v.end(), 1.0);
  }

  void rebuild_kernel() {
    K_.resize(na_ * nb_);
    for (std::size_t i = 0; i < na_; ++i)
      for (std::size_t j = 0; j < nb_; ++j)
        K_[i * nb_ + j] = std::exp((f_[i] + g_[j] - C_[i * nb_ + j]) / eps_);
  }

  double sharp_cost() const {
    double s = 0.0;
    for (std::size_t i = 0; i < na_; ++i)
      for (std::size_t j = 0; j < nb_; ++j)
        s += a_[i] * K_[i * nb_ + j] * b_[j] * C_[i * nb_ + j];
    return s;
  }

  const std::vector<double>&a_, &b_, &C_;
  std::size_t na_, nb_;
  std::vector<double> f_, g_, K_;
  double eps_ = 1.0;
  bool converged_ = true;
};

double aitken(const std::vector<double>& v) {
  std::size_t n = v.size();
  if (n < 3) return v.back();
  double d1 = v[n - 2] - v[n - 3], d2 = v[n - 1] - v[n - 2];
  double den = d2 - d1;
  if (std::abs(den) < 1e-15 * (std::abs(d1) + std::abs(d2)) || den == 0.0) return v[n - 1];
  return v[n - 1] - d2 * d2 / den;
}

}  // namespace

std::vector<double> default_eps_schedule() {
  std::vector<double> eps(8);
  for (int k = 0; k < 8; ++k) eps[k] = 0.5 * std::pow(0.002 / 0.5, k / 7.0);
  return eps;
}

TransportResult w2_circle_exact(const DensityField& rho0, const DensityField& rho1,
                                const ModelSpace& space, const MeasureField& mu) {
  if (space.kind != SpaceKind::circle) throw std::invalid_argument("w2_circle_exact requires circle");
  check_density_pair(rho0, rho1, space, mu);
  auto m0 = cell_masses(rho0, mu);
  auto m1 = cell_masses(rho1, mu);
  int N = static_cast<int>(m0.size());
  double h = space.h[0];

  TransportResult res;
  res.method = TransportMethod::circle_exact;
  double best = std::numeric_limits<double>::infinity();
  int best_cut = 0;
  for (int c = 0; c < N; ++c) {
    double cost = circle_cut_cost(m0, m1, c, h);
    if (cost < best) {
      best = cost;
      best_cut = c;
    }
  }
  res.w2 = std::sqrt(std::max(best, 0.0));
  res.diag.cut_index = best_cut;
  res.diag.cut_theta = space.axes[0][best_cut] - 0.5 * h;
  return res;
}

TransportResult w2_monotone_1d(const DensityField& rho0, const DensityField& rho1,
                               const ModelSpace& space, const MeasureField& mu) {
  if (space.kind != SpaceKind::sphere_zonal)
    throw std::invalid_argument("w2_monotone_1d requires sphere_zonal");
  check_density_pair(rho0, rho1, space, mu);
  auto m0 = cell_masses(rho0, mu);
  auto m1 = cell_masses(rho1, mu);
  int N = static_cast<int>(m0.size());
  double h = space.h[0];
  std::vector<double> edges(N + 1);
  for (int j = 0; j <= N; ++j) edges[j] = j * h;
  TransportResult res;
  res.method = TransportMethod::monotone_1d;
  res.w2 = std::sqrt(std::max(line_w2_squared(m0, m1, edges), 0.0));
  return res;
}

std::vector<double> cost_matrix(const ModelSpace& space, CostKind cost) {
  if (cost != CostKind::geodesic_sq) throw std::invalid_argument("unsupported cost kind");
  std::size_t N = space.size();
  std::vector<double> C(N * N);
  switch (space.kind) {
    case SpaceKind::circle: {
      for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) {
          double d = std::abs(space.axes[0][i] - space.axes[0][j]);
          d = std::min(d, 2.0 * kPi - d);
          C[i * N + j] = d * d;
        }
      break;
    }
    case SpaceKind::torus2: {
      for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) {
          double dx = std::abs(space.coord(i, 0) - space.coord(j, 0));
          double dy = std::abs(space.coord(i, 1) - space.coord(j, 1));
          dx = std::min(dx, 2.0 * kPi - dx);
          dy = std::min(dy, 2.0 * kPi - dy);
          C[i * N + j] = dx * dx + dy * dy;
        }
      break;
    }
    case SpaceKind::sphere_zonal: {
      // meridian cost; the full-sphere cross-check uses sphere_full_grid_cost
      for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) {
          double d = space.axes[0][i] - space.axes[0][j];
          C[i * N + j] = d * d;
        }
      break;
    }
  }
  return C;
}

std::vector<double> sphere_full_grid_cost(int n_phi, int n_theta) {
  std::size_t N = static_cast<std::size_t>(n_phi) * n_theta;
  std::vector<double> theta(n_theta), phi(n_phi);
  for (int i = 0; i < n_theta; ++i) theta[i] = (i + 0.5) * kPi / n_theta;
  for (int j = 0; j < n_phi; ++j) phi[j] = 2.0 * kPi * j / n_phi;
  std::vector<double> C(N * N);
  for (int i1 = 0; i1 < n_theta; ++i1)
    for (int j1 = 0; j1 < n_phi; ++j1) {
      std::size_t p = static_cast<std::size_t>(i1) * n_phi + j1;
      for (int i2 = 0; i2 < n_theta; ++i2)
        for (int j2 = 0; j2 < n_phi; ++j2) {
          std::size_t q = static_cast<std::size_t>(i2) * n_phi + j2;
          double cosd = std::cos(theta[i1]) * std::cos(theta[i2]) +
                        std::sin(theta[i1]) * std::sin(theta[i2]) * std::cos(phi[j1] - phi[j2]);
          cosd = std::clamp(cosd, -1.0, 1.0);
          double d = std::acos(cosd);
          C[p * N + q] = d * d;
        }
    }
  return C;
}

std::vector<double> zonal_to_full_masses(const DensityField& rho, const ModelSpace& space,
                                         const MeasureField& mu, int n_phi, int n_theta) {
  if (space.kind != SpaceKind::sphere_zonal)
    throw std::invalid_argument("zonal_to_full_masses requires sphere_zonal");
  int N = space.shape[0];
  double h = space.h[0];
  double H = kPi / n_theta;
  // aggregate fine-cell masses into coarse colatitude bands (proportional split)
  std::vector<double> band(n_theta, 0.0);
  for (int j = 0; j < N; ++j) {
    double mass = rho.rho[j] * mu.mu_weights[j];
    double lo = j * h, hi = (j + 1) * h;
    int b0 = std::min(static_cast<int>(lo / H), n_theta - 1);
    int b1 = std::min(static_cast<int>((hi - 1e-14) / H), n_theta - 1);
    if (b0 == b1) {
      band[b0] += mass;
    } else {
      for (int b = b0; b <= b1; ++b) {
        double seg = std::min(hi, (b + 1) * H) - std::max(lo, b * H);
        band[b] += mass * seg / (hi - lo);
      }
    }
  }
  std::vector<double> out(static_cast<std::size_t>(n_phi) * n_theta);
  for (int i = 0; i < n_theta; ++i)
    for (int j = 0; j < n_phi; ++j) out[static_cast<std::size_t>(i) * n_phi + j] = band[i] / n_phi;
  return out;
}

double sinkhorn_debiased(const std::vector<double>& a, const std::vector<double>& b,
                         const std::vector<double>& cost, const SinkhornOptions& opts,
                         TransportDiagnostics* diag) {
  std::vector<double> eps = opts.eps_schedule.empty() ? default_eps_schedule() : opts.eps_schedule;
  for (std::size_t k = 1; k < eps.size(); ++k)
    if (!(eps[k] < eps[k - 1])) throw std::invalid_argument("eps schedule must be decreasing");

  SinkhornSolver ab(a, b, cost), aa(a, a, cost), bb(b, b, cost);
  TransportDiagnostics local;
  std::vector<double> values;
  for (double e : eps) {
    StageResult rab = ab.run(e, opts.max_iter, opts.marginal_tol);
    StageResult raa = aa.run(e, opts.max_iter, opts.marginal_tol);
    StageResult rbb = bb.run(e, opts.max_iter, opts.marginal_tol);
    local.iterations += rab.iterations + raa.iterations + rbb.iterations;
    local.final_eps = e;
    local.marginal_error = std::max({rab.marginal_error, raa.marginal_error, rbb.marginal_error});
    double val = rab.sharp_cost - 0.5 * raa.sharp_cost - 0.5 * rbb.sharp_cost;
    values.push_back(val);
    local.eps_values.push_back(e);
    local.values.push_back(val);
    if (!ab.converged() || !aa.converged() || !bb.converged()) {
      if (diag) *diag = local;
      throw SinkhornConvergenceError("Sinkhorn failed to reach the marginal tolerance", local);
    }
  }
  double ext = aitken(values);
  local.extrapolated = ext;
  if (diag) *diag = local;
  return ext;
}

TransportResult w2_sinkhorn(const DensityField& rho0, const DensityField& rho1,
                            const ModelSpace& space, const MeasureField& mu, CostKind cost,
                            const SinkhornOptions& opts) {
  check_density_pair(rho0, rho1, space, mu);
  TransportResult res;
  res.method = TransportMethod::sinkhorn;
  double val;
  if (space.kind == SpaceKind::sphere_zonal) {
    auto a = zonal_to_full_masses(rho0, space, mu, opts.full_sphere_n_phi, opts.full_sphere_n_theta);
    auto b = zonal_to_full_masses(rho1, space, mu, opts.full_sphere_n_phi, opts.full_sphere_n_theta);
    auto C = sphere_full_grid_cost(opts.full_sphere_n_phi, opts.full_sphere_n_theta);
    val = sinkhorn_debiased(a, b, C, opts, &res.diag);
  } else {
    auto a = cell_masses(rho0, mu);
    auto b = cell_masses(rho1, mu);
    auto C = cost_matrix(space, cost);
    val = sinkhorn_debiased(a, b, C, opts, &res.diag);
  }
  res.w2 = std::sqrt(std::max(val, 0.0));
  return res;
}

// ------------------------------------------------- McCann path & action

namespace {

struct QuantilePath {
  std::vector<double> breaks_m;              // merged mass breakpoints
  std::vector<double> q0, q1;                // quantile positions at the breakpoints
};

QuantilePath merge_quantiles(const std::vector<double>& m0, const std::vector<double>& m1,
                             const std::vector<double>& edges) {
  std::size_t N = m0.size();
  std::vector<double> c0(N + 1, 0.0), c1(N + 1, 0.0);
  for (std::size_t j = 0; j < N; ++j) {
    c0[j + 1] = c0[j] + m0[j];
    c1[j + 1] = c1[j] + m1[j];
  }
  double top = std::min(c0[N], c1[N]);
  std::vector<double> merged;
  merged.reserve(2 * N + 2);
  merged.push_back(0.0);
  for (std::size_t j = 1; j <= N; ++j) {
    merged.push_back(std::min(c0[j], top));
    merged.push_back(std::min(c1[j], top));
  }
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

  auto quantile = [&](const std::vector<double>& c, double m) {
    auto it = std::upper_bound(c.begin(), c.end(), m);
    std::size_t cell = std::min<std::size_t>(it - c.begin() - 1, N - 1);
    while (cell + 1 < N && c[cell + 1] - c[cell] <= 0.0 && m >= c[cell + 1]) ++cell;
    double mass = c[cell + 1] - c[cell];
    if (mass <= 0.0) return edges[cell];
    return edges[cell] + (m - c[cell]) * (edges[cell + 1] - edges[cell]) / mass;
  };

  QuantilePath qp;
  qp.breaks_m = merged;
  qp.q0.resize(merged.size());
  qp.q1.resize(merged.size());
  for (std::size_t p = 0; p < merged.size(); ++p) {
    qp.q0[p] = quantile(c0, merged[p]);
    qp.q1[p] = quantile(c1, merged[p]);
  }
  return qp;
}

// CDF of the displacement-interpolated measure at the given positions
std::vector<double> interp_cdf_at(const QuantilePath& qp, double tau,
                                  const std::vector<double>& positions) {
  std::size_t P = qp.breaks_m.size();
  std::vector<double> x(P);
  for (std::size_t p = 0; p < P; ++p) x[p] = (1.0 - tau) * qp.q0[p] + tau * qp.q1[p];
  std::vector<double> out(positions.size());
  std::size_t p = 0;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    double e = positions[k];
    while (p + 1 < P && x[p + 1] <= e) ++p;
    while (p > 0 && x[p] > e) --p;
    if (e <= x[0]) {
      out[k] = 0.0;
    } else if (e >= x[P - 1]) {
      out[k] = qp.breaks_m.back();
    } else {
      double span = x[p + 1] - x[p];
      double frac = span > 0.0 ? (e - x[p]) / span : 1.0;
      out[k] = qp.breaks_m[p] + frac * (qp.breaks_m[p + 1] - qp.breaks_m[p]);
    }
  }
  return out;
}

}  // namespace

BBPath build_mccann_path(const DensityField& rho0, const DensityField& rho1, int K,
                         const ModelSpace& space, const WeightField& w, const MeasureField& mu) {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  if (space.kind == SpaceKind::torus2)
    throw std::invalid_argument("build_mccann_path requires an exact-1D-solvable space");
  check_density_pair(rho0, rho1, space, mu);
  int N = static_cast<int>(space.size());
  double h = space.h[0];

  auto m0 = cell_masses(rho0, mu);
  auto m1 = cell_masses(rho1, mu);
  int cut = 0;
  if (space.kind == SpaceKind::circle) {
    cut = w2_circle_exact(rho0, rho1, space, mu).diag.cut_index;
    std::vector<double> r0(N), r1(N);
    for (int j = 0; j < N; ++j) {
      r0[j] = m0[(cut + j) % N];
      r1[j] = m1[(cut + j) % N];
    }
    m0 = r0;
    m1 = r1;
  }
  std::vector<double> edges(N + 1);
  for (int j = 0; j <= N; ++j) edges[j] = j * h;
  QuantilePath qp = merge_quantiles(m0, m1, edges);

  // conversion factor from mass-coordinate flux to mu-relative momentum:
  // the cell carries mu-mass mu_weights[node] spread over angular width h
  std::vector<double> Zexp(N);
  for (int j = 0; j < N; ++j) {
    int node = space.kind == SpaceKind::circle ? (cut + j) % N : j;
    Zexp[j] = h / mu.mu_weights[node];
  }

  BBPath path;
  std::vector<std::vector<double>> cdfs(K + 1);
  for (int s = 0; s <= K; ++s) {
    double tau = static_cast<double>(s) / K;
    cdfs[s] = interp_cdf_at(qp, tau, edges);
    std::vector<double> raw(N);
    for (int j = 0; j < N; ++j) {
      double mass = std::max(cdfs[s][j + 1] - cdfs[s][j], 0.0);
      int node = space.kind == SpaceKind::circle ? (cut + j) % N : j;
      raw[node] = mass / mu.mu_weights[node];
    }
    path.rho_s.push_back(make_density(raw, mu));
  }
  double dtau = 1.0 / K;
  for (int s = 0; s < K; ++s) {
    // edge fluxes from CDF differences; no flux through the cut / poles
    std::vector<double> J(N + 1, 0.0);
    for (int j = 1; j < N; ++j) J[j] = -(cdfs[s + 1][j] - cdfs[s][j]) / dtau;
    std::vector<double> omega(N, 0.0);
    for (int j = 0; j < N; ++j) {
      int node = space.kind == SpaceKind::circle ? (cut + j) % N : j;
      double flux = 0.5 * (J[j] + J[j + 1]);
      omega[node] = flux * Zexp[j];
    }
    path.omega_s.emplace_back(OneFormField(std::move(omega)));
  }

  // continuity residual with the module's discrete divergence
  double sup = 0.0;
  for (int s = 0; s < K; ++s) {
    ScalarField div = delta_psi(path.omega_s[s], space, w);
    for (int k = 0; k < N; ++k) {
      double dr = (path.rho_s[s + 1].rho[k] - path.rho_s[s].rho[k]) / dtau;
      sup = std::max(sup, std::abs(dr + div[k]));
    }
  }
  path.continuity_residual = sup;
  path.continuity_tol = std::max(2.0 * sup, 1e-8);
  return path;
}

double bb_action(const BBPath& path, const ModelSpace& space, const WeightField& w,
                 const MeasureField& mu) {
  if (path.omega_s.size() + 1 != path.rho_s.size() || path.rho_s.size() < 2)
    throw std::invalid_argument("malformed BB path");
  int K = static_cast<int>(path.omega_s.size());
  double dtau = 1.0 / K;
  std::size_t N = space.size();

  double worst = 0.0;
  int worst_s = 0;
  for (int s = 0; s < K; ++s) {
    ScalarField div = delta_psi(path.omega_s[s], space, w);
    for (std::size_t k = 0; k < N; ++k) {
      double dr = (path.rho_s[s + 1].rho[k] - path.rho_s[s].rho[k]) / dtau;
      double r = std::abs(dr + div[k]);
      if (r > worst) {
        worst = r;
        worst_s = s;
      }
    }
  }
  if (worst > path.continuity_tol)
    throw std::invalid_argument("continuity residual " + std::to_string(worst) +
                                " exceeds tolerance at path step " + std::to_string(worst_s));

  double action = 0.0;
  for (int s = 0; s < K; ++s) {
    double slab = 0.0;
    const auto& om = path.omega_s[s];
    for (std::size_t k = 0; k < N; ++k) {
      double rho_mid = 0.5 * (path.rho_s[s].rho[k] + path.rho_s[s + 1].rho[k]);
      double o2 = 0.0;
      for (int c = 0; c < om.ncomp(); ++c) o2 += om.comp[c][k] * om.comp[c][k];
      if (rho_mid > 0.0) slab += o2 / rho_mid * mu.mu_weights[k];
    }
    action += slab * dtau;
  }
  return action;
}

// ------------------------------------------------------------ cost cache

std::vector<double> cost_matrix_cached(const ModelSpace& space, CostKind cost,
                                       const std::string& cache_dir) {
  std::string name = cache_dir + "/cost_" + to_string(space.kind);
  for (int r : space.shape) name += "_" + std::to_string(r);
  name += ".bin";
  std::size_t N = space.size();

  const std::uint32_t magic = 0x574c4331;  // "WLC1"
  std::ifstream in(name, std::ios::binary);
  if (in) {
    std::uint32_t m = 0, kind = 0, n = 0;
    in.read(reinterpret_cast<char*>(&m), 4);
    in.read(reinterpret_cast<char*>(&kind), 4);
    in.read(reinterpret_cast<char*>(&n), 4);
    if (m == magic && kind == static_cast<std::uint32_t>(space.kind) && n == N) {
      std::vector<double> C(N * N);
      in.read(reinterpret_cast<char*>(C.data()), static_cast<std::streamsize>(C.size() * 8));
      if (in) return C;
    }
  }
  std::vector<double> C = cost_matrix(space, cost);
  std::ofstream out(name, std::ios::binary);
  if (out) {
    std::uint32_t kind = static_cast<std::uint32_t>(space.kind), n = static_cast<std::uint32_t>(N);
    out.write(reinterpret_cast<const char*>(&magic), 4);
    out.write(reinterpret_cast<const char*>(&kind), 4);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(C.data()), static_cast<std::streamsize>(C.size() * 8));
  }
  return C;
}

}  // namespace wlab
