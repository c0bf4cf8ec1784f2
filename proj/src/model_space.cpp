#include "wlab/model_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wlab {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr int kMinResolution = 16;

std::vector<double> uniform_periodic_axis(int n, double length) {
  std::vector<double> x(n);
  for (int k = 0; k < n; ++k) x[k] = length * k / n;
  return x;
}
}  // namespace

std::string to_string(SpaceKind k) {
  switch (k) {
    case SpaceKind::circle: return "circle";
    case SpaceKind::torus2: return "torus2";
    case SpaceKind::sphere_zonal: return "sphere_zonal";
  }
  return "?";
}

SpaceKind space_kind_from_string(const std::string& s) {
  if (s == "circle") return SpaceKind::circle;
  if (s == "torus2") return SpaceKind::torus2;
  if (s == "sphere_zonal") return SpaceKind::sphere_zonal;
  throw std::invalid_argument("unknown space kind: " + s);
}

double ModelSpace::analytic_volume() const {
  switch (kind) {
    case SpaceKind::circle: return 2.0 * kPi;
    case SpaceKind::torus2: return 4.0 * kPi * kPi;
    case SpaceKind::sphere_zonal: return 4.0 * kPi;
  }
  return 0.0;
}

ModelSpace build_model_space(SpaceKind kind, const std::vector<int>& resolution) {
  if (resolution.empty()) throw std::invalid_argument("resolution must not be empty");
  for (int r : resolution)
    if (r < kMinResolution)
      throw std::invalid_argument("resolution below minimum (" + std::to_string(kMinResolution) +
                                  "): " + std::to_string(r));

  ModelSpace s;
  s.kind = kind;
  switch (kind) {
    case SpaceKind::circle: {
      int N = resolution[0];
      s.n = 1;
      s.shape = {N};
      s.h = {2.0 * kPi / N};
      s.axes = {uniform_periodic_axis(N, 2.0 * kPi)};
      s.vol_weights.assign(N, 2.0 * kPi / N);
      break;
    }
    case SpaceKind::torus2: {
      int Nx = resolution[0];
      int Ny = resolution.size() > 1 ? resolution[1] : resolution[0];
      if (Ny < kMinResolution) throw std::invalid_argument("resolution below minimum");
      s.n = 2;
      s.shape = {Nx, Ny};
      s.h = {2.0 * kPi / Nx, 2.0 * kPi / Ny};
      s.axes = {uniform_periodic_axis(Nx, 2.0 * kPi), uniform_periodic_axis(Ny, 2.0 * kPi)};
      s.vol_weights.assign(static_cast<std::size_t>(Nx) * Ny, s.h[0] * s.h[1]);
      break;
    }
    case SpaceKind::sphere_zonal: {
      int N = resolution[0];
      s.n = 2;
      s.shape = {N};
      double h = kPi / N;
      s.h = {h};
      std::vector<double> theta(N), w(N);
      for (int j = 0; j < N; ++j) {
        theta[j] = (j + 0.5) * h;
        // exact cell integral of 2*pi*sin(theta); telescopes to 4*pi
        w[j] = 2.0 * kPi * (std::cos(j * h) - std::cos((j + 1) * h));
      }
      s.axes = {std::move(theta)};
      s.vol_weights = std::move(w);
      break;
    }
  }
  return s;
}

bool WeightField::is_zero() const {
  for (double v : psi)
    if (v != 0.0) return false;
  for (const auto& d : dpsi)
    for (double v : d)
      if (v != 0.0) return false;
  return true;
}

WeightField zero_weight(const ModelSpace& space) {
  WeightField w;
  std::size_t N = space.size();
  w.psi.assign(N, 0.0);
  w.dpsi.assign(space.num_axes(), std::vector<double>(N, 0.0));
  w.d2psi.assign(space.kind == SpaceKind::torus2 ? 3 : (space.kind == SpaceKind::sphere_zonal ? 1 : 1),
                 std::vector<double>(N, 0.0));
  w.analytic = true;
  return w;
}

WeightField make_weight(const ModelSpace& space, const ScalarFn& psi, const ScalarFn& dpsi,
                        const ScalarFn& d2psi) {
  if (space.kind == SpaceKind::torus2)
    throw std::invalid_argument("1D closed-form weight on a 2D space");
  std::size_t N = space.size();
  WeightField w;
  w.psi.resize(N);
  w.dpsi.assign(1, std::vector<double>(N));
  w.d2psi.assign(1, std::vector<double>(N));
  for (std::size_t k = 0; k < N; ++k) {
    double th = space.axes[0][k];
    w.psi[k] = psi(th);
    w.dpsi[0][k] = dpsi(th);
    w.d2psi[0][k] = d2psi(th);
  }
  w.analytic = true;
  return w;
}

WeightField make_weight(const ModelSpace& space, const ScalarFn2& psi, const ScalarFn2& px,
                        const ScalarFn2& py, const ScalarFn2& pxx, const ScalarFn2& pxy,
                        const ScalarFn2& pyy) {
  if (space.kind != SpaceKind::torus2)
    throw std::invalid_argument("2D closed-form weight requires torus2");
  std::size_t N = space.size();
  WeightField w;
  w.psi.resize(N);
  w.dpsi.assign(2, std::vector<double>(N));
  w.d2psi.assign(3, std::vector<double>(N));
  for (std::size_t k = 0; k < N; ++k) {
    double x = space.coord(k, 0), y = space.coord(k, 1);
    w.psi[k] = psi(x, y);
    w.dpsi[0][k] = px(x, y);
    w.dpsi[1][k] = py(x, y);
    w.d2psi[0][k] = pxx(x, y);
    w.d2psi[1][k] = pxy(x, y);
    w.d2psi[2][k] = pyy(x, y);
  }
  w.analytic = true;
  return w;
}

namespace {

// index lookup with periodic wrap or even reflection at the sphere poles
inline int wrap_index(int j, int N, bool reflect) {
  if (!reflect) return ((j % N) + N) % N;
  if (j < 0) return -j - 1;
  if (j >= N) return 2 * N - 1 - j;
  return j;
}

std::vector<double> diff1_4th(const std::vector<double>& f, double h, bool reflect) {
  int N = static_cast<int>(f.size());
  std::vector<double> out(N);
  for (int j = 0; j < N; ++j) {
    double fm2 = f[wrap_index(j - 2, N, reflect)];
    double fm1 = f[wrap_index(j - 1, N, reflect)];
    double fp1 = f[wrap_index(j + 1, N, reflect)];
    double fp2 = f[wrap_index(j + 2, N, reflect)];
    out[j] = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
  }
  return out;
}

std::vector<double> diff2_4th(const std::vector<double>& f, double h, bool reflect) {
  int N = static_cast<int>(f.size());
  std::vector<double> out(N);
  for (int j = 0; j < N; ++j) {
    double fm2 = f[wrap_index(j - 2, N, reflect)];
    double fm1 = f[wrap_index(j - 1, N, reflect)];
    double fp1 = f[wrap_index(j + 1, N, reflect)];
    double fp2 = f[wrap_index(j + 2, N, reflect)];
    out[j] = (-fp2 + 16.0 * fp1 - 30.0 * f[j] + 16.0 * fm1 - fm2) / (12.0 * h * h);
  }
  return out;
}

}  // namespace

WeightField make_weight_sampled(const ModelSpace& space, const std::vector<double>& psi) {
  if (psi.size() != space.size()) throw std::invalid_argument("psi sample size mismatch");
  WeightField w;
  w.psi = psi;
  w.analytic = false;
  if (space.kind != SpaceKind::torus2) {
    bool reflect = space.kind == SpaceKind::sphere_zonal;
    w.dpsi = {diff1_4th(psi, space.h[0], reflect)};
    w.d2psi = {diff2_4th(psi, space.h[0], reflect)};
  } else {
    int Nx = space.shape[0], Ny = space.shape[1];
    std::size_t N = space.size();
    w.dpsi.assign(2, std::vector<double>(N));
    w.d2psi.assign(3, std::vector<double>(N));
    std::vector<double> line;
    // x-direction (columns)
    line.resize(Nx);
    for (int j = 0; j < Ny; ++j) {
      for (int i = 0; i < Nx; ++i) line[i] = psi[space.idx(i, j)];
      auto d1 = diff1_4th(line, space.h[0], false);
      auto d2 = diff2_4th(line, space.h[0], false);
      for (int i = 0; i < Nx; ++i) {
        w.dpsi[0][space.idx(i, j)] = d1[i];
        w.d2psi[0][space.idx(i, j)] = d2[i];
      }
    }
    // y-direction (rows)
    line.resize(Ny);
    for (int i = 0; i < Nx; ++i) {
      for (int j = 0; j < Ny; ++j) line[j] = psi[space.idx(i, j)];
      auto d1 = diff1_4th(line, space.h[1], false);
      auto d2 = diff2_4th(line, space.h[1], false);
      for (int j = 0; j < Ny; ++j) {
        w.dpsi[1][space.idx(i, j)] = d1[j];
        w.d2psi[2][space.idx(i, j)] = d2[j];
      }
    }
    // mixed derivative: d/dy of dpsi/dx
    line.resize(Ny);
    for (int i = 0; i < Nx; ++i) {
      for (int j = 0; j < Ny; ++j) line[j] = w.dpsi[0][space.idx(i, j)];
      auto d1 = diff1_4th(line, space.h[1], false);
      for (int j = 0; j < Ny; ++j) w.d2psi[1][space.idx(i, j)] = d1[j];
    }
  }
  return w;
}

MeasureField measure_of(const ModelSpace& space, const WeightField& w) {
  if (w.psi.size() != space.size()) throw std::invalid_argument("weight/space size mismatch");
  MeasureField m;
  m.mu_weights.resize(space.size());
  double Z = 0.0;
  for (std::size_t k = 0; k < space.size(); ++k) {
    if (!std::isfinite(w.psi[k])) throw std::invalid_argument("non-finite psi value");
    m.mu_weights[k] = std::exp(-w.psi[k]) * space.vol_weights[k];
    Z += m.mu_weights[k];
  }
  for (double& v : m.mu_weights) v /= Z;
  m.normalization_constant = Z;
  return m;
}

RicciField ricci_operator_field(const ModelSpace& space, const WeightField& w) {
  RicciField r;
  std::size_t N = space.size();
  switch (space.kind) {
    case SpaceKind::circle:
      r.ncomp = 1;
      r.comps = w.d2psi[0];
      break;
    case SpaceKind::torus2:
      r.ncomp = 3;
      r.comps.resize(3 * N);
      for (std::size_t k = 0; k < N; ++k) {
        r.comps[3 * k + 0] = w.d2psi[0][k];
        r.comps[3 * k + 1] = w.d2psi[1][k];
        r.comps[3 * k + 2] = w.d2psi[2][k];
      }
      break;
    case SpaceKind::sphere_zonal:
      // unit sphere: Ricci_g = (n-1) g = g in the orthonormal frame
      r.ncomp = 2;
      r.comps.resize(2 * N);
      for (std::size_t k = 0; k < N; ++k) {
        double th = space.axes[0][k];
        r.comps[2 * k + 0] = 1.0 + w.d2psi[0][k];
        r.comps[2 * k + 1] = 1.0 + (std::cos(th) / std::sin(th)) * w.dpsi[0][k];
      }
      break;
  }
  return r;
}

CDParams cd_best_R(const ModelSpace& space, const WeightField& w, double m) {
  double n = space.n;
  if (m < n) throw std::domain_error("effective dimension m < intrinsic dimension n");
  bool psi_zero = w.is_zero();
  if (m == n && !psi_zero) throw std::domain_error("m = n requires Psi = 0");

  double c = 0.0;
  if (std::isfinite(m) && m > n) c = 1.0 / (m - n);

  RicciField ric = ricci_operator_field(space, w);
  CDParams cd;
  cd.m = m;
  double best = std::numeric_limits<double>::infinity();
  std::size_t argmin = 0;
  for (std::size_t k = 0; k < space.size(); ++k) {
    double lam;
    switch (space.kind) {
      case SpaceKind::circle: {
        double g1 = w.dpsi[0][k];
        lam = ric.at(k, 0) - c * g1 * g1;
        break;
      }
      case SpaceKind::torus2: {
        double px = w.dpsi[0][k], py = w.dpsi[1][k];
        double a = ric.at(k, 0) - c * px * px;
        double b = ric.at(k, 1) - c * px * py;
        double d = ric.at(k, 2) - c * py * py;
        lam = 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + b * b);
        break;
      }
      case SpaceKind::sphere_zonal: {
        double g1 = w.dpsi[0][k];
        lam = std::min(ric.at(k, 0) - c * g1 * g1, ric.at(k, 1));
        break;
      }
      default: lam = 0.0;
    }
    if (lam < best) {
      best = lam;
      argmin = k;
    }
  }
  cd.R = best;
  cd.witness_node = argmin;
  return cd;
}

}  // namespace wlab
