#include "wlab/semigroup.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "wlab/operators.hpp"

namespace wlab {

namespace {

constexpr double kPi = std::numbers::pi;
using cplx = std::complex<double>;

// ---------------------------------------------------------------- Fourier

// naive DFT with precomputed roots; exact discrete orthogonality on the
// uniform grid keeps mass and the k=0 mode bit-stable up to roundoff
std::vector<cplx> dft(const std::vector<cplx>& f, int sign) {
  int N = static_cast<int>(f.size());
  std::vector<cplx> roots(N);
  for (int k = 0; k < N; ++k) roots[k] = std::polar(1.0, sign * 2.0 * kPi * k / N);
  std::vector<cplx> out(N);
  for (int k = 0; k < N; ++k) {
    cplx acc = 0.0;
    for (int j = 0; j < N; ++j) acc += f[j] * roots[static_cast<int>((static_cast<long long>(j) * k) % N)];
    out[k] = acc;
  }
  return out;
}

inline int freq_of(int k, int N) { return k <= N / 2 ? k : k - N; }

std::vector<double> spectral_circle(const std::vector<double>& f, double t, int N) {
  std::vector<cplx> fc(f.begin(), f.end());
  auto c = dft(fc, -1);
  for (int k = 0; k < N; ++k) {
    double kk = freq_of(k, N);
    c[k] *= std::exp(-kk * kk * t);
  }
  auto back = dft(c, +1);
  std::vector<double> out(N);
  for (int j = 0; j < N; ++j) out[j] = back[j].real() / N;
  return out;
}

std::vector<double> spectral_torus(const std::vector<double>& f, double t, int Nx, int Ny) {
  std::vector<std::vector<cplx>> rows(Nx, std::vector<cplx>(Ny));
  for (int i = 0; i < Nx; ++i)
    for (int j = 0; j < Ny; ++j) rows[i][j] = f[static_cast<std::size_t>(i) * Ny + j];
  for (int i = 0; i < Nx; ++i) rows[i] = dft(rows[i], -1);
  std::vector<cplx> col(Nx);
  for (int j = 0; j < Ny; ++j) {
    for (int i = 0; i < Nx; ++i) col[i] = rows[i][j];
    col = dft(col, -1);
    for (int i = 0; i < Nx; ++i) {
      double kx = freq_of(i, Nx), ky = freq_of(j, Ny);
      rows[i][j] = col[i] * std::exp(-(kx * kx + ky * ky) * t);
    }
  }
  for (int j = 0; j < Ny; ++j) {
    for (int i = 0; i < Nx; ++i) col[i] = rows[i][j];
    col = dft(col, +1);
    for (int i = 0; i < Nx; ++i) rows[i][j] = col[i];
  }
  for (int i = 0; i < Nx; ++i) rows[i] = dft(rows[i], +1);
  std::vector<double> out(static_cast<std::size_t>(Nx) * Ny);
  for (int i = 0; i < Nx; ++i)
    for (int j = 0; j < Ny; ++j) out[static_cast<std::size_t>(i) * Ny + j] = rows[i][j].real() / (Nx * Ny);
  return out;
}

// ------------------------------------------- sphere_zonal spectral basis

// Eigenbasis of the discrete zonal Laplace-Beltrami operator, W-orthonormal.
// Eigenvalues approximate -l(l+1) and the l=0 mode is exactly constant, so
// mass is conserved to roundoff.
struct SphereSpectral {
  Eigen::MatrixXd U;
  Eigen::VectorXd lam;
  Eigen::VectorXd sqw;
};

const SphereSpectral& sphere_basis(const ModelSpace& space) {
  static std::mutex mtx;
  static std::map<int, std::unique_ptr<SphereSpectral>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  int N = space.shape[0];
  auto it = cache.find(N);
  if (it != cache.end()) return *it->second;

  Generator gen = build_generator(space, zero_weight(space));
  auto sp = std::make_unique<SphereSpectral>();
  sp->sqw = gen.m.array().sqrt();
  Eigen::MatrixXd B = Eigen::MatrixXd(gen.S);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) B(i, j) /= sp->sqw[i] * sp->sqw[j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  sp->U = es.eigenvectors();
  sp->lam = es.eigenvalues();
  auto& ref = *sp;
  cache[N] = std::move(sp);
  return ref;
}

std::vector<double> spectral_sphere(const std::vector<double>& f, double t, const ModelSpace& space) {
  const SphereSpectral& sp = sphere_basis(space);
  int N = static_cast<int>(f.size());
  Eigen::VectorXd g(N);
  for (int j = 0; j < N; ++j) g[j] = f[j] * sp.sqw[j];
  Eigen::VectorXd c = sp.U.transpose() * g;
  for (int k = 0; k < N; ++k) c[k] *= std::exp(sp.lam[k] * t);
  Eigen::VectorXd back = sp.U * c;
  std::vector<double> out(N);
  for (int j = 0; j < N; ++j) out[j] = back[j] / sp.sqw[j];
  return out;
}

// ------------------------------------------------------- Crank-Nicolson

struct CNStepper {
  Generator gen;
  Eigen::SparseMatrix<double> B;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  double dt = -1.0;

  explicit CNStepper(Generator g) : gen(std::move(g)) {}

  void set_dt(double new_dt) {
    if (new_dt == dt) return;
    dt = new_dt;
    std::size_t N = gen.m.size();
    Eigen::SparseMatrix<double> M(N, N);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(N);
    for (std::size_t k = 0; k < N; ++k) trip.emplace_back(k, k, gen.m[k]);
    M.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseMatrix<double> A = M - (dt / 2.0) * gen.S;
    B = M + (dt / 2.0) * gen.S;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw std::runtime_error("Crank-Nicolson factorization failed");
  }

  void advance(Eigen::VectorXd& u, double interval, double dt_max) {
    if (interval <= 0.0) return;
    long steps = static_cast<long>(std::ceil(interval / dt_max));
    Eigen::VectorXd saved = u;
    double floor_before = u.minCoeff();
    for (int attempt = 0; attempt < 5; ++attempt) {
      set_dt(interval / steps);
      for (long s = 0; s < steps; ++s) u = lu.solve(B * u);
      if (u.minCoeff() >= floor_before - 1e-12 * (1.0 + std::abs(floor_before))) return;
      // positivity guard tripped: halve the step and redo the interval
      u = saved;
      steps *= 2;
    }
    throw std::runtime_error("Crank-Nicolson positivity guard failed after 4 halvings");
  }
};

double min_grid_h(const ModelSpace& space) {
  double h = space.h[0];
  for (double v : space.h) h = std::min(h, v);
  return h;
}

}  // namespace

ScalarField apply_generator(const ScalarField& f, const ModelSpace& space, const WeightField& w) {
  if (f.size() != space.size()) throw std::invalid_argument("field/space size mismatch");
  Generator gen = build_generator(space, w);
  return ScalarField(gen.apply(f.v));
}

std::vector<ScalarField> heat_evolve_trajectory(const ScalarField& f,
                                                const std::vector<double>& times, Scheme scheme,
                                                const ModelSpace& space, const WeightField& w,
                                                double dt_scale) {
  if (f.size() != space.size()) throw std::invalid_argument("field/space size mismatch");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0) throw std::domain_error("negative evolution time");
    if (i > 0 && times[i] < times[i - 1]) throw std::invalid_argument("times must be sorted");
  }
  std::vector<ScalarField> out;
  out.reserve(times.size());

  if (scheme == Scheme::spectral) {
    if (!w.is_zero()) throw std::invalid_argument("spectral scheme requires Psi = 0");
    for (double t : times) {
      if (t == 0.0) {
        out.push_back(f);
        continue;
      }
      switch (space.kind) {
        case SpaceKind::circle: out.emplace_back(spectral_circle(f.v, t, space.shape[0])); break;
        case SpaceKind::torus2:
          out.emplace_back(spectral_torus(f.v, t, space.shape[0], space.shape[1]));
          break;
        case SpaceKind::sphere_zonal: out.emplace_back(spectral_sphere(f.v, t, space)); break;
      }
    }
    return out;
  }

  if (dt_scale <= 0.0) throw std::invalid_argument("dt_scale must be positive");
  double h = min_grid_h(space);
  double dt_max = 0.5 * h * h * dt_scale;
  CNStepper stepper(build_generator(space, w));
  Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(f.v.data(), f.v.size());
  double cur = 0.0;
  for (double t : times) {
    stepper.advance(u, t - cur, dt_max);
    cur = t;
    out.emplace_back(std::vector<double>(u.data(), u.data() + u.size()));
  }
  return out;
}

ScalarField heat_evolve(const ScalarField& f, double t, Scheme scheme, const ModelSpace& space,
                        const WeightField& w) {
  if (t < 0.0) throw std::domain_error("negative evolution time");
  if (t == 0.0) return f;
  return heat_evolve_trajectory(f, {t}, scheme, space, w)[0];
}

DensityField heat_evolve(const DensityField& f, double t, Scheme scheme, const ModelSpace& space,
                         const WeightField& w) {
  ScalarField evolved = heat_evolve(ScalarField(f.rho), t, scheme, space, w);
  DensityField out;
  out.rho = std::move(evolved.v);
  for (double& v : out.rho)
    if (v < kDensityFloor) {
      v = kDensityFloor;
      ++out.clamped_nodes;
    }
  return out;
}

double integrate(const std::vector<double>& f, const MeasureField& mu) {
  if (f.size() != mu.mu_weights.size()) throw std::invalid_argument("field/measure size mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) acc += f[k] * mu.mu_weights[k];
  return acc;
}

double entropy(const DensityField& rho, const MeasureField& mu, double floor) {
  if (rho.size() != mu.mu_weights.size()) throw std::invalid_argument("density/measure size mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < rho.size(); ++k) {
    double v = rho.rho[k];
    if (v < floor) throw std::invalid_argument("density node below floor in entropy");
    acc += v * std::log(v) * mu.mu_weights[k];
  }
  return acc;
}

ScalarField gamma(const ScalarField& f, const ScalarField& g, const ModelSpace& space) {
  if (f.size() != space.size() || g.size() != space.size())
    throw std::invalid_argument("field/space size mismatch");
  std::size_t N = space.size();
  ScalarField out(N, 0.0);
  int naxes = space.kind == SpaceKind::torus2 ? 2 : 1;
  for (int a = 0; a < naxes; ++a) {
    auto df = deriv1(f.v, space, a);
    auto dg = deriv1(g.v, space, a);
    for (std::size_t k = 0; k < N; ++k) out[k] += df[k] * dg[k];
  }
  return out;
}

ScalarField gamma2(const ScalarField& f, const ModelSpace& space, const WeightField& w) {
  ScalarField gff = gamma(f, f, space);
  ScalarField lf = apply_generator(f, space, w);
  ScalarField lg = apply_generator(gff, space, w);
  ScalarField gfl = gamma(f, lf, space);
  ScalarField out(space.size(), 0.0);
  for (std::size_t k = 0; k < space.size(); ++k) out[k] = 0.5 * (lg[k] - 2.0 * gfl[k]);
  return out;
}

ScalarField check_gamma2_cd(const ScalarField& f, const ScalarField& g, double b,
                            const CDParams& cd, const ModelSpace& space, const WeightField& w) {
  double inv_m = std::isfinite(cd.m) ? 1.0 / cd.m : 0.0;
  ScalarField g2 = gamma2(f, space, w);
  ScalarField gf = gamma(f, f, space);
  ScalarField gg = gamma(g, g, space);
  ScalarField gfg = gamma(f, g, space);
  ScalarField gf_gg = gamma(f, gg, space);
  ScalarField lf = apply_generator(f, space, w);
  ScalarField out(space.size(), 0.0);
  for (std::size_t k = 0; k < space.size(); ++k) {
    double lhs = g2[k] + 2.0 * b * gf_gg[k] + 4.0 * b * b * gf[k] * gg[k];
    double q = lf[k] + 2.0 * b * gfg[k];
    double rhs = inv_m * q * q + cd.R * gf[k];
    out[k] = lhs - rhs;
  }
  return out;
}

}  // namespace wlab
