#include "wlab/forms.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wlab/operators.hpp"
#include "wlab/semigroup.hpp"

namespace wlab {

namespace {

void require_flat(const ModelSpace& space, const char* what) {
  if (space.kind == SpaceKind::sphere_zonal)
    throw std::invalid_argument(std::string(what) + " is unsupported on sphere_zonal");
}

void check_form(const OneFormField& omega, const ModelSpace& space) {
  int expect = space.kind == SpaceKind::torus2 ? 2 : 1;
  if (omega.ncomp() != expect || omega.size() != space.size())
    throw std::invalid_argument("1-form does not match the grid");
}

// Hess(Psi) component (i,j) at node k
inline double hess(const WeightField& w, const ModelSpace& space, std::size_t k, int i, int j) {
  if (space.kind != SpaceKind::torus2) return w.d2psi[0][k];
  return w.d2psi[i + j][k];  // (0,0)->0, (0,1)/(1,0)->1, (1,1)->2
}

std::vector<double> pointwise_norm2(const OneFormField& omega) {
  std::vector<double> out(omega.size(), 0.0);
  for (const auto& c : omega.comp)
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += c[k] * c[k];
  return out;
}

// Hodge-de Rham operator as a symmetric pencil on stacked components:
// Lvec = Mbig^{-1} Sbig with Mbig = blockdiag(M, ...), Sbig = blockdiag(S, ...)
// minus the mass-weighted Hess(Psi) coupling.
struct HodgeSystem {
  Eigen::SparseMatrix<double> S;
  Eigen::VectorXd m;
  int ncomp;
  std::size_t N;
};

HodgeSystem build_hodge_system(const ModelSpace& space, const WeightField& w) {
  Generator gen = build_generator(space, w);
  HodgeSystem sys;
  sys.N = space.size();
  sys.ncomp = space.kind == SpaceKind::torus2 ? 2 : 1;
  std::size_t total = sys.N * sys.ncomp;
  sys.m.resize(total);
  for (int c = 0; c < sys.ncomp; ++c)
    for (std::size_t k = 0; k < sys.N; ++k) sys.m[c * sys.N + k] = gen.m[k];

  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < sys.ncomp; ++c)
    for (int outer = 0; outer < gen.S.outerSize(); ++outer)
      for (Eigen::SparseMatrix<double>::InnerIterator it(gen.S, outer); it; ++it)
        trip.emplace_back(c * sys.N + it.row(), c * sys.N + it.col(), it.value());
  for (int i = 0; i < sys.ncomp; ++i)
    for (int j = 0; j < sys.ncomp; ++j)
      for (std::size_t k = 0; k < sys.N; ++k)
        trip.emplace_back(i * sys.N + k, j * sys.N + k, -gen.m[k] * hess(w, space, k, i, j));
  sys.S.resize(total, total);
  sys.S.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

Eigen::VectorXd stack(const OneFormField& omega) {
  std::size_t N = omega.size();
  Eigen::VectorXd u(N * omega.ncomp());
  for (int c = 0; c < omega.ncomp(); ++c)
    for (std::size_t k = 0; k < N; ++k) u[c * N + k] = omega.comp[c][k];
  return u;
}

OneFormField unstack(const Eigen::VectorXd& u, int ncomp, std::size_t N) {
  OneFormField f;
  f.comp.assign(ncomp, std::vector<double>(N));
  for (int c = 0; c < ncomp; ++c)
    for (std::size_t k = 0; k < N; ++k) f.comp[c][k] = u[c * N + k];
  return f;
}

OneFormField apply_hodge(const OneFormField& omega, const ModelSpace& space, const WeightField& w) {
  HodgeSystem sys = build_hodge_system(space, w);
  Eigen::VectorXd u = stack(omega);
  Eigen::VectorXd r = sys.S * u;
  r.array() /= sys.m.array();
  return unstack(r, sys.ncomp, sys.N);
}

}  // namespace

ScalarField delta_psi(const OneFormField& omega, const ModelSpace& space, const WeightField& w) {
  check_form(omega, space);
  std::size_t N = space.size();
  ScalarField out(N, 0.0);
  switch (space.kind) {
    case SpaceKind::circle: {
      auto d = deriv1(omega.comp[0], space, 0);
      for (std::size_t k = 0; k < N; ++k) out[k] = d[k] - w.dpsi[0][k] * omega.comp[0][k];
      break;
    }
    case SpaceKind::torus2: {
      for (int a = 0; a < 2; ++a) {
        auto d = deriv1(omega.comp[a], space, a);
        for (std::size_t k = 0; k < N; ++k) out[k] += d[k] - w.dpsi[a][k] * omega.comp[a][k];
      }
      break;
    }
    case SpaceKind::sphere_zonal: {
      // (1/sin)(sin w)' with the product even-reflected across the poles
      std::vector<double> sw(N);
      for (std::size_t k = 0; k < N; ++k) sw[k] = std::sin(space.axes[0][k]) * omega.comp[0][k];
      auto d = deriv1(sw, space, 0);
      for (std::size_t k = 0; k < N; ++k)
        out[k] = d[k] / std::sin(space.axes[0][k]) - w.dpsi[0][k] * omega.comp[0][k];
      break;
    }
  }
  return out;
}

std::vector<OneFormField> hodge_evolve_trajectory(const OneFormField& omega,
                                                  const std::vector<double>& times,
                                                  const ModelSpace& space, const WeightField& w) {
  require_flat(space, "Hodge-de Rham flow");
  check_form(omega, space);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0) throw std::domain_error("negative evolution time");
    if (i > 0 && times[i] < times[i - 1]) throw std::invalid_argument("times must be sorted");
  }
  HodgeSystem sys = build_hodge_system(space, w);
  std::size_t total = sys.N * sys.ncomp;
  Eigen::SparseMatrix<double> M(total, total);
  {
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t k = 0; k < total; ++k) trip.emplace_back(k, k, sys.m[k]);
    M.setFromTriplets(trip.begin(), trip.end());
  }
  double h = *std::min_element(space.h.begin(), space.h.end());
  double dt_max = 0.5 * h * h;

  Eigen::VectorXd u = stack(omega);
  std::vector<OneFormField> out;
  out.reserve(times.size());
  double cur = 0.0;
  double last_dt = -1.0;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  Eigen::SparseMatrix<double> B;
  for (double t : times) {
    double interval = t - cur;
    if (interval > 0.0) {
      long steps = static_cast<long>(std::ceil(interval / dt_max));
      double dt = interval / steps;
      if (dt != last_dt) {
        Eigen::SparseMatrix<double> A = M - (dt / 2.0) * sys.S;
        B = M + (dt / 2.0) * sys.S;
        lu.compute(A);
        if (lu.info() != Eigen::Success) throw std::runtime_error("Hodge CN factorization failed");
        last_dt = dt;
      }
      for (long s = 0; s < steps; ++s) u = lu.solve(B * u);
      cur = t;
    }
    out.push_back(unstack(u, sys.ncomp, sys.N));
  }
  return out;
}

OneFormField hodge_evolve(const OneFormField& omega, double t, const ModelSpace& space,
                          const WeightField& w) {
  if (t < 0.0) throw std::domain_error("negative evolution time");
  if (t == 0.0) {
    require_flat(space, "Hodge-de Rham flow");
    check_form(omega, space);
    return omega;
  }
  return hodge_evolve_trajectory(omega, {t}, space, w)[0];
}

double check_commutation(const OneFormField& omega, double t, const ModelSpace& space,
                         const WeightField& w) {
  ScalarField lhs = heat_evolve(delta_psi(omega, space, w), t, Scheme::crank_nicolson, space, w);
  ScalarField rhs = delta_psi(hodge_evolve(omega, t, space, w), space, w);
  double sup = 0.0;
  for (std::size_t k = 0; k < lhs.size(); ++k) sup = std::max(sup, std::abs(lhs[k] - rhs[k]));
  return sup;
}

ScalarField check_refined_blw(const OneFormField& eta, const OneFormField& alpha, double b,
                              const ModelSpace& space, const WeightField& w) {
  require_flat(space, "refined Bochner identity");
  check_form(eta, space);
  check_form(alpha, space);
  std::size_t N = space.size();
  int nc = eta.ncomp();

  std::vector<double> eta2 = pointwise_norm2(eta);
  std::vector<double> alpha2 = pointwise_norm2(alpha);
  ScalarField half_eta2(N, 0.0);
  for (std::size_t k = 0; k < N; ++k) half_eta2[k] = 0.5 * eta2[k];
  ScalarField t1 = apply_generator(half_eta2, space, w);

  OneFormField lvec = apply_hodge(eta, space, w);
  std::vector<double> t2(N, 0.0);
  for (int c = 0; c < nc; ++c)
    for (std::size_t k = 0; k < N; ++k) t2[k] += eta.comp[c][k] * lvec.comp[c][k];

  std::vector<double> t3(N, 0.0);
  for (int a = 0; a < nc; ++a) {
    auto d = deriv1(eta2, space, a);
    for (std::size_t k = 0; k < N; ++k) t3[k] += alpha.comp[a][k] * d[k];
  }

  // |grad eta + 2b alpha x eta|^2 with grad_i eta_j the plain derivative
  std::vector<double> grad_norm(N, 0.0);
  for (int i = 0; i < nc; ++i)
    for (int j = 0; j < nc; ++j) {
      auto d = deriv1(eta.comp[j], space, i);
      for (std::size_t k = 0; k < N; ++k) {
        double v = d[k] + 2.0 * b * alpha.comp[i][k] * eta.comp[j][k];
        grad_norm[k] += v * v;
      }
    }

  ScalarField out(N, 0.0);
  for (std::size_t k = 0; k < N; ++k) {
    double ric = 0.0;
    for (int i = 0; i < nc; ++i)
      for (int j = 0; j < nc; ++j) ric += hess(w, space, k, i, j) * eta.comp[i][k] * eta.comp[j][k];
    double lhs = t1[k] - t2[k] + 2.0 * b * t3[k] + 4.0 * b * b * alpha2[k] * eta2[k];
    out[k] = lhs - (grad_norm[k] + ric);
  }
  return out;
}

FormIdentityResiduals check_form_identities(const OneFormField& eta, const OneFormField& alpha,
                                            const ScalarField& f, const ModelSpace& space,
                                            const WeightField& w) {
  (void)w;  // the three identities are weight-free
  require_flat(space, "form identity checks");
  check_form(eta, space);
  check_form(alpha, space);
  std::size_t N = space.size();
  int nc = eta.ncomp();
  FormIdentityResiduals res;

  std::vector<double> eta2 = pointwise_norm2(eta);
  ScalarField half(N, 0.0);
  for (std::size_t k = 0; k < N; ++k) half[k] = 0.5 * eta2[k];
  for (int a = 0; a < nc; ++a) {
    auto lhs = deriv1(half.v, space, a);
    std::vector<double> rhs(N, 0.0);
    for (int i = 0; i < nc; ++i) {
      auto d = deriv1(eta.comp[i], space, a);
      for (std::size_t k = 0; k < N; ++k) rhs[k] += eta.comp[i][k] * d[k];
    }
    for (std::size_t k = 0; k < N; ++k) res.lemma1 = std::max(res.lemma1, std::abs(lhs[k] - rhs[k]));
  }

  std::vector<double> inner(N, 0.0);
  for (int i = 0; i < nc; ++i)
    for (std::size_t k = 0; k < N; ++k) inner[k] += eta.comp[i][k] * alpha.comp[i][k];
  for (int a = 0; a < nc; ++a) {
    auto lhs = deriv1(inner, space, a);
    std::vector<double> rhs(N, 0.0);
    for (int i = 0; i < nc; ++i) {
      auto de = deriv1(eta.comp[i], space, a);
      auto da = deriv1(alpha.comp[i], space, a);
      for (std::size_t k = 0; k < N; ++k)
        rhs[k] += alpha.comp[i][k] * de[k] + eta.comp[i][k] * da[k];
    }
    for (std::size_t k = 0; k < N; ++k) res.lemma2 = std::max(res.lemma2, std::abs(lhs[k] - rhs[k]));
  }

  // Lemma 3 is about the unweighted Hodge Laplacian (flat: plain Delta per comp)
  WeightField zero = zero_weight(space);
  ScalarField lap_f = apply_generator(f, space, zero);
  OneFormField feta = eta;
  for (int c = 0; c < nc; ++c)
    for (std::size_t k = 0; k < N; ++k) feta.comp[c][k] = f[k] * eta.comp[c][k];
  OneFormField lhs3 = apply_hodge(feta, space, zero);
  OneFormField leta = apply_hodge(eta, space, zero);
  for (int c = 0; c < nc; ++c) {
    std::vector<double> rhs(N, 0.0);
    for (std::size_t k = 0; k < N; ++k) rhs[k] = f[k] * leta.comp[c][k] + eta.comp[c][k] * lap_f[k];
    for (int a = 0; a < nc; ++a) {
      auto df = deriv1(f.v, space, a);
      auto de = deriv1(eta.comp[c], space, a);
      for (std::size_t k = 0; k < N; ++k) rhs[k] += 2.0 * df[k] * de[k];
    }
    for (std::size_t k = 0; k < N; ++k)
      res.lemma3 = std::max(res.lemma3, std::abs(lhs3.comp[c][k] - rhs[k]));
  }
  return res;
}

ScalarField check_coercive_corollary(const OneFormField& eta, const OneFormField& alpha, double b,
                                     const CDParams& cd, const ModelSpace& space,
                                     const WeightField& w) {
  require_flat(space, "coercive corollary");
  check_form(eta, space);
  check_form(alpha, space);
  CDParams best = cd_best_R(space, w, cd.m);
  if (cd.R > best.R + 1e-9)
    throw std::domain_error("infeasible CD parameters: R exceeds the best constant");

  std::size_t N = space.size();
  int nc = eta.ncomp();
  std::vector<double> eta2 = pointwise_norm2(eta);
  std::vector<double> alpha2 = pointwise_norm2(alpha);
  ScalarField half(N, 0.0);
  for (std::size_t k = 0; k < N; ++k) half[k] = 0.5 * eta2[k];
  ScalarField t1 = apply_generator(half, space, w);
  OneFormField lvec = apply_hodge(eta, space, w);
  ScalarField del = delta_psi(eta, space, w);

  double inv_m = std::isfinite(cd.m) ? 1.0 / cd.m : 0.0;
  std::vector<std::vector<double>> d_eta2(nc);
  for (int a = 0; a < nc; ++a) d_eta2[a] = deriv1(eta2, space, a);
  ScalarField out(N, 0.0);
  for (std::size_t k = 0; k < N; ++k) {
    double t2 = 0.0, t3 = 0.0, ae = 0.0;
    for (int c = 0; c < nc; ++c) {
      t2 += eta.comp[c][k] * lvec.comp[c][k];
      ae += alpha.comp[c][k] * eta.comp[c][k];
    }
    for (int a = 0; a < nc; ++a) t3 += alpha.comp[a][k] * d_eta2[a][k];
    double lhs = t1[k] - t2 + 2.0 * b * t3 + 4.0 * b * b * alpha2[k] * eta2[k];
    double q = del[k] + 2.0 * b * ae;
    out[k] = lhs - (inv_m * q * q + cd.R * eta2[k]);
  }
  return out;
}

ScalarField check_coercive_estimate(const OneFormField& omega, const ScalarField& g, double t,
                                    const std::vector<double>& u_grid, const CDParams& cd,
                                    const ModelSpace& space, const WeightField& w) {
  require_flat(space, "coercive estimate");
  check_form(omega, space);
  if (t < 0.0) throw std::domain_error("negative time");
  double gmin = *std::min_element(g.v.begin(), g.v.end());
  if (gmin <= 0.0) throw std::invalid_argument("g must be strictly positive");
  std::vector<double> us = u_grid;
  std::sort(us.begin(), us.end());
  if (us.empty() || us.front() < 0.0 || us.back() > t + 1e-15)
    throw std::invalid_argument("u_grid must lie in [0, t]");

  std::size_t N = space.size();
  int nc = omega.ncomp();

  OneFormField rt = hodge_evolve(omega, t, space, w);
  ScalarField ptg = heat_evolve(g, t, Scheme::crank_nicolson, space, w);
  ScalarField w2g(N, 0.0);
  std::vector<double> om2 = pointwise_norm2(omega);
  for (std::size_t k = 0; k < N; ++k) w2g[k] = om2[k] / g[k];
  ScalarField pt_w2g = heat_evolve(w2g, t, Scheme::crank_nicolson, space, w);
  ScalarField pt_del = heat_evolve(delta_psi(omega, space, w), t, Scheme::crank_nicolson, space, w);

  // snapshots of P_s g and R_s omega at s = t - u for all u in the grid
  std::vector<double> s_times(us.size());
  for (std::size_t i = 0; i < us.size(); ++i) s_times[i] = t - us[us.size() - 1 - i];
  for (double& s : s_times) s = std::max(s, 0.0);
  std::vector<ScalarField> g_traj = heat_evolve_trajectory(g, s_times, Scheme::crank_nicolson, space, w);
  std::vector<OneFormField> w_traj = hodge_evolve_trajectory(omega, s_times, space, w);

  double inv_m = std::isfinite(cd.m) ? 1.0 / cd.m : 0.0;
  std::vector<std::vector<double>> integrand(us.size(), std::vector<double>(N, 0.0));
  for (std::size_t i = 0; i < us.size(); ++i) {
    double u = us[i];
    std::size_t si = us.size() - 1 - i;  // s_times[si] = t - u
    const ScalarField& G = g_traj[si];
    const OneFormField& RW = w_traj[si];
    ScalarField dot(N, 0.0);
    for (int a = 0; a < nc; ++a) {
      auto dG = deriv1(G.v, space, a);
      for (std::size_t k = 0; k < N; ++k) dot[k] += dG[k] / G[k] * RW.comp[a][k];
    }
    ScalarField pu_dot = heat_evolve(dot, u, Scheme::crank_nicolson, space, w);
    for (std::size_t k = 0; k < N; ++k) {
      double q = pt_del[k] - pu_dot[k];
      integrand[i][k] = std::exp(-2.0 * cd.R * u) / ptg[k] * q * q;
    }
  }

  ScalarField deficit(N, 0.0);
  for (std::size_t k = 0; k < N; ++k) {
    double I = 0.0;
    for (std::size_t i = 0; i + 1 < us.size(); ++i)
      I += 0.5 * (integrand[i][k] + integrand[i + 1][k]) * (us[i + 1] - us[i]);
    double rt2 = 0.0;
    for (int c = 0; c < nc; ++c) rt2 += rt.comp[c][k] * rt.comp[c][k];
    double lhs = rt2 / ptg[k];
    double rhs = std::exp(-2.0 * cd.R * t) * pt_w2g[k] - 2.0 * inv_m * I;
    deficit[k] = rhs - lhs;
  }
  return deficit;
}

double sup_abs(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.v) s = std::max(s, std::abs(v));
  return s;
}

double min_value(const ScalarField& f) {
  return *std::min_element(f.v.begin(), f.v.end());
}

}  // namespace wlab
