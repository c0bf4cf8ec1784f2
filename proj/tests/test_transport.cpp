#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <cstdio>
#include <numbers>

#include "helpers.hpp"
#include "wlab/random_fields.hpp"
#include "wlab/semigroup.hpp"
#include "wlab/transport.hpp"

using namespace wlab;
using namespace wlab::testutil;

namespace {

constexpr double kPi = std::numbers::pi;

DensityField vm_bump(const ModelSpace& sp, const MeasureField& mu, double center, double kappa) {
  return make_density(
      sample(sp, [&](double th) { return std::exp(kappa * std::cos(th - center)); }), mu);
}

}  // namespace

TEST_CASE("circle exact: identical densities give zero") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {128});
  MeasureField mu = measure_of(sp, zero_weight(sp));
  DensityField rho = random_density(1, sp, mu);
  CHECK(w2_circle_exact(rho, rho, sp, mu).w2 <= 1e-12);
}

TEST_CASE("circle exact: rotating a narrow bump costs the rotation angle") {
  // only localized mass moves rigidly; a spread-out density transports cheaper
  ModelSpace sp = build_model_space(SpaceKind::circle, {512});
  MeasureField mu = measure_of(sp, zero_weight(sp));
  double h = sp.h[0];
  int shift = static_cast<int>(std::lround(0.3 / h));
  double angle = shift * h;
  DensityField base = vm_bump(sp, mu, 0.0, 200.0);
  std::vector<double> rotated(base.rho.size());
  for (std::size_t k = 0; k < rotated.size(); ++k)
    rotated[(k + shift) % rotated.size()] = base.rho[k];
  DensityField r0 = base, r1 = make_density(rotated, mu);
  TransportResult res = w2_circle_exact(r0, r1, sp, mu);
  CHECK(res.w2 == doctest::Approx(angle).epsilon(1e-3));
  // symmetry is exact for the exact solver
  CHECK(w2_circle_exact(r1, r0, sp, mu).w2 == doctest::Approx(res.w2).epsilon(1e-12));
}

TEST_CASE("circle exact: sharp bumps approach the point-mass distance") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {512});
  MeasureField mu = measure_of(sp, zero_weight(sp));
  DensityField a = vm_bump(sp, mu, 0.0, 200.0);
  DensityField b = vm_bump(sp, mu, kPi / 2.0, 200.0);
  CHECK(w2_circle_exact(a, b, sp, mu).w2 == doctest::Approx(kPi / 2.0).epsilon(2e-2 / (kPi / 2)));
}

TEST_CASE("circle exact: triangle inequality on random triples") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {128});
  MeasureField mu = measure_of(sp, zero_weight(sp));
  for (std::uint64_t s = 0; s < 5; ++s) {
    DensityField a = random_density(3 * s + 1, sp, mu);
    DensityField b = random_density(3 * s + 2, sp, mu);
    DensityField c = random_density(3 * s + 3, sp, mu);
    double ab = w2_circle_exact(a, b, sp, mu).w2;
    double bc = w2_circle_exact(b, c, sp, mu).w2;
    double ac = w2_circle_exact(a, c, sp, mu).w2;
    CHECK(ac <= ab + bc + 1e-6);
  }
}

TEST_CASE("monotone 1d on the zonal sphere") {
  ModelSpace sp = build_model_space(SpaceKind::sphere_zonal, {256});
  MeasureField mu = measure_of(sp, zero_weight(sp));
  DensityField rho = make_density(sample(sp, [](double th) { return 1.0 + 0.3 * std::cos(th); }), mu);
  CHECK(w2_monotone_1d(rho, rho, sp, mu).w2 <= 1e-12);

  DensityField north =
      make_density(sample(sp, [](double th) { return std::exp(100.0 * std::cos(th)); }), mu);
  DensityField south =
      make_density(sample(sp, [](double th) { return std::exp(-100.0 * std::cos(th)); }), mu);
  double d = w2_monotone_1d(north, south, sp, mu).w2;
  // quantile-quadrature oracle for the kappa = 100 pole bumps
  CHECK(d == doctest::Approx(2.8906952340869543).epsilon(1e-3));
  CHECK(w2_monotone_1d(south, north, sp, mu).w2 == doctest::Approx(d).epsilon(1e-12));
}

TEST_CASE("monotone 1d: heat displacement scales like sqrt(t)") {
  ModelSpace sp = build_model_space(SpaceKind::sphere_zonal, {256});
  MeasureField mu = measure_of(sp, zero_weight(sp));
  DensityField rho = make_density(sample(sp, [](double th) { return 1.0 + 0.4 * std::cos(th); }), mu);
  double prev = 0.0;
  for (double t : {1e-3, 1e-2, 1e-1}) {
    DensityField evolved = heat_evolve(rho, t, Scheme::spectral, sp, zero_weight(sp));
    double d = w2_monotone_1d(rho, make_density(evolved.rho, mu), sp, mu).w2;
    CHECK(d <= 2.0 * std::sqrt(t));
    CHECK(d > prev);
    prev = d;
  }
}

TEST_CASE("sinkhorn: diagonal pair is exactly debiased to zero") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {64});
  MeasureField mu = measure_of(sp, zero_weight(sp));
  DensityField rho = random_density(9, sp, mu);
  TransportResult res = w2_sinkhorn(rho, rho, sp, mu);
  CHECK(res.w2 <= 1e-6);
}

TEST_CASE("sinkhorn matches the exact circle solver after extrapolation") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {128});
  MeasureField mu = measure_of(sp, zero_weight(sp));
  DensityField a = random_density(41, sp, mu);
  DensityField b = random_density(42, sp, mu);
  double exact = w2_circle_exact(a, b, sp, mu).w2;
  TransportResult sk = w2_sinkhorn(a, b, sp, mu);
  CHECK(std::abs(sk.w2 - exact) <= 5e-3);
  CHECK(sk.diag.marginal_error <= 1e-8);
  // debiased value sequence settles as eps shrinks (not exactly monotone)
  for (std::size_t k = 1; k < sk.diag.values.size(); ++k)
    CHECK(sk.diag.values[k] <= sk.diag.values[k - 1] + 1e-4);
  // symmetry within solver tolerance
  TransportResult sk2 = w2_sinkhorn(b, a, sp, mu);
  CHECK(std::abs(sk2.w2 - sk.w2) <= 1e-8);
}

TEST_CASE("sinkhorn on the torus matches the separable 1D answer") {
  ModelSpace t2 = build_model_space(SpaceKind::torus2, {32, 32});
  MeasureField mu2 = measure_of(t2, zero_weight(t2));
  DensityField a2 = make_density(std::vector<double>(t2.size(), 1.0), mu2);
  DensityField b2 = make_density(sample2(t2, [](double x, double) { return 1.0 + 0.5 * std::cos(x); }), mu2);

  ModelSpace c1 = build_model_space(SpaceKind::circle, {32});
  MeasureField mu1 = measure_of(c1, zero_weight(c1));
  DensityField a1 = make_density(std::vector<double>(c1.size(), 1.0), mu1);
  DensityField b1 = make_density(sample(c1, [](double x) { return 1.0 + 0.5 * std::cos(x); }), mu1);
  double exact = w2_circle_exact(a1, b1, c1, mu1).w2;

  // shortened schedule: the 1024-point torus problem is too slow below eps ~ 0.02
  SinkhornOptions opts;
  opts.eps_schedule = {0.5, 0.2, 0.08, 0.03};
  TransportResult sk = w2_sinkhorn(a2, b2, t2, mu2, CostKind::geodesic_sq, opts);
  CHECK(std::abs(sk.w2 - exact) <= 1e-2);
}

TEST_CASE("sinkhorn convergence failure carries diagnostics") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {64});
  MeasureField mu = measure_of(sp, zero_weight(sp));
  DensityField a = vm_bump(sp, mu, 0.0, 30.0);
  DensityField b = vm_bump(sp, mu, kPi, 30.0);
  SinkhornOptions opts;
  opts.max_iter = 2;
  CHECK_THROWS_AS(w2_sinkhorn(a, b, sp, mu, CostKind::geodesic_sq, opts),
                  SinkhornConvergenceError);
}

TEST_CASE("mccann path: constant for equal endpoints, rigid for rotated copies") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {128});
  WeightField w = zero_weight(sp);
  MeasureField mu = measure_of(sp, w);
  DensityField rho = vm_bump(sp, mu, 1.0, 10.0);
  BBPath same = build_mccann_path(rho, rho, 8, sp, w, mu);
  CHECK(same.continuity_residual <= 1e-10);
  CHECK(bb_action(same, sp, w, mu) <= 1e-12);

  double h = sp.h[0];
  int shift = static_cast<int>(std::lround(0.3 / h));
  double angle = shift * h;
  std::vector<double> rotated(sp.size());
  for (std::size_t k = 0; k < sp.size(); ++k)
    rotated[(k + shift) % sp.size()] = rho.rho[k];
  DensityField rho2 = make_density(rotated, mu);
  BBPath path = build_mccann_path(rho, rho2, 32, sp, w, mu);
  double action = bb_action(path, sp, w, mu);
  CHECK(action == doctest::Approx(angle * angle).epsilon(2e-2));
  // velocity field of a rigid rotation is constant: omega/rho = angle
  std::size_t peak = 0;
  for (std::size_t k = 0; k < sp.size(); ++k)
    if (path.rho_s[16].rho[k] > path.rho_s[16].rho[peak]) peak = k;
  CHECK(path.omega_s[16].comp[0][peak] / (0.5 * (path.rho_s[16].rho[peak] + path.rho_s[17].rho[peak])) ==
        doctest::Approx(angle).epsilon(1e-2));
}

TEST_CASE("mccann path: continuity residual shrinks with N, action brackets w2^2") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {128});
  WeightField w = zero_weight(sp);
  MeasureField mu = measure_of(sp, w);
  DensityField a = random_density(51, sp, mu);
  DensityField b = random_density(52, sp, mu);
  // spatial refinement drives the continuity defect down (time refinement
  // alone saturates against the fixed-grid divergence error)
  ModelSpace sp2 = build_model_space(SpaceKind::circle, {256});
  WeightField w2f = zero_weight(sp2);
  MeasureField mu2 = measure_of(sp2, w2f);
  DensityField a2 = random_density(51, sp2, mu2);
  DensityField b2 = random_density(52, sp2, mu2);
  BBPath coarse = build_mccann_path(a, b, 8, sp, w, mu);
  BBPath fine = build_mccann_path(a2, b2, 8, sp2, w2f, mu2);
  CHECK(fine.continuity_residual <= 0.6 * coarse.continuity_residual + 1e-8);

  double w2sq = w2_circle_exact(a, b, sp, mu).w2;
  w2sq *= w2sq;
  BBPath p32 = build_mccann_path(a, b, 32, sp, w, mu);
  double action = bb_action(p32, sp, w, mu);
  CHECK(action >= w2sq - 1e-4);
  CHECK(action <= w2sq + 5e-3);
}

TEST_CASE("mccann path on the zonal sphere") {
  ModelSpace sp = build_model_space(SpaceKind::sphere_zonal, {128});
  WeightField w = zero_weight(sp);
  MeasureField mu = measure_of(sp, w);
  DensityField a = make_density(sample(sp, [](double th) { return 1.0 + 0.3 * std::cos(th); }), mu);
  DensityField b = make_density(sample(sp, [](double th) { return 1.0 - 0.3 * std::cos(th); }), mu);
  BBPath path = build_mccann_path(a, b, 32, sp, w, mu);
  double w2sq = w2_monotone_1d(a, b, sp, mu).w2;
  w2sq *= w2sq;
  double action = bb_action(path, sp, w, mu);
  CHECK(action == doctest::Approx(w2sq).epsilon(0.02));
}

TEST_CASE("bb_action rejects a path violating continuity") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {128});
  WeightField w = zero_weight(sp);
  MeasureField mu = measure_of(sp, w);
  DensityField a = random_density(61, sp, mu);
  DensityField b = random_density(62, sp, mu);
  BBPath path = build_mccann_path(a, b, 16, sp, w, mu);
  path.omega_s[3].comp[0][10] += 100.0;  // break the flux
  CHECK_THROWS_AS(bb_action(path, sp, w, mu), std::invalid_argument);
}

TEST_CASE("cost matrix cache round-trips") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {32});
  auto direct = cost_matrix(sp, CostKind::geodesic_sq);
  std::string dir = "/tmp";
  auto first = cost_matrix_cached(sp, CostKind::geodesic_sq, dir);
  auto second = cost_matrix_cached(sp, CostKind::geodesic_sq, dir);
  CHECK(first == direct);
  CHECK(second == direct);
}

TEST_CASE("CSV round trips for scalars and forms") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {32});
  ScalarField f = random_fourier_scalar(77, sp);
  write_scalar_csv("/tmp/wlab_scalar.csv", sp, f.v);
  auto back = read_scalar_csv("/tmp/wlab_scalar.csv");
  CHECK(back == f.v);

  OneFormField om = random_fourier_form(78, sp);
  write_form_csv("/tmp/wlab_form.csv", om);
  OneFormField omb = read_form_csv("/tmp/wlab_form.csv");
  CHECK(omb.comp == om.comp);
}
