#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "helpers.hpp"
#include "wlab/model_space.hpp"

using namespace wlab;
using namespace wlab::testutil;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("circle grid: uniform nodes and weights, exact volume") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {256});
  CHECK(sp.n == 1);
  CHECK(sp.size() == 256);
  CHECK(sp.axes[0][7] == doctest::Approx(2.0 * kPi * 7 / 256).epsilon(1e-15));
  double vol = 0.0;
  for (double w : sp.vol_weights) {
    CHECK(w == doctest::Approx(2.0 * kPi / 256).epsilon(1e-14));
    vol += w;
  }
  CHECK(std::abs(vol - sp.analytic_volume()) / sp.analytic_volume() <= 1e-10);
}

TEST_CASE("torus grid: 4096 nodes, volume 4 pi^2") {
  ModelSpace sp = build_model_space(SpaceKind::torus2, {64, 64});
  CHECK(sp.n == 2);
  CHECK(sp.size() == 4096);
  double vol = 0.0;
  for (double w : sp.vol_weights) vol += w;
  CHECK(std::abs(vol - 4.0 * kPi * kPi) / (4.0 * kPi * kPi) <= 1e-10);
}

TEST_CASE("sphere_zonal grid: sin-theta weights summing to 4 pi") {
  ModelSpace sp = build_model_space(SpaceKind::sphere_zonal, {512});
  CHECK(sp.n == 2);
  double vol = 0.0;
  for (double w : sp.vol_weights) {
    CHECK(w > 0.0);
    vol += w;
  }
  CHECK(std::abs(vol - 4.0 * kPi) / (4.0 * kPi) <= 1e-10);
  // weights follow 2 pi sin(theta) dtheta up to the cell-integral correction
  double h = sp.h[0];
  for (int j = 0; j < 512; j += 97)
    CHECK(sp.vol_weights[j] ==
          doctest::Approx(2.0 * kPi * std::sin(sp.axes[0][j]) * h).epsilon(2e-4));
}

TEST_CASE("resolution floor enforced") {
  CHECK_THROWS_AS(build_model_space(SpaceKind::circle, {15}), std::invalid_argument);
  CHECK_THROWS_AS(build_model_space(SpaceKind::torus2, {64, 8}), std::invalid_argument);
}

TEST_CASE("measure: unweighted circle is uniform") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {256});
  MeasureField mu = measure_of(sp, zero_weight(sp));
  double total = 0.0;
  for (double w : mu.mu_weights) {
    CHECK(w == doctest::Approx(1.0 / 256).epsilon(1e-13));
    total += w;
  }
  CHECK(std::abs(total - 1.0) <= 1e-12);
}

TEST_CASE("measure: psi = 0.1 cos(theta) hits the Bessel normalization") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {256});
  WeightField w = make_weight(
      sp, [](double th) { return 0.1 * std::cos(th); },
      [](double th) { return -0.1 * std::sin(th); }, [](double th) { return -0.1 * std::cos(th); });
  MeasureField mu = measure_of(sp, w);
  // 2 pi I_0(0.1), frozen from an independent quadrature oracle
  CHECK(mu.normalization_constant == doctest::Approx(6.298903090652081).epsilon(1e-10));
  double total = 0.0;
  for (double v : mu.mu_weights) total += v;
  CHECK(std::abs(total - 1.0) <= 1e-12);
}

TEST_CASE("measure: non-finite psi rejected") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {32});
  std::vector<double> psi(sp.size(), 0.0);
  psi[3] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(measure_of(sp, make_weight_sampled(sp, psi)), std::invalid_argument);
}

TEST_CASE("Bakry-Emery tensor on the model spaces") {
  ModelSpace circ = build_model_space(SpaceKind::circle, {128});
  RicciField r0 = ricci_operator_field(circ, zero_weight(circ));
  for (std::size_t k = 0; k < circ.size(); ++k) CHECK(r0.at(k, 0) == 0.0);

  WeightField w = make_weight(
      circ, [](double th) { return 0.1 * std::cos(th); },
      [](double th) { return -0.1 * std::sin(th); }, [](double th) { return -0.1 * std::cos(th); });
  RicciField r1 = ricci_operator_field(circ, w);
  for (std::size_t k = 0; k < circ.size(); k += 13)
    CHECK(r1.at(k, 0) == doctest::Approx(-0.1 * std::cos(circ.axes[0][k])).epsilon(1e-12));

  ModelSpace sph = build_model_space(SpaceKind::sphere_zonal, {256});
  RicciField rs = ricci_operator_field(sph, zero_weight(sph));
  for (std::size_t k = 0; k < sph.size(); k += 17) {
    CHECK(rs.at(k, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rs.at(k, 1) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("cd_best_R oracles and error cases") {
  ModelSpace circ = build_model_space(SpaceKind::circle, {512});
  CHECK(cd_best_R(circ, zero_weight(circ), 1.0).R == doctest::Approx(0.0).epsilon(1e-14));

  ModelSpace sph = build_model_space(SpaceKind::sphere_zonal, {256});
  CDParams sp_cd = cd_best_R(sph, zero_weight(sph), 2.0);
  CHECK(std::abs(sp_cd.R - 1.0) <= 1e-6);

  WeightField w = make_weight(
      circ, [](double th) { return 0.1 * std::cos(th); },
      [](double th) { return -0.1 * std::sin(th); }, [](double th) { return -0.1 * std::cos(th); });
  CDParams cd = cd_best_R(circ, w, 2.0);
  CHECK(cd.R == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK(cd.witness_node == 0);  // minimum of -0.1 cos - 0.01 sin^2 sits at theta = 0

  CHECK_THROWS_AS(cd_best_R(circ, w, 0.5), std::domain_error);  // m < n
  CHECK_THROWS_AS(cd_best_R(circ, w, 1.0), std::domain_error);  // m = n needs psi = 0
}

TEST_CASE("cd_best_R monotone in m; psi=0 independent of m") {
  ModelSpace circ = build_model_space(SpaceKind::circle, {256});
  WeightField w = make_weight(
      circ, [](double th) { return 0.3 * std::sin(th); }, [](double th) { return 0.3 * std::cos(th); },
      [](double th) { return -0.3 * std::sin(th); });
  double prev = -1e30;
  for (double m : {1.5, 2.0, 4.0, kInfiniteDim}) {
    double R = cd_best_R(circ, w, m).R;
    CHECK(R >= prev - 1e-13);
    prev = R;
  }
  CHECK(cd_best_R(circ, zero_weight(circ), 1.0).R ==
        doctest::Approx(cd_best_R(circ, zero_weight(circ), kInfiniteDim).R).epsilon(1e-14));
}

TEST_CASE("sampled weight derivatives track closed forms") {
  ModelSpace circ = build_model_space(SpaceKind::circle, {256});
  auto psi = sample(circ, [](double th) { return 0.2 * std::cos(2.0 * th); });
  WeightField ws = make_weight_sampled(circ, psi);
  auto d_exact = sample(circ, [](double th) { return -0.4 * std::sin(2.0 * th); });
  auto d2_exact = sample(circ, [](double th) { return -0.8 * std::cos(2.0 * th); });
  CHECK(sup_diff(ws.dpsi[0], d_exact) <= 1e-6);   // 4th-order differences
  CHECK(sup_diff(ws.d2psi[0], d2_exact) <= 1e-5);
  CHECK_FALSE(ws.analytic);
}
