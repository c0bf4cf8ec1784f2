#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <cstring>

#include "helpers.hpp"
#include "wlab/harness.hpp"
#include "wlab/random_fields.hpp"

using namespace wlab;
using namespace wlab::testutil;

namespace {

bool same_double(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return std::memcmp(&a, &b, sizeof a) == 0;
}

bool same_rows(const std::vector<ReportRow>& a, const std::vector<ReportRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const ReportRow &x = a[k], &y = b[k];
    if (!same_double(x.t, y.t) || !same_double(x.s, y.s) || !same_double(x.lhs, y.lhs) ||
        !same_double(x.rhs, y.rhs) || !same_double(x.deficit, y.deficit) ||
        !same_double(x.dim_term, y.dim_term) || !same_double(x.ent_f, y.ent_f) ||
        !same_double(x.ent_g, y.ent_g))
      return false;
  }
  return true;
}

WeightField cos_weight(const ModelSpace& sp, double a) {
  return make_weight(
      sp, [a](double th) { return a * std::cos(th); }, [a](double th) { return -a * std::sin(th); },
      [a](double th) { return -a * std::cos(th); });
}

}  // namespace

TEST_CASE("s_r branches") {
  CHECK(s_r(0.0, 0.7) == 0.7);
  CHECK(s_r(1.0, 0.5) == doctest::Approx(std::sin(0.5)).epsilon(1e-15));
  CHECK(s_r(4.0, 0.5) == doctest::Approx(std::sin(1.0) / 2.0).epsilon(1e-15));
  CHECK(s_r(-1.0, 0.5) == doctest::Approx(std::sinh(0.5)).epsilon(1e-15));
}

TEST_CASE("main contraction: f = g gives all-zero rows") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {64});
  WeightField w = zero_weight(sp);
  MeasureField mu = measure_of(sp, w);
  DensityField f = random_density(5, sp, mu);
  CDParams cd{0.0, 1.0, 0};
  InequalityReport rep = run_main_contraction(f, f, cd, {0.0, 0.1, 0.2}, sp, w, mu);
  for (const auto& r : rep.rows) {
    CHECK(std::abs(r.lhs) <= 1e-12);
    CHECK(std::abs(r.rhs) <= 1e-12);
    CHECK(std::abs(r.dim_term) <= 1e-14);
  }
  CHECK(rep.pass());
}

TEST_CASE("main contraction: flat-circle baseline at modest resolution") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {128});
  WeightField w = zero_weight(sp);
  MeasureField mu = measure_of(sp, w);
  DensityField f = make_density(sample(sp, [](double th) { return 1.0 + 0.5 * std::cos(th); }), mu);
  DensityField g = make_density(std::vector<double>(sp.size(), 1.0), mu);
  CDParams cd{0.0, 1.0, 0};
  std::vector<double> ts = {0.0, 0.1, 0.25, 0.5};
  InequalityReport rep = run_main_contraction(f, g, cd, ts, sp, w, mu);
  CHECK(rep.min_deficit >= -1e-3);
  REQUIRE(rep.rows.size() == 4);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) CHECK(rep.rows[i].dim_term > 0.0);
  CHECK(rep.rows[0].dim_term == 0.0);
  // rows sorted, deficit = rhs - lhs, summary consistent
  double mn = 1e300;
  for (const auto& r : rep.rows) {
    CHECK(r.deficit == r.rhs - r.lhs);
    mn = std::min(mn, r.deficit);
  }
  CHECK(rep.min_deficit == mn);
}

TEST_CASE("infeasible cd rejected") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {64});
  WeightField w = zero_weight(sp);
  MeasureField mu = measure_of(sp, w);
  DensityField f = random_density(6, sp, mu);
  DensityField g = random_density(7, sp, mu);
  CDParams bad{0.5, 1.0, 0};
  CHECK_THROWS_AS(run_main_contraction(f, g, bad, {0.1}, sp, w, mu), std::domain_error);
}

TEST_CASE("vrs limit: rotated copies sit on the equality case with zero dim term") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {128});
  WeightField w = zero_weight(sp);
  MeasureField mu = measure_of(sp, w);
  auto base = sample(sp, [](double th) { return std::exp(3.0 * std::cos(th)); });
  int shift = 8;
  std::vector<double> rot(base.size());
  for (std::size_t k = 0; k < base.size(); ++k) rot[(k + shift) % base.size()] = base[k];
  DensityField f = make_density(base, mu), g = make_density(rot, mu);

  CDParams cd{0.0, kInfiniteDim, 0};
  InequalityReport rep = run_vrs_limit(f, g, cd, {0.0, 0.1, 0.3}, sp, w, mu);
  // equality at t = 0; once the bumps spread, transport beats the rigid rotation
  for (const auto& r : rep.rows) {
    if (r.t == 0.0) CHECK(r.lhs == doctest::Approx(r.rhs).epsilon(1e-3));
    CHECK(r.deficit >= -1e-6);
  }

  // equal entropy trajectories kill the dimensional term in the main checker
  CDParams cd1{0.0, 1.0, 0};
  InequalityReport main = run_main_contraction(f, g, cd1, {0.1, 0.3}, sp, w, mu);
  for (const auto& r : main.rows) CHECK(std::abs(r.dim_term) <= 1e-10);
}

TEST_CASE("vrs limit: weighted circle with negative curvature bound") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {128});
  WeightField w = cos_weight(sp, 0.1);
  MeasureField mu = measure_of(sp, w);
  DensityField f = make_density(sample(sp, [](double th) { return 1.0 + 0.5 * std::cos(th); }), mu);
  DensityField g = make_density(std::vector<double>(sp.size(), 1.0), mu);
  CDParams cd = cd_best_R(sp, w, kInfiniteDim);
  InequalityReport rep = run_vrs_limit(f, g, cd, {0.0, 0.2, 0.5, 1.0}, sp, w, mu);
  CHECK(rep.min_deficit >= -1e-3);
  for (const auto& r : rep.rows) CHECK(r.dim_term == 0.0);
}

TEST_CASE("deficit is monotone in m") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {128});
  WeightField w = cos_weight(sp, 0.1);
  MeasureField mu = measure_of(sp, w);
  DensityField f = make_density(sample(sp, [](double th) { return 1.0 + 0.5 * std::cos(th); }), mu);
  DensityField g = make_density(std::vector<double>(sp.size(), 1.0), mu);
  std::vector<double> ts = {0.1, 0.3, 0.6};
  CDParams cd2 = cd_best_R(sp, w, 2.0);
  InequalityReport rep2 = run_main_contraction(f, g, cd2, ts, sp, w, mu);
  CDParams cdi = cd2;
  cdi.m = kInfiniteDim;
  InequalityReport repi = run_main_contraction(f, g, cdi, ts, sp, w, mu);
  for (std::size_t k = 0; k < ts.size(); ++k)
    CHECK(repi.rows[k].deficit >= rep2.rows[k].deficit - 1e-12);
}

TEST_CASE("two-time bound: analytic rhs offset and boundary rows") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {128});
  WeightField w = zero_weight(sp);
  MeasureField mu = measure_of(sp, w);
  DensityField f = make_density(sample(sp, [](double th) { return 1.0 + 0.5 * std::cos(th); }), mu);
  DensityField g = make_density(std::vector<double>(sp.size(), 1.0), mu);
  std::vector<std::pair<double, double>> grid = {{0.04, 0.09}, {0.0, 0.1}, {0.1, 0.0}, {0.0, 0.0}};
  InequalityReport rep = run_simple_two_time(f, g, grid, sp, w, mu);
  CHECK(rep.min_deficit >= -1e-3);
  const ReportRow* r00 = nullptr;
  const ReportRow* r49 = nullptr;
  for (const auto& r : rep.rows) {
    if (r.s == 0.0 && r.t == 0.0) r00 = &r;
    if (r.s == 0.04 && r.t == 0.09) r49 = &r;
  }
  REQUIRE(r00 != nullptr);
  REQUIRE(r49 != nullptr);
  // 2 n (sqrt(s) - sqrt(t))^2 = 2 (0.2 - 0.3)^2 = 0.02 analytically
  CHECK(r49->rhs - r00->rhs == doctest::Approx(0.02).epsilon(1e-12));

  WeightField wn = cos_weight(sp, 0.1);
  MeasureField mun = measure_of(sp, wn);
  CHECK_THROWS_AS(run_simple_two_time(f, g, grid, sp, wn, mun), std::domain_error);
}

TEST_CASE("eks bound: R = 0 branch agrees with the two-time checker") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {128});
  WeightField w = zero_weight(sp);
  MeasureField mu = measure_of(sp, w);
  DensityField f = make_density(sample(sp, [](double th) { return 1.0 + 0.5 * std::cos(th); }), mu);
  DensityField g = make_density(std::vector<double>(sp.size(), 1.0), mu);
  std::vector<std::pair<double, double>> grid = {{0.04, 0.09}, {0.09, 0.04}, {0.05, 0.05}};
  CDParams cd{0.0, 1.0, 0};
  InequalityReport eks = run_eks_bound(f, g, cd, grid, sp, w, mu);
  InequalityReport simple = run_simple_two_time(f, g, grid, sp, w, mu);
  // eks row (s,t) corresponds to the two-time row (s' = t, t' = s) after x4
  for (const auto& re : eks.rows) {
    bool matched = false;
    for (const auto& rs : simple.rows)
      if (rs.s == re.t && rs.t == re.s) {
        CHECK(std::abs(4.0 * re.lhs - rs.lhs) <= 1e-9);
        CHECK(std::abs(4.0 * re.rhs - rs.rhs) <= 1e-9);
        matched = true;
      }
    CHECK(matched);
  }
}

TEST_CASE("eks bound: sin branch on the sphere, s = t diagonal") {
  ModelSpace sp = build_model_space(SpaceKind::sphere_zonal, {128});
  WeightField w = zero_weight(sp);
  MeasureField mu = measure_of(sp, w);
  DensityField f = make_density(sample(sp, [](double th) { return 1.0 + 0.3 * std::cos(th); }), mu);
  DensityField g = make_density(sample(sp, [](double th) { return 1.0 - 0.3 * std::cos(th); }), mu);
  std::vector<std::pair<double, double>> grid;
  for (double t : {0.05, 0.1, 0.2, 0.35, 0.5}) grid.emplace_back(t, t);
  grid.emplace_back(0.0, 0.0);  // limit row
  CDParams cd{1.0, 2.0, 0};
  HarnessOptions opts;
  opts.scheme = Scheme::spectral;
  InequalityReport rep = run_eks_bound(f, g, cd, grid, sp, w, mu, opts);
  CHECK(rep.min_deficit >= -1e-3);
  CHECK_FALSE(rep.notes.empty());  // s = t = 0 convention is flagged
}

TEST_CASE("report serialization round-trips bitwise") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {64});
  WeightField w = zero_weight(sp);
  MeasureField mu = measure_of(sp, w);
  DensityField f = random_density(71, sp, mu);
  DensityField g = random_density(72, sp, mu);
  CDParams cd{0.0, 1.0, 0};
  InequalityReport rep = run_main_contraction(f, g, cd, {0.0, 0.05, 0.1}, sp, w, mu);

  emit_report(rep, ReportFormat::csv, "/tmp/wlab_report.csv");
  InequalityReport back = read_report(ReportFormat::csv, "/tmp/wlab_report.csv");
  CHECK(back.name == rep.name);
  CHECK(same_rows(back.rows, rep.rows));

  emit_report(rep, ReportFormat::json, "/tmp/wlab_report.json");
  InequalityReport jback = read_report(ReportFormat::json, "/tmp/wlab_report.json");
  CHECK(jback.name == rep.name);
  CHECK(same_rows(jback.rows, rep.rows));
  CHECK(same_double(jback.min_deficit, rep.min_deficit));

  // empty report -> header-only CSV
  InequalityReport empty;
  emit_report(empty, ReportFormat::csv, "/tmp/wlab_empty.csv");
  InequalityReport eback = read_report(ReportFormat::csv, "/tmp/wlab_empty.csv");
  CHECK(eback.rows.empty());
}

TEST_CASE("smoothing records clamps and preserves normalization") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {128});
  WeightField w = zero_weight(sp);
  MeasureField mu = measure_of(sp, w);
  DensityField f = random_density(81, sp, mu);
  DensityField sm = smooth_density(f, 1e-4, sp, w, mu, Scheme::crank_nicolson);
  CHECK(sm.clamped_nodes == 0);
  double mass = 0.0;
  for (std::size_t k = 0; k < sp.size(); ++k) mass += sm.rho[k] * mu.mu_weights[k];
  CHECK(std::abs(mass - 1.0) <= 1e-12);
}

TEST_CASE("time consistency: restarting the flow reproduces the tail") {
  ModelSpace sp = build_model_space(SpaceKind::circle, {128});
  WeightField w = zero_weight(sp);
  MeasureField mu = measure_of(sp, w);
  DensityField f = make_density(sample(sp, [](double th) { return 1.0 + 0.5 * std::cos(th); }), mu);
  DensityField g = make_density(sample(sp, [](double th) { return 1.0 - 0.4 * std::sin(th); }), mu);
  CDParams cd{0.0, 1.0, 0};
  HarnessOptions opts;
  opts.smoothing_eps = 0.0;  // restart must see the raw evolved densities

  double t0 = 0.1, t1 = 0.3;
  InequalityReport full = run_main_contraction(f, g, cd, {t0, t1}, sp, w, mu, opts);
  DensityField f0 = heat_evolve(f, t0, Scheme::crank_nicolson, sp, w);
  DensityField g0 = heat_evolve(g, t0, Scheme::crank_nicolson, sp, w);
  InequalityReport tail =
      run_main_contraction(make_density(f0.rho, mu), make_density(g0.rho, mu), cd, {t1 - t0}, sp,
                           w, mu, opts);
  // lhs at the common final time agrees within combined tolerance
  CHECK(std::abs(tail.rows[0].lhs - full.rows[1].lhs) <= 1e-5);
}
