#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wlab/model_space.hpp"

namespace wlab {

struct ScalarField {
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(std::vector<double> vals) : v(std::move(vals)) {}
  ScalarField(std::size_t n, double fill) : v(n, fill) {}
  std::size_t size() const { return v.size(); }
  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
};

/// Probability density relative to mu: rho >= floor > 0 and sum(rho * mu) = 1.
struct DensityField {
  std::vector<double> rho;
  int clamped_nodes = 0;  // nodes raised to the floor during construction

  std::size_t size() const { return rho.size(); }
};

constexpr double kDensityFloor = 1e-10;

/// Normalize raw nonnegative values into a DensityField (clamping at the
/// floor first, then dividing by the mu-mass).
DensityField make_density(const std::vector<double>& raw, const MeasureField& mu,
                          double floor = kDensityFloor);

/// Covector field: 1 component on circle/sphere_zonal, 2 on torus2.
struct OneFormField {
  std::vector<std::vector<double>> comp;

  OneFormField() = default;
  explicit OneFormField(std::vector<double> c1) { comp.push_back(std::move(c1)); }
  OneFormField(std::vector<double> c1, std::vector<double> c2) {
    comp.push_back(std::move(c1));
    comp.push_back(std::move(c2));
  }
  int ncomp() const { return static_cast<int>(comp.size()); }
  std::size_t size() const { return comp.empty() ? 0 : comp[0].size(); }
};

// CSV I/O: densities/scalars as (node_index, coordinate(s), value),
// 1-forms as (node_index, comp_1[, comp_2]).
void write_scalar_csv(const std::string& path, const ModelSpace& space,
                      const std::vector<double>& values);
std::vector<double> read_scalar_csv(const std::string& path);
void write_form_csv(const std::string& path, const OneFormField& omega);
OneFormField read_form_csv(const std::string& path);

}  // namespace wlab
