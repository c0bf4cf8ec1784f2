#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "wlab/fields.hpp"
#include "wlab/model_space.hpp"

namespace wlab {

enum class TransportMethod { circle_exact, monotone_1d, sinkhorn, bb_action };
enum class CostKind { geodesic_sq };

struct TransportDiagnostics {
  int iterations = 0;
  double final_eps = 0.0;
  double marginal_error = 0.0;
  int cut_index = -1;
  double cut_theta = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> eps_values;
  std::vector<double> values;  // debiased entropic value per eps stage
  double extrapolated = std::numeric_limits<double>::quiet_NaN();
  bool zonal_cross_checked = false;
};

struct TransportResult {
  double w2 = 0.0;
  TransportMethod method = TransportMethod::circle_exact;
  TransportDiagnostics diag;
};

struct SinkhornConvergenceError : std::runtime_error {
  TransportDiagnostics diag;
  explicit SinkhornConvergenceError(const std::string& msg, TransportDiagnostics d)
      : std::runtime_error(msg), diag(std::move(d)) {}
};

/// W2 on the circle by exhaustive cut search: unroll the circle at every cell
/// boundary and take the smallest 1D quantile-coupling cost.
TransportResult w2_circle_exact(const DensityField& rho0, const DensityField& rho1,
                                const ModelSpace& space, const MeasureField& mu);

/// W2 for zonal sphere densities by monotone rearrangement in colatitude.
TransportResult w2_monotone_1d(const DensityField& rho0, const DensityField& rho1,
                               const ModelSpace& space, const MeasureField& mu);

struct SinkhornOptions {
  std::vector<double> eps_schedule;  // empty -> geometric 0.5 .. 0.002 in 8 stages
  int max_iter = 200000;
  double marginal_tol = 1e-8;
  int full_sphere_n_phi = 64;  // coarse full-S2 grid used for sphere_zonal inputs
  int full_sphere_n_theta = 32;
};

std::vector<double> default_eps_schedule();

/// Debiased entropic OT with a decreasing epsilon schedule, Aitken-extrapolated
/// to eps -> 0. Squared geodesic cost on the model space (sphere_zonal inputs
/// are lifted to a coarse full-sphere grid).
TransportResult w2_sinkhorn(const DensityField& rho0, const DensityField& rho1,
                            const ModelSpace& space, const MeasureField& mu,
                            CostKind cost = CostKind::geodesic_sq,
                            const SinkhornOptions& opts = {});

/// Generic discrete solver on given masses and a row-major cost matrix;
/// returns the extrapolated debiased value (an approximation of W2^2).
double sinkhorn_debiased(const std::vector<double>& a, const std::vector<double>& b,
                         const std::vector<double>& cost, const SinkhornOptions& opts,
                         TransportDiagnostics* diag = nullptr);

/// Density/momentum path for the kinetic-action form of W2^2. Densities are
/// relative to mu at K+1 path times; 1-form momenta sit at the K midpoints.
struct BBPath {
  std::vector<DensityField> rho_s;
  std::vector<OneFormField> omega_s;
  double continuity_residual = 0.0;
  double continuity_tol = 0.0;
};

/// Displacement interpolation from the exact 1D map (circle or sphere_zonal).
BBPath build_mccann_path(const DensityField& rho0, const DensityField& rho1, int K,
                         const ModelSpace& space, const WeightField& w, const MeasureField& mu);

/// Kinetic action int_0^1 int |omega_s|^2 / rho_s dmu ds; upper-bounds W2^2
/// for any admissible path. Recomputes the continuity residual and refuses
/// paths exceeding the declared tolerance.
double bb_action(const BBPath& path, const ModelSpace& space, const WeightField& w,
                 const MeasureField& mu);

std::vector<double> cost_matrix(const ModelSpace& space, CostKind cost);
std::vector<double> cost_matrix_cached(const ModelSpace& space, CostKind cost,
                                       const std::string& cache_dir);

// coarse full-sphere lat-long grid helpers (zonal cross-validation)
std::vector<double> sphere_full_grid_cost(int n_phi, int n_theta);
std::vector<double> zonal_to_full_masses(const DensityField& rho, const ModelSpace& space,
                                         const MeasureField& mu, int n_phi, int n_theta);

}  // namespace wlab
