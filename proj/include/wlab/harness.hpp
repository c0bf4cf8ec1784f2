#pragma once

#include <limits>
#include <string>
#include <vector>

#include "wlab/fields.hpp"
#include "wlab/model_space.hpp"
#include "wlab/semigroup.hpp"
#include "wlab/transport.hpp"

namespace wlab {

enum class ReportName { main_dimensional, vrs_limit, simple_two_time, eks };

std::string to_string(ReportName n);
ReportName report_name_from_string(const std::string& s);

struct ReportRow {
  double t = 0.0;
  double s = std::numeric_limits<double>::quiet_NaN();  // two-time checkers only
  double lhs = 0.0;
  double rhs = 0.0;
  double deficit = 0.0;   // rhs - lhs
  double dim_term = 0.0;  // dimensional correction subtracted from the rhs
  double ent_f = std::numeric_limits<double>::quiet_NaN();
  double ent_g = std::numeric_limits<double>::quiet_NaN();
};

struct ReportParams {
  std::string space;
  std::string psi;  // human-readable potential descriptor
  double m = kInfiniteDim;
  double R = 0.0;
  std::vector<int> resolution;
  double dt = 0.0;             // CN step of the finest sweep (0 for spectral)
  double smoothing_eps = 0.0;  // recorded f_eps = (P_eps f + eps)/(1+eps)
  int u_points = 0;
};

struct InequalityReport {
  ReportName name = ReportName::main_dimensional;
  ReportParams params;
  std::vector<ReportRow> rows;
  double min_deficit = 0.0;
  double argmin_time = 0.0;
  double tolerance = 0.0;
  std::vector<std::string> notes;

  bool pass() const { return min_deficit >= -tolerance; }
};

struct HarnessOptions {
  int u_points = 33;
  double smoothing_eps = 1e-4;
  Scheme scheme = Scheme::crank_nicolson;
  // exact solvers on circle/sphere_zonal; Sinkhorn elsewhere
  TransportMethod w2_method = TransportMethod::circle_exact;
  bool w2_method_auto = true;
  SinkhornOptions sinkhorn;
  // frozen tolerance-model constants: tol = c1 h^2 + c2 dt^2 + c3/u_points + w2_tol
  double tol_c1 = 2.0;
  double tol_c2 = 2.0;
  double tol_c3 = 0.02;
  double tol_w2 = 1e-6;
};

/// eps-smoothing f_eps = (P_eps f + eps)/(1+eps); clamps recorded by make_density.
DensityField smooth_density(const DensityField& f, double eps, const ModelSpace& space,
                            const WeightField& w, const MeasureField& mu, Scheme scheme);

/// W2 by the method appropriate for the space (exact 1D where available).
TransportResult w2_dispatch(const DensityField& a, const DensityField& b, const ModelSpace& space,
                            const MeasureField& mu, const HarnessOptions& opts);

/// Thm-1 dimensional contraction:
///   W2^2(P_t f, P_t g) <= e^{-2Rt} W2^2(f,g)
///     - (2/m) int_0^t e^{-2R(t-u)} [Ent(P_u g) - Ent(P_u f)]^2 du.
InequalityReport run_main_contraction(const DensityField& f, const DensityField& g,
                                      const CDParams& cd, const std::vector<double>& t_grid,
                                      const ModelSpace& space, const WeightField& w,
                                      const MeasureField& mu, const HarnessOptions& opts = {});

/// m = +infinity limit: plain exponential contraction, dim_term = 0.
InequalityReport run_vrs_limit(const DensityField& f, const DensityField& g, const CDParams& cd,
                               const std::vector<double>& t_grid, const ModelSpace& space,
                               const WeightField& w, const MeasureField& mu,
                               const HarnessOptions& opts = {});

/// Two-time bound under nonnegative curvature:
///   W2^2(P_s f, P_t g) <= W2^2(f,g) + 2 n (sqrt(s) - sqrt(t))^2.
InequalityReport run_simple_two_time(const DensityField& f, const DensityField& g,
                                     const std::vector<std::pair<double, double>>& st_grid,
                                     const ModelSpace& space, const WeightField& w,
                                     const MeasureField& mu, const HarnessOptions& opts = {});

/// Erbar-Kuwada-Sturm bound with the comparison function s_r:
///   s_{R/n}(W2(P_t f, P_s g)/2)^2 <= e^{-R(s+t)} s_{R/n}(W2(f,g)/2)^2
///     + (n/R)(1 - e^{-R(s+t)}) (sqrt(t)-sqrt(s))^2 / (2(s+t)).
/// R = 0 and s+t = 0 take the limit values.
InequalityReport run_eks_bound(const DensityField& f, const DensityField& g, const CDParams& cd,
                               const std::vector<std::pair<double, double>>& st_grid,
                               const ModelSpace& space, const WeightField& w,
                               const MeasureField& mu, const HarnessOptions& opts = {});

double s_r(double r, double x);

enum class ReportFormat { json, csv };

void emit_report(const InequalityReport& report, ReportFormat format, const std::string& path);
InequalityReport read_report(ReportFormat format, const std::string& path);

}  // namespace wlab
