#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace wlab {

enum class SpaceKind { circle, torus2, sphere_zonal };

std::string to_string(SpaceKind k);
SpaceKind space_kind_from_string(const std::string& s);

/// Discretized compact model space: uniform angular grid, quadrature
/// weights for the Riemannian volume, and the intrinsic dimension.
///
/// circle       : theta_k = 2*pi*k/N on [0, 2*pi), n = 1
/// torus2       : (x_i, y_j) product of two circles, n = 2
/// sphere_zonal : colatitude midpoints theta_j = (j+1/2)*pi/N, n = 2,
///                weights are the exact cell integrals of 2*pi*sin(theta)
///                so they sum to 4*pi to machine precision.
struct ModelSpace {
  SpaceKind kind;
  int n = 1;                              // intrinsic dimension
  std::vector<int> shape;                 // nodes per axis
  std::vector<std::vector<double>> axes;  // node coordinates per axis
  std::vector<double> h;                  // grid spacing per axis
  std::vector<double> vol_weights;        // flattened, row-major

  std::size_t size() const { return vol_weights.size(); }
  int num_axes() const { return static_cast<int>(shape.size()); }

  // flattened index for torus2 (row-major: i*Ny + j)
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * shape[1] + j; }

  double coord(std::size_t node, int axis) const {
    if (shape.size() == 1) return axes[0][node];
    return axis == 0 ? axes[0][node / shape[1]] : axes[1][node % shape[1]];
  }

  double analytic_volume() const;
};

ModelSpace build_model_space(SpaceKind kind, const std::vector<int>& resolution);

/// Potential Psi with nodal first/second derivatives. When closed forms are
/// available they should be supplied; otherwise derivatives fall back to
/// 4th-order central differences (periodic wrap, even reflection at the
/// sphere poles).
struct WeightField {
  std::vector<double> psi;
  std::vector<std::vector<double>> dpsi;   // one entry per axis
  std::vector<std::vector<double>> d2psi;  // circle/sphere: [psi'']; torus2: [xx, xy, yy]
  bool analytic = false;

  bool is_zero() const;
};

using ScalarFn = std::function<double(double)>;
using ScalarFn2 = std::function<double(double, double)>;

WeightField zero_weight(const ModelSpace& space);
// closed-form 1D potential (circle: psi(theta); sphere_zonal: zonal psi(theta))
WeightField make_weight(const ModelSpace& space, const ScalarFn& psi, const ScalarFn& dpsi,
                        const ScalarFn& d2psi);
// closed-form torus potential with gradient and Hessian
WeightField make_weight(const ModelSpace& space, const ScalarFn2& psi, const ScalarFn2& px,
                        const ScalarFn2& py, const ScalarFn2& pxx, const ScalarFn2& pxy,
                        const ScalarFn2& pyy);
// sampled potential, derivatives by 4th-order central differences
WeightField make_weight_sampled(const ModelSpace& space, const std::vector<double>& psi);

/// Normalized reference measure mu = e^{-Psi} dx / Z.
struct MeasureField {
  std::vector<double> mu_weights;  // per node, sums to 1
  double normalization_constant = 0.0;
};

MeasureField measure_of(const ModelSpace& space, const WeightField& w);

/// Per-node Bakry-Emery tensor Ricci(L) = Ricci_g + Hess(Psi), stored as the
/// independent components for each space kind:
///   circle       : [psi'']
///   torus2       : [xx, xy, yy]
///   sphere_zonal : diagonal [theta-theta, phi-phi] in the orthonormal frame
struct RicciField {
  int ncomp = 1;
  std::vector<double> comps;  // node-major, ncomp per node

  double at(std::size_t node, int c) const { return comps[node * ncomp + c]; }
};

RicciField ricci_operator_field(const ModelSpace& space, const WeightField& w);

constexpr double kInfiniteDim = std::numeric_limits<double>::infinity();

struct CDParams {
  double R = 0.0;
  double m = kInfiniteDim;  // effective dimension, m >= n or +inf
  std::size_t witness_node = 0;
};

/// Best R with CD(R,m): grid minimum of the smallest eigenvalue of
/// Ricci(L) - (1/(m-n)) grad(Psi) x grad(Psi).
CDParams cd_best_R(const ModelSpace& space, const WeightField& w, double m);

}  // namespace wlab
