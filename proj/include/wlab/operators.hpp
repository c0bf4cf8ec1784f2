#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "wlab/model_space.hpp"

namespace wlab {

/// Second-order central first derivative of nodal values along an axis.
/// Periodic wrap on circle/torus; even reflection across the sphere poles.
std::vector<double> deriv1(const std::vector<double>& f, const ModelSpace& space, int axis);

/// Divergence-form discretization of L = Delta - grad(Psi).grad:
/// L f = M^{-1} S f with S symmetric negative semidefinite and
/// M = diag(m), m the unnormalized mu node measures. Mass (m^T f) is
/// conserved exactly by any flow of this operator and the semigroup is
/// symmetric in the discrete L^2(mu).
struct Generator {
  Eigen::SparseMatrix<double> S;
  Eigen::VectorXd m;

  std::vector<double> apply(const std::vector<double>& f) const;
};

Generator build_generator(const ModelSpace& space, const WeightField& w);

}  // namespace wlab
