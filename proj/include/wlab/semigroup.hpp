#pragma once

#include <vector>

#include "wlab/fields.hpp"
#include "wlab/model_space.hpp"

namespace wlab {

enum class Scheme { spectral, crank_nicolson };

/// L f = Delta f - grad(Psi).grad(f), divergence-form, O(h^2).
ScalarField apply_generator(const ScalarField& f, const ModelSpace& space, const WeightField& w);

/// P_t f. Spectral requires Psi = 0 (Fourier on circle/torus2, discrete
/// Legendre eigenbasis on sphere_zonal). Crank-Nicolson uses
/// dt = t / ceil(t / (h^2/2)) with a positivity fallback to halved steps.
ScalarField heat_evolve(const ScalarField& f, double t, Scheme scheme, const ModelSpace& space,
                        const WeightField& w);
DensityField heat_evolve(const DensityField& f, double t, Scheme scheme, const ModelSpace& space,
                         const WeightField& w);

/// One sweep through sorted times >= 0, returning a snapshot per time.
/// dt_scale multiplies the default Crank-Nicolson step cap h^2/2 (used by
/// time-convergence studies; spectral ignores it).
std::vector<ScalarField> heat_evolve_trajectory(const ScalarField& f,
                                                const std::vector<double>& times, Scheme scheme,
                                                const ModelSpace& space, const WeightField& w,
                                                double dt_scale = 1.0);

/// Ent_mu(rho) = sum rho log(rho) mu. Throws if a node is below the floor.
double entropy(const DensityField& rho, const MeasureField& mu, double floor = kDensityFloor);

double integrate(const std::vector<double>& f, const MeasureField& mu);

/// Gamma(f,g) = grad f . grad g (pointwise, orthonormal frame).
ScalarField gamma(const ScalarField& f, const ScalarField& g, const ModelSpace& space);

/// Gamma_2(f) = (L Gamma(f,f) - 2 Gamma(f, Lf)) / 2, nested discrete operators.
ScalarField gamma2(const ScalarField& f, const ModelSpace& space, const WeightField& w);

/// Pointwise LHS - RHS of
///   Gamma2(f) + 2b Gamma(f,Gamma(g)) + 4b^2 Gamma(f)Gamma(g)
///     >= (1/m)(Lf + 2b Gamma(f,g))^2 + R Gamma(f).
ScalarField check_gamma2_cd(const ScalarField& f, const ScalarField& g, double b,
                            const CDParams& cd, const ModelSpace& space, const WeightField& w);

}  // namespace wlab
