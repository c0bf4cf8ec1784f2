#pragma once

#include <vector>

#include "wlab/fields.hpp"
#include "wlab/model_space.hpp"

namespace wlab {

/// Weighted divergence on 1-forms: delta_Psi(omega) = div(omega*) - grad(Psi).omega*.
/// circle: omega' - Psi' omega; torus2: sum_i (d_i omega_i - d_i Psi omega_i);
/// sphere_zonal (zonal): (1/sin)(sin omega)' - Psi' omega.
ScalarField delta_psi(const OneFormField& omega, const ModelSpace& space, const WeightField& w);

/// Hodge-de Rham flow R_t on 1-forms (circle and torus2 only), Crank-Nicolson.
/// Per component: d_t omega_i = Delta omega_i - grad(Psi).grad(omega_i)
///                              - sum_j Hess(Psi)_ij omega_j   (Ricci_g = 0).
OneFormField hodge_evolve(const OneFormField& omega, double t, const ModelSpace& space,
                          const WeightField& w);
std::vector<OneFormField> hodge_evolve_trajectory(const OneFormField& omega,
                                                  const std::vector<double>& times,
                                                  const ModelSpace& space, const WeightField& w);

/// sup |P_t delta_Psi(omega) - delta_Psi(R_t omega)|, both sides Crank-Nicolson.
double check_commutation(const OneFormField& omega, double t, const ModelSpace& space,
                         const WeightField& w);

/// Pointwise LHS - RHS of the refined Bochner identity
///   L(|eta|^2/2) - eta.Lvec(eta) + 2b alpha.d|eta|^2 + 4b^2 |alpha|^2 |eta|^2
///     = |grad(eta) + 2b alpha x eta|^2 + Ricci(L)(eta*, eta*).
ScalarField check_refined_blw(const OneFormField& eta, const OneFormField& alpha, double b,
                              const ModelSpace& space, const WeightField& w);

struct FormIdentityResiduals {
  double lemma1 = 0.0;  // d(|eta|^2/2)_k = eta^i grad_k eta_i
  double lemma2 = 0.0;  // d(eta.alpha) = grad(eta).alpha + grad(alpha).eta
  double lemma3 = 0.0;  // Hodge(f w) = f Hodge(w) + w Lap(f) + 2 grad_{grad f} w
};

FormIdentityResiduals check_form_identities(const OneFormField& eta, const OneFormField& alpha,
                                            const ScalarField& f, const ModelSpace& space,
                                            const WeightField& w);

/// Pointwise slack LHS - RHS of the coercive inequality
///   BLW-LHS >= (1/m)(delta_Psi eta + 2b alpha.eta)^2 + R |eta|^2.
ScalarField check_coercive_corollary(const OneFormField& eta, const OneFormField& alpha, double b,
                                     const CDParams& cd, const ModelSpace& space,
                                     const WeightField& w);

/// Pointwise deficit RHS - LHS of the coercive semigroup estimate
///   |R_t w|^2 / P_t g <= e^{-2Rt} P_t(|w|^2/g)
///     - (2/m) int_0^t (e^{-2Ru}/P_t g)[P_t delta_Psi w
///         - P_u(d(log P_{t-u} g) . R_{t-u} w)]^2 du,
/// with the u-integral by trapezoid on u_grid.
ScalarField check_coercive_estimate(const OneFormField& omega, const ScalarField& g, double t,
                                    const std::vector<double>& u_grid, const CDParams& cd,
                                    const ModelSpace& space, const WeightField& w);

double sup_abs(const ScalarField& f);
double min_value(const ScalarField& f);

}  // namespace wlab
