#pragma once

#include <cstdint>

#include "wlab/fields.hpp"
#include "wlab/model_space.hpp"

namespace wlab {

/// Seeded truncated Fourier fields for randomized identity/property tests.
/// max_freq <= 0 picks N/8 (clipped to [1, N/8]) so discrete derivatives stay
/// in the asymptotic O(h^2) regime. Coefficients are i.i.d. uniform on [-1,1]
/// scaled by 1/k^2. Sphere forms use sin(k theta) modes so they vanish at the
/// poles; sphere scalars use cos(k theta) (smooth zonal functions).
ScalarField random_fourier_scalar(std::uint64_t seed, const ModelSpace& space, int max_freq = 0,
                                  double amplitude = 1.0);
OneFormField random_fourier_form(std::uint64_t seed, const ModelSpace& space, int max_freq = 0,
                                 double amplitude = 1.0);

/// 1 + perturbation, rescaled so the minimum stays >= 1 - cap, then normalized.
DensityField random_density(std::uint64_t seed, const ModelSpace& space, const MeasureField& mu,
                            int max_freq = 0, double cap = 0.5);

}  // namespace wlab
