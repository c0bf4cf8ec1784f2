#include "wlab/random_fields.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace wlab {

namespace {

int pick_max_freq(int requested, int N) {
  int cap = std::max(1, N / 8);
  if (requested <= 0) return cap;
  return std::min(requested, cap);
}

std::vector<double> fourier_1d(std::mt19937_64& rng, const std::vector<double>& axis, int kmax,
                               bool sine_only, bool cosine_only) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> out(axis.size(), 0.0);
  for (int k = 1; k <= kmax; ++k) {
    double a = U(rng) / (k * k), b = U(rng) / (k * k);
    for (std::size_t j = 0; j < axis.size(); ++j) {
      double c = 0.0;
      if (sine_only)
        c = a * std::sin(k * axis[j]);
      else if (cosine_only)
        c = a * std::cos(k * axis[j]);
      else
        c = a * std::cos(k * axis[j]) + b * std::sin(k * axis[j]);
      out[j] += c;
    }
  }
  return out;
}

std::vector<double> fourier_component(std::mt19937_64& rng, const ModelSpace& space, int max_freq,
                                      bool sphere_form) {
  switch (space.kind) {
    case SpaceKind::circle: {
      int kmax = pick_max_freq(max_freq, space.shape[0]);
      return fourier_1d(rng, space.axes[0], kmax, false, false);
    }
    case SpaceKind::sphere_zonal: {
      int kmax = pick_max_freq(max_freq, space.shape[0]);
      return fourier_1d(rng, space.axes[0], kmax, sphere_form, !sphere_form);
    }
    case SpaceKind::torus2: {
      int kx = pick_max_freq(max_freq, space.shape[0]);
      int ky = pick_max_freq(max_freq, space.shape[1]);
      std::uniform_real_distribution<double> U(-1.0, 1.0);
      std::vector<double> out(space.size(), 0.0);
      auto fx = fourier_1d(rng, space.axes[0], kx, false, false);
      auto fy = fourier_1d(rng, space.axes[1], ky, false, false);
      // separable sum plus one product mode for genuine 2D structure
      double c = U(rng);
      for (int i = 0; i < space.shape[0]; ++i)
        for (int j = 0; j < space.shape[1]; ++j)
          out[space.idx(i, j)] = fx[i] + fy[j] + c * fx[i] * fy[j];
      return out;
    }
  }
  return {};
}

}  // namespace

ScalarField random_fourier_scalar(std::uint64_t seed, const ModelSpace& space, int max_freq,
                                  double amplitude) {
  std::mt19937_64 rng(seed);
  auto v = fourier_component(rng, space, max_freq, false);
  for (double& x : v) x *= amplitude;
  return ScalarField(std::move(v));
}

OneFormField random_fourier_form(std::uint64_t seed, const ModelSpace& space, int max_freq,
                                 double amplitude) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  OneFormField out;
  int nc = space.kind == SpaceKind::torus2 ? 2 : 1;
  for (int c = 0; c < nc; ++c) {
    auto v = fourier_component(rng, space, max_freq, true);
    for (double& x : v) x *= amplitude;
    out.comp.push_back(std::move(v));
  }
  return out;
}

DensityField random_density(std::uint64_t seed, const ModelSpace& space, const MeasureField& mu,
                            int max_freq, double cap) {
  ScalarField p = random_fourier_scalar(seed, space, max_freq, 1.0);
  double sup = 0.0;
  for (double x : p.v) sup = std::max(sup, std::abs(x));
  double scale = sup > 0.0 ? cap / sup : 0.0;
  std::vector<double> raw(p.size());
  for (std::size_t k = 0; k < raw.size(); ++k) raw[k] = 1.0 + scale * p[k];
  return make_density(raw, mu);
}

}  // namespace wlab
