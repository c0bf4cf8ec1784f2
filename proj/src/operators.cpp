#include "wlab/operators.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wlab {

namespace {
constexpr double kPi = std::numbers::pi;

inline int reflect_index(int j, int N) {
  if (j < 0) return -j - 1;
  if (j >= N) return 2 * N - 1 - j;
  return j;
}
}  // namespace

std::vector<double> deriv1(const std::vector<double>& f, const ModelSpace& space, int axis) {
  if (f.size() != space.size()) throw std::invalid_argument("field/space size mismatch");
  std::vector<double> out(f.size());
  if (space.kind == SpaceKind::sphere_zonal) {
    int N = space.shape[0];
    double h = space.h[0];
    for (int j = 0; j < N; ++j)
      out[j] = (f[reflect_index(j + 1, N)] - f[reflect_index(j - 1, N)]) / (2.0 * h);
    return out;
  }
  if (space.kind == SpaceKind::circle) {
    int N = space.shape[0];
    double h = space.h[0];
    for (int j = 0; j < N; ++j) out[j] = (f[(j + 1) % N] - f[(j + N - 1) % N]) / (2.0 * h);
    return out;
  }
  // torus2
  int Nx = space.shape[0], Ny = space.shape[1];
  if (axis == 0) {
    double h = space.h[0];
    for (int i = 0; i < Nx; ++i)
      for (int j = 0; j < Ny; ++j)
        out[space.idx(i, j)] =
            (f[space.idx((i + 1) % Nx, j)] - f[space.idx((i + Nx - 1) % Nx, j)]) / (2.0 * h);
  } else {
    double h = space.h[1];
    for (int i = 0; i < Nx; ++i)
      for (int j = 0; j < Ny; ++j)
        out[space.idx(i, j)] =
            (f[space.idx(i, (j + 1) % Ny)] - f[space.idx(i, (j + Ny - 1) % Ny)]) / (2.0 * h);
  }
  return out;
}

std::vector<double> Generator::apply(const std::vector<double>& f) const {
  Eigen::Map<const Eigen::VectorXd> fv(f.data(), f.size());
  Eigen::VectorXd r = S * fv;
  r.array() /= m.array();
  return std::vector<double>(r.data(), r.data() + r.size());
}

Generator build_generator(const ModelSpace& space, const WeightField& w) {
  std::size_t N = space.size();
  Generator g;
  g.m.resize(N);
  for (std::size_t k = 0; k < N; ++k) g.m[k] = space.vol_weights[k] * std::exp(-w.psi[k]);

  std::vector<Eigen::Triplet<double>> trip;
  auto add_edge = [&](std::size_t a, std::size_t b, double cond) {
    trip.emplace_back(a, b, cond);
    trip.emplace_back(b, a, cond);
    trip.emplace_back(a, a, -cond);
    trip.emplace_back(b, b, -cond);
  };

  switch (space.kind) {
    case SpaceKind::circle: {
      int n = space.shape[0];
      double h = space.h[0];
      for (int j = 0; j < n; ++j) {
        int jp = (j + 1) % n;
        double cond = std::exp(-0.5 * (w.psi[j] + w.psi[jp])) / h;
        add_edge(j, jp, cond);
      }
      break;
    }
    case SpaceKind::torus2: {
      int Nx = space.shape[0], Ny = space.shape[1];
      double hx = space.h[0], hy = space.h[1];
      for (int i = 0; i < Nx; ++i)
        for (int j = 0; j < Ny; ++j) {
          std::size_t a = space.idx(i, j);
          std::size_t bx = space.idx((i + 1) % Nx, j);
          std::size_t by = space.idx(i, (j + 1) % Ny);
          add_edge(a, bx, (hy / hx) * std::exp(-0.5 * (w.psi[a] + w.psi[bx])));
          add_edge(a, by, (hx / hy) * std::exp(-0.5 * (w.psi[a] + w.psi[by])));
        }
      break;
    }
    case SpaceKind::sphere_zonal: {
      int n = space.shape[0];
      double h = space.h[0];
      for (int j = 0; j + 1 < n; ++j) {
        // interior edge at theta = (j+1) h; pole edges carry zero flux
        double cond = 2.0 * kPi * std::sin((j + 1) * h) *
                      std::exp(-0.5 * (w.psi[j] + w.psi[j + 1])) / h;
        add_edge(j, j + 1, cond);
      }
      break;
    }
  }
  g.S.resize(N, N);
  g.S.setFromTriplets(trip.begin(), trip.end());
  return g;
}

}  // namespace wlab
