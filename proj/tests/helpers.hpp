#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "wlab/fields.hpp"
#include "wlab/model_space.hpp"

namespace wlab::testutil {

inline double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s = std::max(s, std::abs(a[k] - b[k]));
  return s;
}

inline std::vector<double> sample(const ModelSpace& space,
                                  const std::function<double(double)>& f) {
  std::vector<double> v(space.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(space.coord(k, 0));
  return v;
}

inline std::vector<double> sample2(const ModelSpace& space,
                                   const std::function<double(double, double)>& f) {
  std::vector<double> v(space.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(space.coord(k, 0), space.coord(k, 1));
  return v;
}

}  // namespace wlab::testutil
