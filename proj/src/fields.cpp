#include "wlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wlab {

DensityField make_density(const std::vector<double>& raw, const MeasureField& mu, double floor) {
  if (raw.size() != mu.mu_weights.size()) throw std::invalid_argument("density/measure size mismatch");
  DensityField d;
  d.rho = raw;
  for (double v : d.rho)
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("density values must be finite and >= 0");
  // normalize before flooring so the floor applies to the density itself
  double mass = 0.0;
  for (std::size_t k = 0; k < d.rho.size(); ++k) mass += d.rho[k] * mu.mu_weights[k];
  if (mass <= 0.0) throw std::invalid_argument("density has zero mass");
  for (double& v : d.rho) v /= mass;
  mass = 0.0;
  for (std::size_t k = 0; k < d.rho.size(); ++k) {
    if (d.rho[k] < floor) {
      d.rho[k] = floor;
      ++d.clamped_nodes;
    }
    mass += d.rho[k] * mu.mu_weights[k];
  }
  // renormalize the clamp's excess mass; keep the floor invariant exactly
  for (double& v : d.rho) v = std::max(v / mass, floor);
  return d;
}

namespace {
std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}
}  // namespace

void write_scalar_csv(const std::string& path, const ModelSpace& space,
                      const std::vector<double>& values) {
  auto out = open_out(path);
  char buf[64];
  bool two = space.num_axes() == 2;
  out << (two ? "node_index,coord_1,coord_2,value\n" : "node_index,coord_1,value\n");
  for (std::size_t k = 0; k < values.size(); ++k) {
    out << k;
    for (int a = 0; a < space.num_axes(); ++a) {
      std::snprintf(buf, sizeof(buf), ",%.17g", space.coord(k, a));
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.17g\n", values[k]);
    out << buf;
  }
}

std::vector<double> read_scalar_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> vals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto pos = line.rfind(',');
    vals.push_back(std::stod(line.substr(pos + 1)));
  }
  return vals;
}

void write_form_csv(const std::string& path, const OneFormField& omega) {
  auto out = open_out(path);
  char buf[64];
  out << (omega.ncomp() == 2 ? "node_index,comp_1,comp_2\n" : "node_index,comp_1\n");
  for (std::size_t k = 0; k < omega.size(); ++k) {
    out << k;
    for (int c = 0; c < omega.ncomp(); ++c) {
      std::snprintf(buf, sizeof(buf), ",%.17g", omega.comp[c][k]);
      out << buf;
    }
    out << "\n";
  }
}

OneFormField read_form_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  std::getline(in, line);
  int ncomp = line.find("comp_2") != std::string::npos ? 2 : 1;
  OneFormField f;
  f.comp.resize(ncomp);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    std::getline(ss, tok, ',');  // index
    for (int c = 0; c < ncomp; ++c) {
      std::getline(ss, tok, ',');
      f.comp[c].push_back(std::stod(tok));
    }
  }
  return f;
}

}  // namespace wlab
