#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "wlab/fields.hpp"
#include "wlab/harness.hpp"
#include "wlab/model_space.hpp"

namespace wlab {

/// Tiny closed-form expression language for config files: numbers, named
/// constants, the grid variables (theta | x, y), +, -, *, /, unary minus,
/// parentheses, and sin/cos/exp. Supports symbolic differentiation so parsed
/// potentials come with exact derivatives.
class Expression {
 public:
  static Expression parse(const std::string& src, const std::vector<std::string>& variables,
                          const std::map<std::string, double>& constants);

  double eval(const std::map<std::string, double>& vars) const;
  Expression derivative(const std::string& var) const;
  std::string str() const;

  struct Node;
  using NodePtr = std::shared_ptr<const Node>;

 private:
  explicit Expression(NodePtr root) : root_(std::move(root)) {}
  NodePtr root_;
};

struct LabConfig {
  ModelSpace space;
  WeightField weight;
  MeasureField mu;
  std::string psi_text = "0";

  bool has_f = false, has_g = false;
  DensityField f, g;

  CDParams cd;
  bool has_cd = false;

  std::vector<double> t_grid;
  std::vector<std::pair<double, double>> st_grid;
  double t = 0.0;  // single-time commands (evolve)
  double b = 0.0;  // identity checks
  int n_random = 20;

  HarnessOptions opts;
};

LabConfig parse_config(const nlohmann::json& j, std::uint64_t seed);
LabConfig load_config(const std::string& path, std::uint64_t seed);

}  // namespace wlab
