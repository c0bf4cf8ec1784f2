#include "wlab/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "wlab/random_fields.hpp"

namespace wlab {

using json = nlohmann::json;

// --------------------------------------------------------------- expressions

struct Expression::Node {
  enum Kind { num, var, add, sub, mul, divi, neg, fsin, fcos, fexp } kind;
  double value = 0.0;
  std::string name;
  NodePtr a, b;
};

namespace {

using Node = Expression::Node;
using NodePtr = Expression::NodePtr;

NodePtr make_num(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::num;
  n->value = v;
  return n;
}

NodePtr make_node(Node::Kind k, NodePtr a, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

struct Parser {
  const std::string& src;
  std::size_t pos = 0;
  const std::vector<std::string>& vars;
  const std::map<std::string, double>& consts;

  void skip() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }
  bool eat(char c) {
    skip();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) {
    throw std::invalid_argument("expression parse error at position " + std::to_string(pos) +
                                ": " + what + " in \"" + src + "\"");
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (eat('+'))
        lhs = make_node(Node::add, lhs, term());
      else if (eat('-'))
        lhs = make_node(Node::sub, lhs, term());
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (eat('*'))
        lhs = make_node(Node::mul, lhs, factor());
      else if (eat('/'))
        lhs = make_node(Node::divi, lhs, factor());
      else
        return lhs;
    }
  }

  NodePtr factor() {
    skip();
    if (eat('-')) return make_node(Node::neg, factor());
    if (eat('+')) return factor();
    if (eat('(')) {
      NodePtr e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (pos >= src.size()) fail("unexpected end of input");
    char c = src[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = std::stod(src.substr(pos), &used);
      pos += used;
      return make_num(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos;
      while (pos < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
        ++pos;
      std::string name = src.substr(start, pos - start);
      if (name == "sin" || name == "cos" || name == "exp") {
        if (!eat('(')) fail("expected '(' after " + name);
        NodePtr arg = expr();
        if (!eat(')')) fail("expected ')'");
        Node::Kind k = name == "sin" ? Node::fsin : name == "cos" ? Node::fcos : Node::fexp;
        return make_node(k, arg);
      }
      if (name == "pi") return make_num(3.14159265358979323846);
      for (const auto& v : vars)
        if (v == name) {
          auto n = std::make_shared<Node>();
          n->kind = Node::var;
          n->name = name;
          return n;
        }
      auto it = consts.find(name);
      if (it != consts.end()) return make_num(it->second);
      fail("unknown identifier '" + name + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

double eval_node(const NodePtr& n, const std::map<std::string, double>& vars) {
  switch (n->kind) {
    case Node::num: return n->value;
    case Node::var: {
      auto it = vars.find(n->name);
      if (it == vars.end()) throw std::invalid_argument("unbound variable " + n->name);
      return it->second;
    }
    case Node::add: return eval_node(n->a, vars) + eval_node(n->b, vars);
    case Node::sub: return eval_node(n->a, vars) - eval_node(n->b, vars);
    case Node::mul: return eval_node(n->a, vars) * eval_node(n->b, vars);
    case Node::divi: return eval_node(n->a, vars) / eval_node(n->b, vars);
    case Node::neg: return -eval_node(n->a, vars);
    case Node::fsin: return std::sin(eval_node(n->a, vars));
    case Node::fcos: return std::cos(eval_node(n->a, vars));
    case Node::fexp: return std::exp(eval_node(n->a, vars));
  }
  throw std::logic_error("bad node");
}

NodePtr diff_node(const NodePtr& n, const std::string& var) {
  switch (n->kind) {
    case Node::num: return make_num(0.0);
    case Node::var: return make_num(n->name == var ? 1.0 : 0.0);
    case Node::add: return make_node(Node::add, diff_node(n->a, var), diff_node(n->b, var));
    case Node::sub: return make_node(Node::sub, diff_node(n->a, var), diff_node(n->b, var));
    case Node::mul:
      return make_node(Node::add, make_node(Node::mul, diff_node(n->a, var), n->b),
                       make_node(Node::mul, n->a, diff_node(n->b, var)));
    case Node::divi:
      // (a/b)' = a'/b - a b'/b^2
      return make_node(
          Node::sub, make_node(Node::divi, diff_node(n->a, var), n->b),
          make_node(Node::divi, make_node(Node::mul, n->a, diff_node(n->b, var)),
                    make_node(Node::mul, n->b, n->b)));
    case Node::neg: return make_node(Node::neg, diff_node(n->a, var));
    case Node::fsin:
      return make_node(Node::mul, make_node(Node::fcos, n->a), diff_node(n->a, var));
    case Node::fcos:
      return make_node(Node::neg,
                       make_node(Node::mul, make_node(Node::fsin, n->a), diff_node(n->a, var)));
    case Node::fexp:
      return make_node(Node::mul, make_node(Node::fexp, n->a), diff_node(n->a, var));
  }
  throw std::logic_error("bad node");
}

std::string str_node(const NodePtr& n) {
  switch (n->kind) {
    case Node::num: return std::to_string(n->value);
    case Node::var: return n->name;
    case Node::add: return "(" + str_node(n->a) + "+" + str_node(n->b) + ")";
    case Node::sub: return "(" + str_node(n->a) + "-" + str_node(n->b) + ")";
    case Node::mul: return "(" + str_node(n->a) + "*" + str_node(n->b) + ")";
    case Node::divi: return "(" + str_node(n->a) + "/" + str_node(n->b) + ")";
    case Node::neg: return "(-" + str_node(n->a) + ")";
    case Node::fsin: return "sin(" + str_node(n->a) + ")";
    case Node::fcos: return "cos(" + str_node(n->a) + ")";
    case Node::fexp: return "exp(" + str_node(n->a) + ")";
  }
  return "?";
}

}  // namespace

Expression Expression::parse(const std::string& src, const std::vector<std::string>& variables,
                             const std::map<std::string, double>& constants) {
  Parser p{src, 0, variables, constants};
  NodePtr root = p.expr();
  p.skip();
  if (p.pos != src.size()) p.fail("trailing input");
  return Expression(std::move(root));
}

double Expression::eval(const std::map<std::string, double>& vars) const {
  return eval_node(root_, vars);
}

Expression Expression::derivative(const std::string& var) const {
  return Expression(diff_node(root_, var));
}

std::string Expression::str() const { return str_node(root_); }

// -------------------------------------------------------------- config load

namespace {

std::map<std::string, double> expr_constants(const json& j) {
  std::map<std::string, double> consts;
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.value().is_number()) consts[it.key()] = it.value().get<double>();
  return consts;
}

WeightField weight_from_json(const ModelSpace& space, const json& jpsi) {
  if (jpsi.is_null()) return zero_weight(space);
  std::string form = jpsi.value("form", "0");
  auto consts = expr_constants(jpsi);
  if (space.kind == SpaceKind::torus2) {
    Expression e = Expression::parse(form, {"x", "y"}, consts);
    Expression ex = e.derivative("x"), ey = e.derivative("y");
    Expression exx = ex.derivative("x"), exy = ex.derivative("y"), eyy = ey.derivative("y");
    auto f2 = [](const Expression& ee) {
      return [ee](double x, double y) { return ee.eval({{"x", x}, {"y", y}}); };
    };
    return make_weight(space, f2(e), f2(ex), f2(ey), f2(exx), f2(exy), f2(eyy));
  }
  Expression e = Expression::parse(form, {"theta"}, consts);
  Expression e1 = e.derivative("theta"), e2 = e1.derivative("theta");
  auto f1 = [](const Expression& ee) {
    return [ee](double th) { return ee.eval({{"theta", th}}); };
  };
  return make_weight(space, f1(e), f1(e1), f1(e2));
}

std::vector<double> scalar_from_form(const ModelSpace& space, const std::string& form,
                                     const std::map<std::string, double>& consts) {
  std::vector<double> v(space.size());
  if (space.kind == SpaceKind::torus2) {
    Expression e = Expression::parse(form, {"x", "y"}, consts);
    for (std::size_t k = 0; k < v.size(); ++k)
      v[k] = e.eval({{"x", space.coord(k, 0)}, {"y", space.coord(k, 1)}});
  } else {
    Expression e = Expression::parse(form, {"theta"}, consts);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = e.eval({{"theta", space.coord(k, 0)}});
  }
  return v;
}

DensityField density_from_json(const ModelSpace& space, const MeasureField& mu, const json& jd,
                               std::uint64_t seed);

}  // namespace

LabConfig parse_config(const json& j, std::uint64_t seed) {
  LabConfig cfg;
  if (!j.contains("space")) throw std::invalid_argument("config missing \"space\"");
  const json& js = j.at("space");
  SpaceKind kind = space_kind_from_string(js.at("kind").get<std::string>());
  std::vector<int> res = js.at("resolution").get<std::vector<int>>();
  cfg.space = build_model_space(kind, res);

  cfg.weight = weight_from_json(cfg.space, j.contains("psi") ? j.at("psi") : json());
  cfg.psi_text = j.contains("psi") ? j.at("psi").value("form", "0") : "0";
  cfg.mu = measure_of(cfg.space, cfg.weight);

  if (j.contains("cd")) {
    const json& jc = j.at("cd");
    cfg.has_cd = true;
    if (jc.contains("m")) {
      if (jc.at("m").is_string())
        cfg.cd.m = kInfiniteDim;  // "inf"
      else
        cfg.cd.m = jc.at("m").get<double>();
    }
    if (jc.contains("R"))
      cfg.cd.R = jc.at("R").get<double>();
    else
      cfg.cd = cd_best_R(cfg.space, cfg.weight, cfg.cd.m);
  }

  auto load_density = [&](const char* key, DensityField& out, bool& flag, std::uint64_t salt) {
    if (!j.contains(key)) return;
    out = density_from_json(cfg.space, cfg.mu, j.at(key), seed + salt);
    flag = true;
  };
  load_density("f", cfg.f, cfg.has_f, 0);
  load_density("g", cfg.g, cfg.has_g, 1);

  if (j.contains("t_grid")) {
    const json& jt = j.at("t_grid");
    if (jt.is_array()) {
      cfg.t_grid = jt.get<std::vector<double>>();
    } else {
      int pts = jt.value("points", 10);
      double tmin = jt.value("min", 0.0), tmax = jt.value("max", 1.0);
      for (int i = 0; i < pts; ++i)
        cfg.t_grid.push_back(pts == 1 ? tmax : tmin + (tmax - tmin) * i / (pts - 1));
    }
  }
  if (j.contains("st_grid")) {
    const json& jt = j.at("st_grid");
    if (jt.is_array()) {
      for (const auto& p : jt) cfg.st_grid.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    } else {
      int pts = jt.value("points", 5);
      double tmax = jt.value("max", 0.25);
      bool diag = jt.value("diagonal", false);
      for (int i = 0; i < pts; ++i)
        for (int k = 0; k < pts; ++k) {
          if (diag && i != k) continue;
          double s = pts == 1 ? tmax : tmax * i / (pts - 1);
          double t = pts == 1 ? tmax : tmax * k / (pts - 1);
          cfg.st_grid.emplace_back(s, t);
        }
    }
  }

  cfg.t = j.value("t", 0.0);
  cfg.b = j.value("b", -0.5);
  cfg.n_random = j.value("n_random", 20);
  cfg.opts.u_points = j.value("u_points", 33);
  cfg.opts.smoothing_eps = j.value("smoothing_eps", 1e-4);
  std::string scheme = j.value("scheme", "crank_nicolson");
  if (scheme == "spectral")
    cfg.opts.scheme = Scheme::spectral;
  else if (scheme == "crank_nicolson")
    cfg.opts.scheme = Scheme::crank_nicolson;
  else
    throw std::invalid_argument("unknown scheme: " + scheme);
  std::string w2m = j.value("w2_method", "auto");
  if (w2m == "auto") {
    cfg.opts.w2_method_auto = true;
  } else if (w2m == "exact") {
    cfg.opts.w2_method_auto = false;
    cfg.opts.w2_method = cfg.space.kind == SpaceKind::sphere_zonal ? TransportMethod::monotone_1d
                                                                   : TransportMethod::circle_exact;
  } else if (w2m == "sinkhorn") {
    cfg.opts.w2_method_auto = false;
    cfg.opts.w2_method = TransportMethod::sinkhorn;
  } else {
    throw std::invalid_argument("unknown w2_method: " + w2m);
  }
  if (j.contains("sinkhorn")) {
    const json& sk = j.at("sinkhorn");
    if (sk.contains("eps_schedule"))
      cfg.opts.sinkhorn.eps_schedule = sk.at("eps_schedule").get<std::vector<double>>();
    cfg.opts.sinkhorn.max_iter = sk.value("max_iter", cfg.opts.sinkhorn.max_iter);
    cfg.opts.sinkhorn.marginal_tol = sk.value("marginal_tol", cfg.opts.sinkhorn.marginal_tol);
  }
  return cfg;
}

namespace {

DensityField density_from_json(const ModelSpace& space, const MeasureField& mu, const json& jd,
                               std::uint64_t seed) {
  if (jd.contains("csv")) {
    auto v = read_scalar_csv(jd.at("csv").get<std::string>());
    return make_density(v, mu);
  }
  if (jd.value("random", false))
    return random_density(seed, space, mu, jd.value("max_freq", 0), jd.value("cap", 0.5));
  if (jd.contains("form")) {
    auto v = scalar_from_form(space, jd.at("form").get<std::string>(), expr_constants(jd));
    return make_density(v, mu);
  }
  throw std::invalid_argument("density config needs \"form\", \"csv\", or \"random\"");
}

}  // namespace

LabConfig load_config(const std::string& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config parse error in " + path + ": " + e.what());
  }
  return parse_config(j, seed);
}

}  // namespace wlab
