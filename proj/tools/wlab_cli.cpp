#include <cstdio>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "wlab/config.hpp"
#include "wlab/forms.hpp"
#include "wlab/harness.hpp"
#include "wlab/random_fields.hpp"
#include "wlab/semigroup.hpp"
#include "wlab/transport.hpp"

using json = nlohmann::json;
using namespace wlab;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_path;
  std::string format = "json";
  std::uint64_t seed = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file")->required();
  cmd->add_option("--out", args.out_path, "output path (stdout when omitted)");
  cmd->add_option("--format", args.format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--seed", args.seed, "seed for randomized test fields");
}

void write_text(const CommonArgs& args, const std::string& text) {
  if (args.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(args.out_path);
  if (!out) throw std::runtime_error("cannot open output path: " + args.out_path);
  out << text;
}

std::string kv_csv(const std::vector<std::pair<std::string, double>>& rows) {
  std::string s = "name,value\n";
  char buf[64];
  for (auto& [k, v] : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    s += k + "," + buf + "\n";
  }
  return s;
}

int finish_report(const InequalityReport& rep, const CommonArgs& args) {
  if (!args.out_path.empty())
    emit_report(rep, args.format == "csv" ? ReportFormat::csv : ReportFormat::json, args.out_path);
  std::printf("%s: min deficit %.6g at t=%.6g (tol %.3g) -> %s\n", to_string(rep.name).c_str(),
              rep.min_deficit, rep.argmin_time, rep.tolerance, rep.pass() ? "PASS" : "FAIL");
  if (rep.min_deficit < 0.0 && rep.pass())
    std::printf("  warning: negative deficit within tolerance\n");
  return rep.pass() ? 0 : 2;
}

void require_fg(const LabConfig& cfg) {
  if (!cfg.has_f || !cfg.has_g)
    throw std::invalid_argument("config must define densities \"f\" and \"g\"");
}

int cmd_cd_params(const CommonArgs& args) {
  LabConfig cfg = load_config(args.config_path, args.seed);
  double m = cfg.has_cd ? cfg.cd.m : kInfiniteDim;
  CDParams best = cd_best_R(cfg.space, cfg.weight, m);
  if (args.format == "csv") {
    write_text(args, kv_csv({{"R", best.R},
                             {"m", best.m},
                             {"witness_node", static_cast<double>(best.witness_node)}}));
  } else {
    json j = {{"R", best.R}, {"witness_node", best.witness_node}};
    if (std::isfinite(best.m)) j["m"] = best.m;
    write_text(args, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_evolve(const CommonArgs& args) {
  LabConfig cfg = load_config(args.config_path, args.seed);
  if (!cfg.has_f) throw std::invalid_argument("config must define density \"f\"");
  DensityField out = heat_evolve(cfg.f, cfg.t, cfg.opts.scheme, cfg.space, cfg.weight);
  if (args.format == "csv") {
    if (args.out_path.empty()) throw std::invalid_argument("evolve --format csv requires --out");
    write_scalar_csv(args.out_path, cfg.space, out.rho);
  } else {
    json j = {{"t", cfg.t},
              {"entropy", entropy(out, cfg.mu)},
              {"mass", integrate(out.rho, cfg.mu)},
              {"rho", out.rho}};
    write_text(args, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_w2(const CommonArgs& args) {
  LabConfig cfg = load_config(args.config_path, args.seed);
  require_fg(cfg);
  TransportResult r = w2_dispatch(cfg.f, cfg.g, cfg.space, cfg.mu, cfg.opts);
  std::vector<std::pair<std::string, double>> rows = {{"w2", r.w2}, {"w2_sq", r.w2 * r.w2}};
  if (r.method == TransportMethod::sinkhorn) {
    rows.emplace_back("iterations", r.diag.iterations);
    rows.emplace_back("final_eps", r.diag.final_eps);
    rows.emplace_back("marginal_error", r.diag.marginal_error);
  }
  if (r.diag.cut_index >= 0) rows.emplace_back("cut_theta", r.diag.cut_theta);
  if (args.format == "csv") {
    write_text(args, kv_csv(rows));
  } else {
    json j;
    for (auto& [k, v] : rows) j[k] = v;
    write_text(args, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_check_main(const CommonArgs& args) {
  LabConfig cfg = load_config(args.config_path, args.seed);
  require_fg(cfg);
  if (!cfg.has_cd) throw std::invalid_argument("check-main requires a \"cd\" block");
  if (cfg.t_grid.empty()) throw std::invalid_argument("check-main requires \"t_grid\"");
  InequalityReport rep = run_main_contraction(cfg.f, cfg.g, cfg.cd, cfg.t_grid, cfg.space,
                                              cfg.weight, cfg.mu, cfg.opts);
  return finish_report(rep, args);
}

int cmd_check_vrs(const CommonArgs& args) {
  LabConfig cfg = load_config(args.config_path, args.seed);
  require_fg(cfg);
  if (cfg.t_grid.empty()) throw std::invalid_argument("check-vrs requires \"t_grid\"");
  CDParams cd = cfg.has_cd ? cfg.cd : cd_best_R(cfg.space, cfg.weight, kInfiniteDim);
  InequalityReport rep =
      run_vrs_limit(cfg.f, cfg.g, cd, cfg.t_grid, cfg.space, cfg.weight, cfg.mu, cfg.opts);
  return finish_report(rep, args);
}

int cmd_check_simple(const CommonArgs& args) {
  LabConfig cfg = load_config(args.config_path, args.seed);
  require_fg(cfg);
  if (cfg.st_grid.empty()) throw std::invalid_argument("check-simple requires \"st_grid\"");
  InequalityReport rep =
      run_simple_two_time(cfg.f, cfg.g, cfg.st_grid, cfg.space, cfg.weight, cfg.mu, cfg.opts);
  return finish_report(rep, args);
}

int cmd_check_eks(const CommonArgs& args) {
  LabConfig cfg = load_config(args.config_path, args.seed);
  require_fg(cfg);
  if (cfg.st_grid.empty()) throw std::invalid_argument("check-eks requires \"st_grid\"");
  CDParams cd = cfg.has_cd
                    ? cfg.cd
                    : cd_best_R(cfg.space, cfg.weight, static_cast<double>(cfg.space.n));
  InequalityReport rep =
      run_eks_bound(cfg.f, cfg.g, cd, cfg.st_grid, cfg.space, cfg.weight, cfg.mu, cfg.opts);
  return finish_report(rep, args);
}

int cmd_check_identities(const CommonArgs& args) {
  LabConfig cfg = load_config(args.config_path, args.seed);
  const ModelSpace& sp = cfg.space;
  const WeightField& w = cfg.weight;
  bool flat = sp.kind != SpaceKind::sphere_zonal;
  std::mt19937_64 rng(args.seed);
  std::uniform_real_distribution<double> Ub(-2.0, 2.0);

  double blw = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0, comm = 0.0;
  double g2_min = 0.0;
  bool have_g2 = cfg.has_cd;
  for (int i = 0; i < cfg.n_random; ++i) {
    std::uint64_t s = args.seed + 17 * i;
    // fixed max frequency: grid-independent fields, so residuals shrink as h^2
    OneFormField eta = random_fourier_form(s, sp, 8);
    OneFormField alpha = random_fourier_form(s + 7, sp, 8);
    ScalarField f = random_fourier_scalar(s + 11, sp, 8);
    double b = Ub(rng);
    blw = std::max(blw, sup_abs(check_refined_blw(eta, alpha, b, sp, w)));
    FormIdentityResiduals res = check_form_identities(eta, alpha, f, sp, w);
    l1 = std::max(l1, res.lemma1);
    l2 = std::max(l2, res.lemma2);
    l3 = std::max(l3, res.lemma3);
    if (flat) comm = std::max(comm, check_commutation(eta, 0.2, sp, w));
    if (have_g2) {
      // g = f keeps the b-quadratic a perfect square; independent g can
      // violate the bound in the continuum
      double mn = min_value(check_gamma2_cd(f, f, b, cfg.cd, sp, w));
      g2_min = i == 0 ? mn : std::min(g2_min, mn);
    }
  }

  const double tol = 1e-3;
  bool pass = blw <= tol && l1 <= tol && l2 <= tol && l3 <= tol && comm <= 1e-6 &&
              (!have_g2 || g2_min >= -tol);
  std::vector<std::pair<std::string, double>> rows = {{"refined_blw_sup", blw},
                                                      {"lemma1_sup", l1},
                                                      {"lemma2_sup", l2},
                                                      {"lemma3_sup", l3}};
  if (flat) rows.emplace_back("commutation_sup", comm);
  if (have_g2) rows.emplace_back("gamma2_cd_min_slack", g2_min);
  if (args.format == "csv") {
    write_text(args, kv_csv(rows));
  } else {
    json j;
    for (auto& [k, v] : rows) j[k] = v;
    j["pass"] = pass;
    write_text(args, j.dump(2) + "\n");
  }
  std::printf("identities: %s\n", pass ? "PASS" : "FAIL");
  return pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for dimensional Wasserstein contraction"};
  app.require_subcommand(1);

  CommonArgs args;
  struct Sub {
    const char* name;
    const char* desc;
    int (*fn)(const CommonArgs&);
  };
  const Sub subs[] = {
      {"cd-params", "best curvature constant R for CD(R,m)", cmd_cd_params},
      {"evolve", "heat semigroup applied to a density", cmd_evolve},
      {"w2", "Wasserstein distance between two densities", cmd_w2},
      {"check-main", "dimensional contraction inequality", cmd_check_main},
      {"check-vrs", "exponential contraction (m = infinity)", cmd_check_vrs},
      {"check-simple", "two-time dimension bound", cmd_check_simple},
      {"check-eks", "Erbar-Kuwada-Sturm comparison bound", cmd_check_eks},
      {"check-identities", "Bochner/Gamma2 identity suite on random fields", cmd_check_identities},
  };
  std::map<std::string, int (*)(const CommonArgs&)> dispatch;
  for (const Sub& s : subs) {
    CLI::App* cmd = app.add_subcommand(s.name, s.desc);
    add_common(cmd, args);
    dispatch[s.name] = s.fn;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    for (auto* cmd : app.get_subcommands()) return dispatch.at(cmd->get_name())(args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
