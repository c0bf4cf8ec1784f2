#include "wlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace wlab {

namespace {

using json = nlohmann::json;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double cn_dt_of(double t, const ModelSpace& space) {
  if (t <= 0.0) return 0.0;
  double hmin = *std::min_element(space.h.begin(), space.h.end());
  double target = hmin * hmin / 2.0;
  return t / std::ceil(t / target);
}

std::string psi_descriptor(const WeightField& w) {
  if (w.is_zero()) return "zero";
  return w.analytic ? "analytic" : "sampled";
}

ReportParams base_params(const ModelSpace& space, const WeightField& w, const CDParams& cd,
                         double t_max, const HarnessOptions& opts) {
  ReportParams p;
  p.space = to_string(space.kind);
  p.psi = psi_descriptor(w);
  p.m = cd.m;
  p.R = cd.R;
  p.resolution = space.shape;
  p.dt = opts.scheme == Scheme::crank_nicolson ? cn_dt_of(t_max, space) : 0.0;
  p.smoothing_eps = opts.smoothing_eps;
  p.u_points = opts.u_points;
  return p;
}

double tolerance_of(const ModelSpace& space, const ReportParams& p, const HarnessOptions& opts) {
  double hmax = *std::max_element(space.h.begin(), space.h.end());
  double tol = opts.tol_c1 * hmax * hmax + opts.tol_c2 * p.dt * p.dt + opts.tol_w2;
  if (p.u_points > 0) tol += opts.tol_c3 / p.u_points;
  return tol;
}

void finalize(InequalityReport& rep) {
  rep.min_deficit = 0.0;
  rep.argmin_time = rep.rows.empty() ? 0.0 : rep.rows.front().t;
  bool first = true;
  for (const auto& r : rep.rows) {
    if (first || r.deficit < rep.min_deficit) {
      rep.min_deficit = r.deficit;
      rep.argmin_time = r.t;
      first = false;
    }
  }
}

DensityField density_of(const ScalarField& f, const MeasureField& mu) {
  return make_density(f.v, mu);
}

// evolve a density through sorted times, returning entropies and snapshots
struct Traj {
  std::vector<DensityField> snaps;
  std::vector<double> ent;
};

Traj density_trajectory(const DensityField& rho, const std::vector<double>& times, Scheme scheme,
                        const ModelSpace& space, const WeightField& w, const MeasureField& mu) {
  auto fields = heat_evolve_trajectory(ScalarField(rho.rho), times, scheme, space, w);
  Traj tr;
  tr.snaps.reserve(fields.size());
  for (auto& f : fields) {
    tr.snaps.push_back(density_of(f, mu));
    tr.ent.push_back(entropy(tr.snaps.back(), mu));
  }
  return tr;
}

std::size_t time_index(const std::vector<double>& times, double t) {
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.end() || *it != t) throw std::runtime_error("time not on master grid");
  return static_cast<std::size_t>(it - times.begin());
}

InequalityReport run_contraction_core(ReportName name, const DensityField& f0,
                                      const DensityField& g0, const CDParams& cd,
                                      const std::vector<double>& t_grid, const ModelSpace& space,
                                      const WeightField& w, const MeasureField& mu,
                                      const HarnessOptions& opts) {
  if (t_grid.empty()) throw std::invalid_argument("empty t_grid");
  for (double t : t_grid)
    if (!(t >= 0.0)) throw std::invalid_argument("t_grid entries must be >= 0");
  bool dimensional = name == ReportName::main_dimensional;
  if (dimensional && std::isfinite(cd.m)) {
    CDParams best = cd_best_R(space, w, cd.m);  // throws on m < n etc.
    if (cd.R > best.R + 1e-9)
      throw std::domain_error("CD(R,m) infeasible: requested R exceeds the grid optimum");
  }

  DensityField f = smooth_density(f0, opts.smoothing_eps, space, w, mu, opts.scheme);
  DensityField g = smooth_density(g0, opts.smoothing_eps, space, w, mu, opts.scheme);

  std::vector<double> ts = t_grid;
  std::sort(ts.begin(), ts.end());
  double t_max = ts.back();

  // master time grid: every report time plus every u-node of every row
  std::vector<double> master = ts;
  if (dimensional && std::isfinite(cd.m)) {
    for (double t : ts)
      for (int j = 0; j < opts.u_points; ++j)
        master.push_back(j + 1 == opts.u_points ? t : t * j / (opts.u_points - 1));
  }
  master.push_back(0.0);
  std::sort(master.begin(), master.end());
  master.erase(std::unique(master.begin(), master.end()), master.end());

  Traj tf = density_trajectory(f, master, opts.scheme, space, w, mu);
  Traj tg = density_trajectory(g, master, opts.scheme, space, w, mu);

  double w2sq_0 = 0.0;
  {
    double v = w2_dispatch(f, g, space, mu, opts).w2;
    w2sq_0 = v * v;
  }

  InequalityReport rep;
  rep.name = name;
  rep.params = base_params(space, w, cd, t_max, opts);
  if (!dimensional) rep.params.u_points = 0;

  for (double t : ts) {
    std::size_t it = time_index(master, t);
    double v = w2_dispatch(tf.snaps[it], tg.snaps[it], space, mu, opts).w2;
    ReportRow row;
    row.t = t;
    row.lhs = v * v;
    row.ent_f = tf.ent[it];
    row.ent_g = tg.ent[it];
    row.dim_term = 0.0;
    if (dimensional && std::isfinite(cd.m) && t > 0.0) {
      double du = t / (opts.u_points - 1);
      double acc = 0.0;
      for (int j = 0; j < opts.u_points; ++j) {
        double u = j + 1 == opts.u_points ? t : t * j / (opts.u_points - 1);
        std::size_t iu = time_index(master, u);
        double de = tg.ent[iu] - tf.ent[iu];
        double val = std::exp(-2.0 * cd.R * (t - u)) * de * de;
        acc += (j == 0 || j + 1 == opts.u_points) ? 0.5 * val : val;
      }
      row.dim_term = (2.0 / cd.m) * acc * du;
    }
    row.rhs = std::exp(-2.0 * cd.R * t) * w2sq_0 - row.dim_term;
    row.deficit = row.rhs - row.lhs;
    rep.rows.push_back(row);
  }
  rep.tolerance = tolerance_of(space, rep.params, opts);
  finalize(rep);
  return rep;
}

}  // namespace

std::string to_string(ReportName n) {
  switch (n) {
    case ReportName::main_dimensional: return "main_dimensional";
    case ReportName::vrs_limit: return "vrs_limit";
    case ReportName::simple_two_time: return "simple_two_time";
    case ReportName::eks: return "eks";
  }
  return "?";
}

ReportName report_name_from_string(const std::string& s) {
  if (s == "main_dimensional") return ReportName::main_dimensional;
  if (s == "vrs_limit") return ReportName::vrs_limit;
  if (s == "simple_two_time") return ReportName::simple_two_time;
  if (s == "eks") return ReportName::eks;
  throw std::invalid_argument("unknown report name: " + s);
}

DensityField smooth_density(const DensityField& f, double eps, const ModelSpace& space,
                            const WeightField& w, const MeasureField& mu, Scheme scheme) {
  if (eps < 0.0) throw std::invalid_argument("smoothing eps must be >= 0");
  if (eps == 0.0) return f;
  DensityField pf = heat_evolve(f, eps, scheme, space, w);
  std::vector<double> v(pf.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = (pf.rho[k] + eps) / (1.0 + eps);
  return make_density(v, mu);
}

TransportResult w2_dispatch(const DensityField& a, const DensityField& b, const ModelSpace& space,
                            const MeasureField& mu, const HarnessOptions& opts) {
  TransportMethod method = opts.w2_method;
  if (opts.w2_method_auto) {
    switch (space.kind) {
      case SpaceKind::circle: method = TransportMethod::circle_exact; break;
      case SpaceKind::sphere_zonal: method = TransportMethod::monotone_1d; break;
      case SpaceKind::torus2: method = TransportMethod::sinkhorn; break;
    }
  }
  switch (method) {
    case TransportMethod::circle_exact: return w2_circle_exact(a, b, space, mu);
    case TransportMethod::monotone_1d: return w2_monotone_1d(a, b, space, mu);
    case TransportMethod::sinkhorn:
      return w2_sinkhorn(a, b, space, mu, CostKind::geodesic_sq, opts.sinkhorn);
    default: throw std::invalid_argument("unsupported W2 method");
  }
}

InequalityReport run_main_contraction(const DensityField& f, const DensityField& g,
                                      const CDParams& cd, const std::vector<double>& t_grid,
                                      const ModelSpace& space, const WeightField& w,
                                      const MeasureField& mu, const HarnessOptions& opts) {
  return run_contraction_core(ReportName::main_dimensional, f, g, cd, t_grid, space, w, mu, opts);
}

InequalityReport run_vrs_limit(const DensityField& f, const DensityField& g, const CDParams& cd,
                               const std::vector<double>& t_grid, const ModelSpace& space,
                               const WeightField& w, const MeasureField& mu,
                               const HarnessOptions& opts) {
  CDParams vrs = cd;
  vrs.m = kInfiniteDim;
  return run_contraction_core(ReportName::vrs_limit, f, g, vrs, t_grid, space, w, mu, opts);
}

InequalityReport run_simple_two_time(const DensityField& f0, const DensityField& g0,
                                     const std::vector<std::pair<double, double>>& st_grid,
                                     const ModelSpace& space, const WeightField& w,
                                     const MeasureField& mu, const HarnessOptions& opts) {
  if (st_grid.empty()) throw std::invalid_argument("empty (s,t) grid");
  if (!w.is_zero())
    throw std::domain_error("two-time bound requires Psi = 0 (nonnegative Ricci with m = n)");
  CDParams cd = cd_best_R(space, w, static_cast<double>(space.n));
  if (cd.R < -1e-12) throw std::domain_error("two-time bound requires nonnegative curvature");
  int n = space.n;

  DensityField f = smooth_density(f0, opts.smoothing_eps, space, w, mu, opts.scheme);
  DensityField g = smooth_density(g0, opts.smoothing_eps, space, w, mu, opts.scheme);

  std::vector<double> s_times, t_times;
  for (auto& [s, t] : st_grid) {
    if (!(s >= 0.0) || !(t >= 0.0)) throw std::invalid_argument("grid times must be >= 0");
    s_times.push_back(s);
    t_times.push_back(t);
  }
  s_times.push_back(0.0);
  t_times.push_back(0.0);
  std::sort(s_times.begin(), s_times.end());
  s_times.erase(std::unique(s_times.begin(), s_times.end()), s_times.end());
  std::sort(t_times.begin(), t_times.end());
  t_times.erase(std::unique(t_times.begin(), t_times.end()), t_times.end());

  Traj tf = density_trajectory(f, s_times, opts.scheme, space, w, mu);
  Traj tg = density_trajectory(g, t_times, opts.scheme, space, w, mu);

  double w2sq_0 = 0.0;
  {
    double v = w2_dispatch(f, g, space, mu, opts).w2;
    w2sq_0 = v * v;
  }

  std::vector<std::pair<double, double>> grid = st_grid;
  std::sort(grid.begin(), grid.end(),
            [](auto& a, auto& b) { return a.second != b.second ? a.second < b.second : a.first < b.first; });

  InequalityReport rep;
  rep.name = ReportName::simple_two_time;
  double t_max = std::max(s_times.back(), t_times.back());
  HarnessOptions o2 = opts;
  rep.params = base_params(space, w, cd, t_max, o2);
  rep.params.u_points = 0;
  for (auto& [s, t] : grid) {
    std::size_t is = time_index(s_times, s), it = time_index(t_times, t);
    double v = w2_dispatch(tf.snaps[is], tg.snaps[it], space, mu, opts).w2;
    ReportRow row;
    row.t = t;
    row.s = s;
    row.lhs = v * v;
    row.rhs = w2sq_0 + 2.0 * n * (std::sqrt(s) - std::sqrt(t)) * (std::sqrt(s) - std::sqrt(t));
    row.deficit = row.rhs - row.lhs;
    row.ent_f = tf.ent[is];
    row.ent_g = tg.ent[it];
    rep.rows.push_back(row);
  }
  rep.tolerance = tolerance_of(space, rep.params, opts);
  finalize(rep);
  return rep;
}

double s_r(double r, double x) {
  if (r > 0.0) return std::sin(std::sqrt(r) * x) / std::sqrt(r);
  if (r < 0.0) return std::sinh(std::sqrt(-r) * x) / std::sqrt(-r);
  return x;
}

InequalityReport run_eks_bound(const DensityField& f0, const DensityField& g0, const CDParams& cd,
                               const std::vector<std::pair<double, double>>& st_grid,
                               const ModelSpace& space, const WeightField& w,
                               const MeasureField& mu, const HarnessOptions& opts) {
  if (st_grid.empty()) throw std::invalid_argument("empty (s,t) grid");
  if (!w.is_zero()) throw std::domain_error("EKS bound uses m = n, which forces Psi = 0");
  int n = space.n;
  double R = cd.R;
  double r = R / n;

  DensityField f = smooth_density(f0, opts.smoothing_eps, space, w, mu, opts.scheme);
  DensityField g = smooth_density(g0, opts.smoothing_eps, space, w, mu, opts.scheme);

  std::vector<double> s_times, t_times;
  for (auto& [s, t] : st_grid) {
    if (!(s >= 0.0) || !(t >= 0.0)) throw std::invalid_argument("grid times must be >= 0");
    s_times.push_back(s);
    t_times.push_back(t);
  }
  s_times.push_back(0.0);
  t_times.push_back(0.0);
  std::sort(s_times.begin(), s_times.end());
  s_times.erase(std::unique(s_times.begin(), s_times.end()), s_times.end());
  std::sort(t_times.begin(), t_times.end());
  t_times.erase(std::unique(t_times.begin(), t_times.end()), t_times.end());

  // P_s acts on g, P_t on f (lhs is W2(P_t f, P_s g))
  Traj tf = density_trajectory(f, t_times, opts.scheme, space, w, mu);
  Traj tg = density_trajectory(g, s_times, opts.scheme, space, w, mu);

  double w2_0 = w2_dispatch(f, g, space, mu, opts).w2;

  std::vector<std::pair<double, double>> grid = st_grid;
  std::sort(grid.begin(), grid.end(),
            [](auto& a, auto& b) { return a.second != b.second ? a.second < b.second : a.first < b.first; });

  InequalityReport rep;
  rep.name = ReportName::eks;
  double t_max = std::max(s_times.back(), t_times.back());
  CDParams shown = cd;
  shown.m = n;
  rep.params = base_params(space, w, shown, t_max, opts);
  rep.params.u_points = 0;
  bool limit_note = false;
  for (auto& [s, t] : grid) {
    std::size_t is = time_index(s_times, s), it = time_index(t_times, t);
    double v = w2_dispatch(tf.snaps[it], tg.snaps[is], space, mu, opts).w2;
    double sr = s_r(r, 0.5 * v);
    double sr0 = s_r(r, 0.5 * w2_0);
    double second;
    double sq = std::sqrt(t) - std::sqrt(s);
    if (s + t == 0.0) {
      second = 0.0;  // limit value of the indeterminate form
      limit_note = true;
    } else if (R == 0.0) {
      second = n * sq * sq / 2.0;  // lim_{R->0} (n/R)(1 - e^{-R(s+t)}) = n(s+t)
    } else {
      second = (n / R) * (1.0 - std::exp(-R * (s + t))) * sq * sq / (2.0 * (s + t));
    }
    ReportRow row;
    row.t = t;
    row.s = s;
    row.lhs = sr * sr;
    row.rhs = std::exp(-R * (s + t)) * sr0 * sr0 + second;
    row.deficit = row.rhs - row.lhs;
    row.ent_f = tf.ent[it];
    row.ent_g = tg.ent[is];
    rep.rows.push_back(row);
  }
  if (limit_note)
    rep.notes.push_back("s = t = 0 row uses the limit value 0 for the indeterminate second term");
  rep.tolerance = tolerance_of(space, rep.params, opts);
  finalize(rep);
  return rep;
}

// ----------------------------------------------------------- serialization

void emit_report(const InequalityReport& rep, ReportFormat format, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open report path for writing: " + path);
  if (format == ReportFormat::csv) {
    out << "name,t,s,lhs,rhs,deficit,dim_term,ent_f,ent_g\n";
    std::string name = to_string(rep.name);
    for (const auto& r : rep.rows) {
      out << name << ',' << fmt17(r.t) << ',' << fmt17(r.s) << ',' << fmt17(r.lhs) << ','
          << fmt17(r.rhs) << ',' << fmt17(r.deficit) << ',' << fmt17(r.dim_term) << ','
          << fmt17(r.ent_f) << ',' << fmt17(r.ent_g) << '\n';
    }
  } else {
    json j;
    j["name"] = to_string(rep.name);
    j["params"] = {{"space", rep.params.space},
                   {"psi", rep.params.psi},
                   {"R", rep.params.R},
                   {"resolution", rep.params.resolution},
                   {"dt", rep.params.dt},
                   {"smoothing_eps", rep.params.smoothing_eps},
                   {"u_points", rep.params.u_points}};
    if (std::isfinite(rep.params.m)) j["params"]["m"] = rep.params.m;
    j["rows"] = json::array();
    for (const auto& r : rep.rows) {
      json row = {{"t", r.t},         {"lhs", r.lhs},           {"rhs", r.rhs},
                  {"deficit", r.deficit}, {"dim_term", r.dim_term}};
      if (!std::isnan(r.s)) row["s"] = r.s;
      if (!std::isnan(r.ent_f)) row["ent_f"] = r.ent_f;
      if (!std::isnan(r.ent_g)) row["ent_g"] = r.ent_g;
      j["rows"].push_back(row);
    }
    j["summary"] = {{"min_deficit", rep.min_deficit},
                    {"argmin_time", rep.argmin_time},
                    {"tolerance", rep.tolerance},
                    {"pass", rep.pass()}};
    j["notes"] = rep.notes;
    out << j.dump(2) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

InequalityReport read_report(ReportFormat format, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report path for reading: " + path);
  InequalityReport rep;
  if (format == ReportFormat::csv) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty report file: " + path);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (cells.size() != 9) throw std::runtime_error("malformed report row in " + path);
      rep.name = report_name_from_string(cells[0]);
      ReportRow r;
      r.t = std::strtod(cells[1].c_str(), nullptr);
      r.s = std::strtod(cells[2].c_str(), nullptr);
      r.lhs = std::strtod(cells[3].c_str(), nullptr);
      r.rhs = std::strtod(cells[4].c_str(), nullptr);
      r.deficit = std::strtod(cells[5].c_str(), nullptr);
      r.dim_term = std::strtod(cells[6].c_str(), nullptr);
      r.ent_f = std::strtod(cells[7].c_str(), nullptr);
      r.ent_g = std::strtod(cells[8].c_str(), nullptr);
      rep.rows.push_back(r);
    }
  } else {
    json j = json::parse(in);
    rep.name = report_name_from_string(j.at("name").get<std::string>());
    const json& p = j.at("params");
    rep.params.space = p.at("space").get<std::string>();
    rep.params.psi = p.at("psi").get<std::string>();
    rep.params.m = p.contains("m") ? p.at("m").get<double>() : kInfiniteDim;
    rep.params.R = p.at("R").get<double>();
    rep.params.resolution = p.at("resolution").get<std::vector<int>>();
    rep.params.dt = p.at("dt").get<double>();
    rep.params.smoothing_eps = p.at("smoothing_eps").get<double>();
    rep.params.u_points = p.at("u_points").get<int>();
    for (const auto& row : j.at("rows")) {
      ReportRow r;
      r.t = row.at("t").get<double>();
      if (row.contains("s")) r.s = row.at("s").get<double>();
      r.lhs = row.at("lhs").get<double>();
      r.rhs = row.at("rhs").get<double>();
      r.deficit = row.at("deficit").get<double>();
      r.dim_term = row.at("dim_term").get<double>();
      if (row.contains("ent_f")) r.ent_f = row.at("ent_f").get<double>();
      if (row.contains("ent_g")) r.ent_g = row.at("ent_g").get<double>();
      rep.rows.push_back(r);
    }
    rep.min_deficit = j.at("summary").at("min_deficit").get<double>();
    rep.argmin_time = j.at("summary").at("argmin_time").get<double>();
    rep.tolerance = j.at("summary").at("tolerance").get<double>();
    rep.notes = j.at("notes").get<std::vector<std::string>>();
  }
  return rep;
}

}  // namespace wlab
