#pragma once
// JSON configs and reports, CSV samples and profiles. Requires nlohmann/json (vendor/json.hpp).
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "willmore/pipeline.hpp"

namespace willmore::io {

using json = nlohmann::json;

// Bumped whenever a report field is renamed or removed.
inline constexpr const char* kReportSchema = "willmore-report/1";

inline cdouble complex_from(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  if (j.is_object()) return {j.value("re", 0.0), j.value("im", 0.0)};
  throw std::invalid_argument("complex value must be a number, [re, im] or {re, im}");
}

inline json to_json(cdouble c) { return json::array({c.real(), c.imag()}); }

inline json to_json(const CVec& v) {
  json a = json::array();
  for (auto c : v) a.push_back(to_json(c));
  return a;
}

inline json to_json(const PolarGrid& g) { return {{"r_min", g.r_min}, {"r_max", g.r_max}, {"n_r", g.n_r}, {"n_theta", g.n_theta}}; }

inline PolarGrid grid_from(const json& j) {
  PolarGrid g;
  g.r_min = j.value("r_min", g.r_min);
  g.r_max = j.value("r_max", g.r_max);
  g.n_r = j.value("n_r", g.n_r);
  g.n_theta = j.value("n_theta", g.n_theta);
  g.validate();
  return g;
}

// {name, ambient_dim, grid, params}; numeric params are scalars, arrays are complex vectors.
inline SurfaceSpec surface_from(const json& j) {
  SurfaceSpec s;
  s.name = j.at("name").get<std::string>();
  s.ambient_dim = j.value("ambient_dim", 3);
  if (j.contains("grid")) s.grid = grid_from(j["grid"]);
  if (j.contains("params"))
    for (const auto& [k, v] : j["params"].items()) {
      if (v.is_number())
        s.scalars[k] = v.get<double>();
      else if (v.is_array()) {
        CVec c;
        for (const auto& e : v) c.push_back(complex_from(e));
        s.vectors[k] = c;
      } else
        throw std::invalid_argument("surface param '" + k + "' must be a number or an array");
    }
  return s;
}

inline json to_json(const SurfaceSpec& s) {
  json p = json::object();
  for (const auto& [k, v] : s.scalars) p[k] = v;
  for (const auto& [k, v] : s.vectors) p[k] = to_json(v);
  return {{"name", s.name}, {"ambient_dim", s.ambient_dim}, {"grid", to_json(s.grid)}, {"params", p}};
}

inline const char* to_string(MultiplierKind k) {
  return k == MultiplierKind::zero ? "zero" : k == MultiplierKind::analytic ? "analytic" : "pmc";
}

inline json to_json(const MultiplierSpec& s) {
  json f0 = json::array();
  for (auto c : s.f0) f0.push_back(to_json(c));
  return {{"zero", s.zero}, {"mu", s.mu}, {"a_mu", to_json(s.a_mu)}, {"f0", f0}};
}

inline MultiplierSpec multiplier_from(const json& j) {
  MultiplierSpec s;
  s.zero = j.value("zero", false);
  s.mu = j.value("mu", 0);
  if (j.contains("a_mu")) s.a_mu = complex_from(j["a_mu"]);
  if (j.contains("f0"))
    for (const auto& e : j["f0"]) s.f0.push_back(complex_from(e));
  return s;
}

// Samples CSV: header then rows r,theta,phi_1..phi_m in grid order (radius-major).
inline void write_samples_csv(const RField& phi, std::ostream& os) {
  const PolarGrid& g = phi.grid;
  os << "r,theta";
  for (int c = 1; c <= phi.ncomp; ++c) os << ",phi_" << c;
  os << '\n' << std::setprecision(17);
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      os << g.r(i) << ',' << g.theta(j);
      for (int c = 0; c < phi.ncomp; ++c) os << ',' << phi(g.idx(i, j), c);
      os << '\n';
    }
}

// The grid is recovered from the distinct radii and angles, which must form a full exponential-polar lattice.
inline RField read_samples_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("samples CSV: empty input");
  const int cols = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
  const int m = cols - 2;
  if (m < 3) throw std::invalid_argument("samples CSV: need columns r, theta, phi_1..phi_m with m >= 3");
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<double> row;
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != cols) throw std::invalid_argument("samples CSV: ragged row");
    rows.push_back(std::move(row));
  }
  auto distinct = [&](int k) {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r[k]);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }), v.end());
    return v;
  };
  const auto rs = distinct(0), ts = distinct(1);
  PolarGrid g;
  g.r_min = rs.front();
  g.r_max = rs.back();
  g.n_r = static_cast<int>(rs.size());
  g.n_theta = static_cast<int>(ts.size());
  g.validate();
  if (rows.size() != g.nodes()) throw std::invalid_argument("samples CSV: rows do not form a full grid");
  RField phi(g, m);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const int i = static_cast<int>(k) / g.n_theta, j = static_cast<int>(k) % g.n_theta;
    if (std::abs(rows[k][0] - g.r(i)) > 1e-9 * g.r(i) || std::abs(rows[k][1] - g.theta(j)) > 1e-9)
      throw std::invalid_argument("samples CSV: node " + std::to_string(k) + " off the exponential-polar lattice");
    for (int c = 0; c < m; ++c) phi(g.idx(i, j), c) = rows[k][2 + c];
  }
  return phi;
}

// Config document:
//   {surface: {...} | samples_csv: path, multiplier: {kind: zero|analytic|pmc, mu, a_mu, f0}, regular, levels,
//    tol_zero, spread_factor, with_potentials, with_expansion, annulus: [lo, hi], pmc_threshold, conformal_tol}
// A relative samples_csv path resolves against base_dir.
inline PipelineConfig config_from(const json& j, const std::filesystem::path& base_dir = {}) {
  PipelineConfig c;
  if (j.contains("surface")) c.surface = surface_from(j["surface"]);
  if (j.contains("samples_csv")) {
    std::filesystem::path p = j["samples_csv"].get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    std::ifstream in(p);
    if (!in) throw std::invalid_argument("cannot open samples " + p.string());
    c.samples = read_samples_csv(in);
    c.surface.grid = c.samples->grid;
    c.surface.ambient_dim = c.samples->ncomp;
    if (c.surface.name.empty()) c.surface.name = "samples";
  }
  if (!j.contains("surface") && !c.samples) throw std::invalid_argument("config needs surface or samples_csv");
  if (j.contains("multiplier")) {
    const auto& mj = j["multiplier"];
    const std::string kind = mj.value("kind", "zero");
    if (kind == "zero")
      c.multiplier_kind = MultiplierKind::zero;
    else if (kind == "analytic") {
      c.multiplier_kind = MultiplierKind::analytic;
      c.multiplier = multiplier_from(mj);
      c.multiplier.zero = false;
      c.multiplier.validate();
    } else if (kind == "pmc")
      c.multiplier_kind = MultiplierKind::pmc;
    else
      throw std::invalid_argument("multiplier kind must be zero, analytic or pmc");
  }
  c.regular = j.value("regular", c.regular);
  c.levels = j.value("levels", c.levels);
  c.tolerance.tol_zero = j.value("tol_zero", c.tolerance.tol_zero);
  c.tolerance.spread_factor = j.value("spread_factor", c.tolerance.spread_factor);
  c.with_potentials = j.value("with_potentials", c.with_potentials);
  c.with_expansion = j.value("with_expansion", c.with_expansion);
  c.pmc_threshold = j.value("pmc_threshold", c.pmc_threshold);
  if (j.contains("conformal_tol")) c.conformal_tol = j["conformal_tol"].get<double>();
  if (j.contains("annulus")) {
    c.annulus_lo = j["annulus"].at(0).get<double>();
    c.annulus_hi = j["annulus"].at(1).get<double>();
  }
  return c;
}

inline PipelineConfig load_config(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::invalid_argument("cannot open config " + p.string());
  return config_from(json::parse(in), p.parent_path());
}

inline json to_json(const PipelineConfig& c) {
  json m = to_json(c.multiplier);
  m["kind"] = to_string(c.multiplier_kind);
  return {{"surface", to_json(c.surface)},
          {"samples", c.samples.has_value()},
          {"multiplier", m},
          {"regular", c.regular},
          {"levels", c.levels},
          {"tol_zero", c.tolerance.tol_zero},
          {"spread_factor", c.tolerance.spread_factor},
          {"with_potentials", c.with_potentials},
          {"with_expansion", c.with_expansion},
          {"annulus", {c.annulus_lo, c.annulus_hi}},
          {"pmc_threshold", c.pmc_threshold},
          {"conformal_tol", c.conformal_tol ? json(*c.conformal_tol) : json(nullptr)}};
}

inline json to_json(const DecayExponent& e) {
  auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  return {{"value", num(e.value)}, {"ci", e.ci}, {"raw", num(e.raw)}, {"log_power", e.log_power}, {"at_floor", e.at_floor}, {"relative", e.relative}};
}

inline json to_json(const ResidueReport& R) {
  return {{"theta0", R.theta0},
          {"slope", R.slope},
          {"u0", R.u0},
          {"A", to_json(R.A.A)},
          {"A_isotropy_defect", R.A.isotropy_defect},
          {"A_normal_defect", R.A.normal_defect},
          {"beta0", R.beta0.beta0},
          {"rho_spread", R.beta0.rho_spread},
          {"gamma0", R.gamma0},
          {"gamma", R.gamma.gamma},
          {"gamma_zero_order", R.gamma.zero_order},
          {"gamma_degenerate", R.gamma.degenerate},
          {"a", R.gamma.a},
          {"winding_max_deviation", R.gamma.max_raw_deviation},
          {"L_defect", R.L_defect},
          {"inconsistencies", R.inconsistencies}};
}

inline json to_json(const LevelResult& L) {
  json j = {{"grid", to_json(L.grid)},
            {"energy", L.energy},
            {"conformal_defect", L.conformal_defect},
            {"strong_residual", L.strong_residual},
            {"divergence_defect", L.divergence_defect},
            {"antiholomorphy", L.antiholomorphy},
            {"special_fields_discrepancy", L.special_fields_discrepancy},
            {"multiplier", to_json(L.multiplier)},
            {"residues", to_json(L.report)},
            {"L_circulation_defect", L.L_circulation_defect},
            {"delta_integral", L.delta.integral},
            {"pmc", {{"detected", L.pmc.pmc}, {"defect", L.pmc.defect}, {"residue_conflict", L.pmc.residue_conflict}}},
            {"notes", L.notes}};
  if (L.phi_fit) {
    const auto& F = *L.phi_fit;
    json B = json::array();
    for (const auto& b : F.B) B.push_back(to_json(b));
    j["phi_fit"] = {{"A", to_json(F.A)},
                    {"B", B},
                    {"C_theta_a", to_json(F.C_theta_a)},
                    {"C", F.C},
                    {"xi", to_json(F.xi)},
                    {"predicted_exponent", F.predicted_exponent()},
                    {"condition", F.condition}};
  }
  if (L.h_fit) {
    const auto& H = *L.h_fit;
    j["h_fit"] = {{"E", to_json(H.E)}, {"gamma0_fit", H.gamma0}, {"eta", to_json(H.eta)}, {"predicted_exponent", H.predicted_exponent()}, {"condition", H.condition}};
  }
  if (L.constants) {
    const auto& c = *L.constants;
    j["constants"] = {{"C", c.C}, {"C_theta0_squared", c.C_theta0_squared}, {"C_parallel", c.C_parallel}, {"C_theta_a", c.C_theta_a}, {"C_theta_a_skipped", c.C_theta_a_skipped}};
  }
  if (L.system) j["potentials"] = {{"S_equation", L.system->S_equation}, {"R_equation", L.system->R_equation}, {"phi_identity", L.system->phi_identity},
                                     {"S_scale", L.system->S_scale}, {"R_scale", L.system->R_scale}, {"phi_scale", L.system->phi_scale},
                                     {"S_defect", *L.S_defect}, {"R_defect", *L.R_defect}};
  return j;
}

inline json to_json(const Conditions& c) {
  json j = {{"gamma0_zero", c.gamma0_zero}, {"gamma_zero", c.gamma_zero}, {"theta0_vs_mu_plus_2", to_string(c.order)}, {"regular", c.regular},
            {"pmc", c.pmc}, {"willmore", c.willmore}, {"range_ok", c.range_ok}, {"theta0", c.theta0}, {"a", c.a}, {"mu", c.mu}};
  if (c.willmore) j["mu"] = nullptr;  // zero multiplier: no finite order
  return j;
}

inline json to_json(const Classification& c) {
  return {{"verdict", to_string(c.verdict)}, {"conditions", to_json(c.conditions)}, {"sobolev_exponent", c.sobolev_exponent},
          {"regularity", c.regularity}, {"citations", c.citations}, {"diagnostics", c.diagnostics},
          {"gamma0_norm", c.gamma0_norm}, {"zero_threshold", c.zero_threshold}};
}

inline json to_json(const PipelineReport& R) {
  json levels = json::array();
  for (const auto& L : R.levels) levels.push_back(to_json(L));
  return {{"schema", kReportSchema},
          {"config", to_json(R.config)},
          {"levels", levels},
          {"strong_orders", R.strong_orders},
          {"divergence_orders", R.divergence_orders},
          {"classification", to_json(R.classification)}};
}

// Re-runs the decision table on the finest level of a saved report; the zero tolerance may be overridden.
inline Classification classify_report(const json& rep, std::optional<double> tol_zero = std::nullopt) {
  const std::string schema = rep.value("schema", "");
  if (schema != kReportSchema) throw std::invalid_argument("unsupported report schema '" + schema + "'");
  const auto& cfg = rep.at("config");
  const auto& fin = rep.at("levels").back();
  const auto& res = fin.at("residues");
  ResidueReport R;
  R.theta0 = res.at("theta0").get<int>();
  R.beta0.rho_spread = res.at("rho_spread").get<double>();
  R.beta0.beta0 = res.at("beta0").get<std::vector<double>>();
  R.gamma0 = res.at("gamma0").get<std::vector<double>>();
  R.gamma.gamma = res.at("gamma").get<std::vector<int>>();
  R.gamma.a = res.at("a").get<int>();
  R.inconsistencies = res.at("inconsistencies").get<std::vector<std::string>>();
  const MultiplierSpec spec = multiplier_from(fin.at("multiplier"));
  ZeroTolerance tol;
  tol.tol_zero = tol_zero.value_or(cfg.value("tol_zero", tol.tol_zero));
  tol.spread_factor = cfg.value("spread_factor", tol.spread_factor);
  const bool pmc = cfg.at("multiplier").value("kind", "zero") == std::string("pmc") || fin.at("pmc").at("detected").get<bool>();
  return classify(R, spec, pmc, cfg.value("regular", false), tol);
}

// Profiles written next to the report: delta.csv (r, delta), beta0_circles.csv (r, beta0_1..m),
// windings.csv (r, minus_winding_1..m before rounding), remainders.csv (r, xi_norm, eta_norm).
inline void write_profiles(const LevelResult& L, const std::filesystem::path& dir) {
  std::ofstream d(dir / "delta.csv");
  d << "r,delta\n" << std::setprecision(17);
  for (std::size_t i = 0; i < L.delta.r.size(); ++i) d << L.delta.r[i] << ',' << L.delta.delta[i] << '\n';
  const auto& b = L.report.beta0;
  const int m = static_cast<int>(b.beta0.size());
  std::ofstream bc(dir / "beta0_circles.csv");
  bc << "r";
  for (int c = 1; c <= m; ++c) bc << ",beta0_" << c;
  bc << '\n' << std::setprecision(17);
  for (std::size_t k = 0; k < b.radii.size(); ++k) {
    bc << b.radii[k];
    for (double v : b.per_circle[k]) bc << ',' << v;
    bc << '\n';
  }
  const auto& w = L.report.gamma;
  std::ofstream wc(dir / "windings.csv");
  wc << "r";
  for (int c = 1; c <= static_cast<int>(w.raw.size()); ++c) wc << ",minus_winding_" << c;
  wc << '\n' << std::setprecision(17);
  for (std::size_t k = 0; k < w.radii.size(); ++k) {
    wc << w.radii[k];
    for (const auto& col : w.raw) wc << ',' << col[k];
    wc << '\n';
  }
  if (L.phi_fit && L.h_fit) {
    std::ofstream rc(dir / "remainders.csv");
    rc << "r,xi_norm,eta_norm\n" << std::setprecision(17);
    const auto& x = L.phi_fit->xi;
    const auto& e = L.h_fit->eta;
    for (std::size_t k = 0; k < x.radii.size() && k < e.norms.size(); ++k) rc << x.radii[k] << ',' << x.norms[k] << ',' << e.norms[k] << '\n';
  }
}

}  // namespace willmore::io
