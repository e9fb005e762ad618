#pragma once
#include <optional>
#include <stdexcept>
#include <string>

#include "willmore/classify.hpp"
#include "willmore/expansion.hpp"
#include "willmore/potentials.hpp"
#include "willmore/willmore_residual.hpp"

namespace willmore {

enum class MultiplierKind { zero, analytic, pmc };

struct PipelineConfig {
  SurfaceSpec surface;
  std::optional<RField> samples;  // imported Φ samples replace the catalog chart
  MultiplierKind multiplier_kind = MultiplierKind::zero;
  MultiplierSpec multiplier;  // analytic kind; the pmc kind fills it by estimation
  int levels = 1;
  ZeroTolerance tolerance;
  bool regular = false;
  bool with_potentials = false;
  bool with_expansion = true;
  double annulus_lo = 0.1, annulus_hi = 0.9;  // verification annulus in |z|
  double pmc_threshold = 1e-6;
  std::optional<double> conformal_tol;  // unset: kConformalDefectTol, or 10·ds² for imported samples
};

// Thrown with the failing stage named.
struct StageError : std::runtime_error {
  std::string stage;
  StageError(const std::string& s, const std::string& what) : std::runtime_error(s + ": " + what), stage(s) {}
};

struct LevelResult {
  PolarGrid grid;
  double energy = 0.0;              // W over the sampled annulus
  double conformal_defect = 0.0;
  double strong_residual = 0.0;     // max-norm on the verification annulus
  double divergence_defect = 0.0;   // ‖strong + (e^{−2λ}/2) div X_raw‖
  double strong_scale = 0.0;        // magnitude of Δ⊥H, for floor decisions
  double antiholomorphy = 0.0;
  double special_fields_discrepancy = 0.0;
  MultiplierSpec multiplier;  // as analysed (estimated for the pmc kind)
  ResidueReport report;
  double L_circulation_defect = 0.0;
  DeltaProfile delta;
  PmcDetection pmc;
  std::optional<ExpansionFit> phi_fit;
  std::optional<HFit> h_fit;
  std::optional<ConstantDefects> constants;
  std::optional<SystemResiduals> system;
  std::optional<double> S_defect, R_defect;
  std::vector<std::string> notes;
};

struct PipelineReport {
  PipelineConfig config;
  std::vector<LevelResult> levels;
  Classification classification;
  std::vector<double> strong_orders, divergence_orders;
  const LevelResult& finest() const { return levels.back(); }
};

namespace detail {

// Order μ and leading coefficient of a sampled anti-holomorphic multiplier, from circle means of f z̄^{−μ}.
inline MultiplierSpec estimate_multiplier(const CField& f) {
  const PolarGrid& g = f.grid;
  const auto [lo, hi] = inner_window(g);
  MultiplierSpec s;
  double peak = 0;
  for (const auto& v : f.data) peak = std::max(peak, std::abs(v));
  if (peak < 1e-12) return s;
  double mx = 0, my = 0, sxx = 0, sxy = 0;
  const int n = hi - lo + 1;
  std::vector<double> x, y;
  for (int i = lo; i <= hi; ++i) {
    double acc = 0;
    for (int j = 0; j < g.n_theta; ++j) acc += std::abs(f(g.idx(i, j)));
    x.push_back(g.s(i));
    y.push_back(std::log(acc / g.n_theta + 1e-300));
  }
  for (int k = 0; k < n; ++k) mx += x[k] / n, my += y[k] / n;
  for (int k = 0; k < n; ++k) sxx += (x[k] - mx) * (x[k] - mx), sxy += (x[k] - mx) * (y[k] - my);
  s.zero = false;
  s.mu = static_cast<int>(std::lround(sxy / sxx));
  cdouble a = 0;
  for (int j = 0; j < g.n_theta; ++j) a += f(g.idx(lo, j)) / std::pow(std::conj(std::polar(g.r(lo), g.theta(j))), s.mu);
  s.a_mu = a / static_cast<double>(g.n_theta);
  return s;
}

}  // namespace detail

inline LevelResult analyze_level(const PipelineConfig& cfg, int level) {
  LevelResult out;
  const PolarGrid g = cfg.samples ? cfg.samples->grid : cfg.surface.grid.refined(level);
  out.grid = g;
  auto stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  };
  const ImmersionField f = stage("surface", [&] {
    if (cfg.samples) return sampled_surface(*cfg.samples, cfg.surface.name.empty() ? "samples" : cfg.surface.name);
    SurfaceSpec sp = cfg.surface;
    sp.grid = g;
    return catalog_surface(sp);
  });
  const Differentiator D(g);
  const Jets J = f.exact ? *f.exact : differentiate(f, D);
  const double ctol = cfg.conformal_tol.value_or(f.exact ? kConformalDefectTol : std::max(kConformalDefectTol, 10 * g.ds() * g.ds()));
  const FrameField F = stage("surface", [&] { return frame_and_gauss(f, J, conformal_factor(f, J), ctol); });
  out.conformal_defect = F.max_defect;
  const CurvatureField C = stage("curvature", [&] { return curvature(f, J, F, D); });
  out.energy = willmore_energy(C);
  out.delta = delta_profile(C);

  MultiplierSpec spec = cfg.multiplier;
  CField fz(g, 1);
  stage("multiplier", [&] {
    if (cfg.multiplier_kind == MultiplierKind::pmc) {
      fz = pmc_multiplier(C, F, D).f;
      spec = detail::estimate_multiplier(fz);
    } else if (cfg.multiplier_kind == MultiplierKind::analytic) {
      fz = sample_multiplier(spec, g);
    } else {
      spec = MultiplierSpec{};
    }
    out.multiplier = spec;
    return 0;
  });
  const auto [vlo, vhi] = g.radial_range(cfg.annulus_lo, cfg.annulus_hi);
  out.antiholomorphy = anti_holomorphy_defect(fz, D, vlo, vhi);

  FluxField X = stage("residual", [&] {
    const RField strong = strong_residual(C, F, fz, D);
    FluxField X = flux(C, F, J, fz, D);
    out.strong_residual = annulus_norm(strong, vlo, vhi);
    out.divergence_defect = equivalence_check(strong, X, C, F, J, fz, D, vlo, vhi).divergence_form;
    return X;
  });

  ResidueReport& R = out.report;
  CurlPotential L;
  stage("residues", [&] {
    const BranchOrder B = branch_order(F);
    R.theta0 = B.theta0;
    R.slope = B.slope;
    R.u0 = B.u0;
    R.A = tangent_vector(J, F, B.theta0);
    R.beta0 = first_residue(X, default_circles(g));
    R.gamma0 = modified_residue(R.beta0.beta0, R.theta0, spec, R.A.A, R.u0);
    subtract_log_flux(X, R.beta0.beta0);
    L = potential_L(X, D);
    R.L_defect = L.defect();
    out.L_circulation_defect = L.circulation_defect;
    std::optional<SpecialFields> S;
    if (!spec.zero && spec.mu >= -1) {
      S = special_fields(spec, R.theta0, R.u0, R.A.A, f, J, F, D);
      out.special_fields_discrepancy = S->discrepancy;
    }
    const CField W = w_field(L.P, C.H, R.beta0.beta0, S ? &S->F_mu : nullptr);
    R.gamma = second_residue(W);
    if (!spec.zero && spec.mu < -1) R.inconsistencies.push_back("multiplier order μ = " + std::to_string(spec.mu) + " is not integrable");
    else check_range(R, spec);
    return 0;
  });
  out.pmc = pmc_detect(C, F, D, &R, cfg.pmc_threshold);

  if (cfg.with_expansion) {
    if (R.gamma.a < R.theta0 && R.gamma.a >= 0) {
      stage("expansion", [&] {
        out.phi_fit = fit_phi(f.phi, R);
        out.h_fit = fit_H(C, R);
        out.constants = verify_constants(*out.phi_fit, *out.h_fit, R);
        return 0;
      });
    } else {
      out.notes.push_back("expansion skipped: pole order outside [0, θ₀−1]");
    }
  }
  if (cfg.with_potentials) {
    stage("potentials", [&] {
      const auto aux = solve_gG(R.beta0.beta0, L.P, C.H, J, D);
      const auto SR = potentials_SR(L.P, J, C, aux, D);
      out.S_defect = SR.S_defect;
      out.R_defect = SR.R_defect;
      out.system = verify_system(SR, aux, F, J, D, vlo, vhi);
      return 0;
    });
  }
  return out;
}

inline PipelineReport run_pipeline(const PipelineConfig& cfg) {
  if (cfg.levels < 1) throw StageError("config", "levels must be >= 1");
  if (cfg.samples && cfg.levels != 1) throw StageError("config", "imported samples support a single level");
  PipelineReport rep;
  rep.config = cfg;
  for (int l = 0; l < cfg.levels; ++l) rep.levels.push_back(analyze_level(cfg, l));
  std::vector<double> s, d;
  for (const auto& L : rep.levels) {
    s.push_back(L.strong_residual);
    d.push_back(L.divergence_defect);
  }
  rep.strong_orders = observed_orders(s);
  rep.divergence_orders = observed_orders(d);
  const auto& fin = rep.finest();
  const bool pmc = cfg.multiplier_kind == MultiplierKind::pmc || fin.pmc.pmc;
  rep.classification = classify(fin.report, fin.multiplier, pmc, cfg.regular, cfg.tolerance);
  if (fin.pmc.residue_conflict) rep.classification.diagnostics.push_back("PMC detected but residues do not vanish");
  return rep;
}

}  // namespace willmore
