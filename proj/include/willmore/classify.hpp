#pragma once
#include <string>
#include <vector>

#include "willmore/multiplier.hpp"
#include "willmore/residues.hpp"

namespace willmore {

enum class Verdict {
  smooth,
  c_theta_plus_one_alpha,
  sobolev_limited,
  c_one_alpha_worst_case,
  regular_point_smooth,
  regular_point_c2alpha,
  inconsistent
};

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::smooth: return "smooth";
    case Verdict::c_theta_plus_one_alpha: return "c_theta_plus_one_alpha";
    case Verdict::sobolev_limited: return "sobolev_limited";
    case Verdict::c_one_alpha_worst_case: return "c_one_alpha_worst_case";
    case Verdict::regular_point_smooth: return "regular_point_smooth";
    case Verdict::regular_point_c2alpha: return "regular_point_c2alpha";
    case Verdict::inconsistent: return "inconsistent";
  }
  return "?";
}

inline Verdict verdict_from_string(const std::string& s) {
  for (int k = 0; k <= static_cast<int>(Verdict::inconsistent); ++k)
    if (s == to_string(static_cast<Verdict>(k))) return static_cast<Verdict>(k);
  throw std::invalid_argument("unknown verdict " + s);
}

enum class OrderRelation { below, equal, above };  // θ₀ against μ+2; f ≡ 0 counts as below

inline const char* to_string(OrderRelation o) {
  return o == OrderRelation::below ? "below" : o == OrderRelation::equal ? "equal" : "above";
}

struct Conditions {
  bool gamma0_zero = true;
  bool gamma_zero = true;
  OrderRelation order = OrderRelation::below;
  bool regular = false;
  bool pmc = false;
  bool willmore = false;
  bool range_ok = true;  // pole order inside its admissible range
  int theta0 = 1;
  int a = 0;
  int mu = 0;
};

struct Classification {
  Verdict verdict = Verdict::inconsistent;
  Conditions conditions;
  int sobolev_exponent = 0;  // k with Φ ∈ W^{k,p} for all p < ∞; 0 when not applicable
  std::string regularity;    // human-readable class
  std::vector<std::string> citations;
  std::vector<std::string> diagnostics;
  double gamma0_norm = 0.0;
  double zero_threshold = 0.0;
};

// Result labels name the supporting statement by role.
namespace cite {
inline const char* kExpansion = "asymptotic-expansion regularity scale";
inline const char* kResidueFree = "vanishing residues, multiplier order above θ₀−2: smooth";
inline const char* kResidueFreeBorderline = "vanishing residues, θ₀ = μ+2: C^{θ₀+1,α}";
inline const char* kRegularSmooth = "regular point, multiplier regular: smooth";
inline const char* kRegularSingular = "regular point, multiplier with simple pole: C^{2,α}";
inline const char* kWillmore = "Willmore: smooth iff β₀ and γ vanish";
inline const char* kParallel = "parallel mean curvature: smooth across branch points";
inline const char* kResidueRange = "pole order range max{0, θ₀−μ−2} ≤ a ≤ θ₀−1";
}  // namespace cite

// Pure decision table. Precedence: inconsistency, regular point, Willmore, parallel mean curvature, general case.
inline Classification decide(const Conditions& c) {
  Classification out;
  out.conditions = c;
  auto fail = [&](const std::string& why) {
    out.verdict = Verdict::inconsistent;
    out.regularity = "undetermined";
    out.diagnostics.push_back(why);
    return out;
  };
  const bool residues_vanish = c.gamma0_zero && c.gamma_zero;
  auto limited = [&](const char* cause) {
    out.citations = {cause, cite::kExpansion};
    if (c.theta0 == 1) {
      out.verdict = Verdict::c_one_alpha_worst_case;
      out.sobolev_exponent = 2;
      out.regularity = "C^{1,α} (not smooth)";
    } else {
      out.verdict = Verdict::sobolev_limited;
      out.sobolev_exponent = c.theta0 + 2 - c.a;
      out.regularity = "W^{" + std::to_string(out.sobolev_exponent) + ",p} for all p < ∞ (not smooth)";
    }
    return out;
  };
  if (!c.range_ok) {
    out.citations = {cite::kResidueRange};
    return fail("second residue outside its admissible range");
  }
  if (c.regular) {
    if (c.theta0 != 1) return fail("a regular point has θ₀ = 1");
    if (!residues_vanish) return fail("residues must vanish at a regular point");
    if (c.willmore || c.pmc || c.mu >= 0) {
      out.verdict = Verdict::regular_point_smooth;
      out.regularity = "smooth";
      out.citations = {cite::kRegularSmooth};
    } else {
      out.verdict = Verdict::regular_point_c2alpha;
      out.regularity = "C^{2,α} for all α < 1";
      out.citations = {cite::kRegularSingular};
    }
    return out;
  }
  if (c.willmore) {
    if (!residues_vanish) return limited(cite::kWillmore);
    out.verdict = Verdict::smooth;
    out.regularity = "smooth";
    out.citations = {cite::kWillmore, cite::kResidueFree};
    return out;
  }
  if (c.pmc) {
    if (!residues_vanish) return fail("parallel mean curvature forces vanishing residues, measured otherwise");
    out.verdict = Verdict::smooth;
    out.regularity = "smooth";
    out.citations = {cite::kParallel};
    return out;
  }
  if (!residues_vanish) return limited(cite::kExpansion);
  switch (c.order) {
    case OrderRelation::below:
      out.verdict = Verdict::smooth;
      out.regularity = "smooth";
      out.citations = {cite::kResidueFree};
      return out;
    case OrderRelation::equal:
      out.verdict = Verdict::c_theta_plus_one_alpha;
      out.regularity = "C^{" + std::to_string(c.theta0 + 1) + ",α} for all α < 1, H ∈ W^{2,(2,∞)}";
      out.citations = {cite::kResidueFreeBorderline};
      return out;
    case OrderRelation::above:
      break;
  }
  return fail("γ = 0 requires θ₀ ≤ μ+2");
}

struct ZeroTolerance {
  double tol_zero = 1e-6;
  double spread_factor = 10.0;  // γ₀ counts as zero below max(tol_zero, factor·ρ-spread)
};

inline Conditions conditions_from(const ResidueReport& R, const MultiplierSpec& spec, bool pmc, bool regular, const ZeroTolerance& tol = {}) {
  Conditions c;
  double n2 = 0;
  for (double x : R.gamma0) n2 += x * x;
  const double thr = std::max(tol.tol_zero, tol.spread_factor * R.beta0.rho_spread);
  c.gamma0_zero = std::sqrt(n2) <= thr;
  c.gamma_zero = true;
  for (int g : R.gamma.gamma) c.gamma_zero = c.gamma_zero && g == 0;
  c.theta0 = R.theta0;
  c.a = R.gamma.a;
  c.willmore = spec.zero;
  c.mu = spec.zero ? std::numeric_limits<int>::max() / 2 : spec.mu;
  c.order = spec.zero || R.theta0 < spec.mu + 2 ? OrderRelation::below : R.theta0 == spec.mu + 2 ? OrderRelation::equal : OrderRelation::above;
  c.pmc = pmc;
  c.regular = regular;
  c.range_ok = R.inconsistencies.empty();
  return c;
}

inline Classification classify(const ResidueReport& R, const MultiplierSpec& spec, bool pmc, bool regular, const ZeroTolerance& tol = {}) {
  Classification out = decide(conditions_from(R, spec, pmc, regular, tol));
  double n2 = 0;
  for (double x : R.gamma0) n2 += x * x;
  out.gamma0_norm = std::sqrt(n2);
  out.zero_threshold = std::max(tol.tol_zero, tol.spread_factor * R.beta0.rho_spread);
  for (const auto& s : R.inconsistencies) out.diagnostics.push_back(s);
  return out;
}

struct PmcDetection {
  bool pmc = false;
  double defect = 0.0;  // ‖π_n∇H‖ relative to max(1, ‖∇H‖)
  bool residue_conflict = false;
};

// Parallel mean curvature: π_n∇H ≡ 0. Such surfaces must carry vanishing β₀ and γ.
inline PmcDetection pmc_detect(const CurvatureField& C, const FrameField& F, const Differentiator& D, const ResidueReport* R = nullptr,
                               double threshold = 1e-6) {
  PmcDetection P;
  const auto [lo, hi] = C.H.grid.interior_range();
  auto [h1, h2] = D.grad(C.H);
  const double scale = std::max({1.0, annulus_norm(h1, lo, hi), annulus_norm(h2, lo, hi)});
  P.defect = std::max(annulus_norm(normal_part(F, h1), lo, hi), annulus_norm(normal_part(F, h2), lo, hi)) / scale;
  P.pmc = P.defect <= threshold;
  if (P.pmc && R) {
    double b = 0;
    for (double x : R->beta0.beta0) b += x * x;
    bool g0 = true;
    for (int g : R->gamma.gamma) g0 = g0 && g == 0;
    P.residue_conflict = std::sqrt(b) > 1e-6 || !g0;
  }
  return P;
}

}  // namespace willmore
