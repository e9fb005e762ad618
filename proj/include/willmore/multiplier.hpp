#pragma once

#include "willmore/curvature.hpp"

namespace willmore {

// f(z̄) = a_μ z̄^μ + f₀(z̄), f₀(z̄) = Σ_k f0[k] z̄^k with f0[k] = 0 for k ≤ μ.
struct MultiplierSpec {
  int mu = 0;
  cdouble a_mu = 0.0;
  std::vector<cdouble> f0;
  bool zero = true;

  void validate() const {
    if (zero) return;
    if (mu < -1) throw std::invalid_argument("multiplier must be locally integrable (mu >= -1)");
    if (a_mu == 0.0) throw std::invalid_argument("a_mu = 0 with a multiplier not flagged zero");
    for (int k = 0; k < static_cast<int>(f0.size()) && k <= mu; ++k)
      if (f0[k] != 0.0) throw std::invalid_argument("f0 must vanish to order above mu");
  }
  cdouble f0_at(cdouble zb) const {
    cdouble s = 0, p = 1;
    for (auto c : f0) {
      s += c * p;
      p *= zb;
    }
    return s;
  }
  cdouble operator()(cdouble z) const {
    if (zero) return 0.0;
    const cdouble zb = std::conj(z);
    return a_mu * std::pow(zb, mu) + f0_at(zb);
  }
};

// The divergence-form and residue formulas carry the opposite multiplier sign.
inline MultiplierSpec divergence_convention(MultiplierSpec s) {
  s.a_mu = -s.a_mu;
  for (auto& c : s.f0) c = -c;
  return s;
}

inline CField sample_multiplier(const MultiplierSpec& spec, const PolarGrid& g) {
  spec.validate();
  CField f(g, 1);
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < g.n_theta; ++j) f(g.idx(i, j)) = spec(std::polar(g.r(i), g.theta(j)));
  return f;
}

// M_f = ((−Im f, Re f), (Re f, Im f)) row-major per node.
inline RField multiplier_matrix(const CField& f) {
  RField M(f.grid, 4);
  for (std::size_t n = 0; n < f.nodes(); ++n) {
    const double a = f(n).real(), b = f(n).imag();
    M(n, 0) = -b;
    M(n, 1) = a;
    M(n, 2) = a;
    M(n, 3) = b;
  }
  return M;
}

inline double anti_holomorphy_defect(const CField& f, const Differentiator& D, int lo, int hi) {
  return annulus_norm(D.d_z(f), lo, hi);
}

// e^{−2λ}f_div ∂_zΦ = ∂_z̄F_μ + J with f_div = −f.
struct SpecialFields {
  CField F_mu;
  CField J_direct;
  CField J_indirect;
  double discrepancy = 0.0;  // annulus norm of J_direct − J_indirect
};

inline cdouble dz_phi(const Jets& J, std::size_t n, int c) { return 0.5 * cdouble(J.d1(n, c), -J.d2(n, c)); }

inline SpecialFields special_fields(const MultiplierSpec& strong_spec, int theta0, double u0, const CVec& A, const ImmersionField& f,
                                    const Jets& J, const FrameField& F, const Differentiator& D) {
  const MultiplierSpec spec = divergence_convention(strong_spec);
  spec.validate();
  const PolarGrid& g = f.grid();
  const int m = f.m;
  SpecialFields S{CField(g, m), CField(g, m), CField(g, m)};
  if (spec.zero) return S;
  const int p = spec.mu + 2 - theta0;
  const double e2u0 = std::exp(-2 * u0);
  const cdouble pref = 0.5 * spec.a_mu * static_cast<double>(theta0) * e2u0;
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      const std::size_t n = g.idx(i, j);
      const cdouble z = std::polar(g.r(i), g.theta(j)), zb = std::conj(z);
      const cdouble shape = p == 0 ? cdouble(2 * std::log(g.r(i))) : std::pow(zb, p) / static_cast<double>(p);
      const double lam = F.lambda(n), u = lam - (theta0 - 1) * std::log(g.r(i));
      const cdouble zt = std::pow(z, 1 - theta0), zbm = std::pow(zb, spec.mu + 1 - theta0);
      const cdouble ff = spec(z), f0 = spec.f0_at(zb);
      for (int c = 0; c < m; ++c) {
        S.F_mu(n, c) = pref * A[c] * shape;
        const cdouble dz = dz_phi(J, n, c);
        const cdouble bracket = zt * std::exp(-2 * u) * dz - 0.5 * theta0 * e2u0 * A[c];
        S.J_direct(n, c) = spec.a_mu * zbm * bracket + std::exp(-2 * lam) * f0 * dz;
        S.J_indirect(n, c) = std::exp(-2 * lam) * ff * dz;
      }
    }
  S.J_indirect -= D.d_zbar(S.F_mu);
  S.discrepancy = annulus_norm(S.J_direct - S.J_indirect);
  return S;
}

enum class PmcSign { Plus, Minus };

struct PmcMultiplier {
  CField f;
  double antiholomorphy_defect = 0.0;  // ‖∂_z f‖
  double pmc_defect = 0.0;             // ‖π_n∇H‖
  double codazzi_defect = 0.0;         // ‖e^{−2λ}∂_z̄(e^{2λ}H·H₀) − (H·∂_zH + H₀·∂_z̄H)‖, the conjugate of the H₀* form
};

// f = ±2e^{2λ} H·H₀* (complex conjugate on H₀).
inline PmcMultiplier pmc_multiplier(const CurvatureField& C, const FrameField& F, const Differentiator& D, PmcSign sign = PmcSign::Plus) {
  const PolarGrid& g = C.H.grid;
  const double sg = sign == PmcSign::Plus ? 2.0 : -2.0;
  PmcMultiplier P{CField(g, 1)};
  CField q(g, 1);  // e^{2λ}H·H₀, holomorphic exactly when H is parallel
  for (std::size_t n = 0; n < g.nodes(); ++n) {
    cdouble s = 0;
    for (int c = 0; c < C.m; ++c) s += C.H(n, c) * C.H0(n, c);
    q(n) = std::exp(2 * F.lambda(n)) * s;
    P.f(n) = sg * std::conj(q(n));
  }
  const auto [lo, hi] = g.interior_range();
  P.antiholomorphy_defect = anti_holomorphy_defect(P.f, D, lo, hi);
  auto [h1, h2] = D.grad(C.H);
  P.pmc_defect = std::max(annulus_norm(normal_part(F, h1), lo, hi), annulus_norm(normal_part(F, h2), lo, hi));
  const CField dzH = D.d_z(C.H), dzbH = D.d_zbar(C.H), dq = D.d_zbar(q);
  CField cod(g, 1);
  for (std::size_t n = 0; n < g.nodes(); ++n) {
    cdouble s = 0;
    for (int c = 0; c < C.m; ++c) s += C.H(n, c) * dzH(n, c) + C.H0(n, c) * dzbH(n, c);
    cod(n) = std::exp(-2 * F.lambda(n)) * dq(n) - s;
  }
  P.codazzi_defect = annulus_norm(cod, lo, hi);
  return P;
}

}  // namespace willmore
