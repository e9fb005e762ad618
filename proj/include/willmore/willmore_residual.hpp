#pragma once

#include <optional>

#include "willmore/multiplier.hpp"

namespace willmore {

// Δ⊥H + 2Re((H·H₀*)H₀) − e^{−2λ}Re(H₀f), with Δ⊥H = e^{−2λ}π_n div(π_n∇H) so that Willmore
// surfaces (f ≡ 0) give zero; f is in the strong-form convention (cylinder: f = +2e^{2λ}H·H₀*).
inline RField strong_residual(const CurvatureField& C, const FrameField& F, const CField& f, const Differentiator& D) {
  auto [h1, h2] = D.grad(C.H);
  const RField div = D.divergence(normal_part(F, h1), normal_part(F, h2));
  RField res = normal_part(F, div);
  for (std::size_t n = 0; n < res.nodes(); ++n) {
    const double w = std::exp(-2 * F.lambda(n));
    cdouble s = 0;
    for (int c = 0; c < C.m; ++c) s += C.H(n, c) * std::conj(C.H0(n, c));
    for (int c = 0; c < C.m; ++c)
      res(n, c) = w * res(n, c) + 2 * (s * C.H0(n, c)).real() - w * (C.H0(n, c) * f(n)).real();
  }
  return res;
}

struct FluxField {
  RField X1, X2;      // X_raw − 2β₀∇log|x| (equal to raw when β₀ absent)
  RField raw1, raw2;  // ∇H − 3π_n∇H + ⋆(∇⊥n∧H) − e^{−2λ}M_{f_div}∇⊥Φ with f_div = −f
  RField div_defect;  // div X_raw, m components
  std::optional<std::vector<double>> beta0;
};

inline void subtract_log_flux(FluxField& X, const std::vector<double>& beta0) {
  const PolarGrid& g = X.raw1.grid;
  X.X1 = X.raw1;
  X.X2 = X.raw2;
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      const std::size_t n = g.idx(i, j);
      const double c = std::cos(g.theta(j)) / g.r(i), s = std::sin(g.theta(j)) / g.r(i);
      for (int k = 0; k < X.X1.ncomp; ++k) {
        X.X1(n, k) -= 2 * beta0[k] * c;
        X.X2(n, k) -= 2 * beta0[k] * s;
      }
    }
  X.beta0 = beta0;
}

inline FluxField flux(const CurvatureField& C, const FrameField& F, const Jets& J, const CField& f, const Differentiator& D,
                      std::optional<std::vector<double>> beta0 = std::nullopt) {
  const PolarGrid& g = C.H.grid;
  const int m = C.m;
  auto [h1, h2] = D.grad(C.H);
  const RField p1 = normal_part(F, h1), p2 = normal_part(F, h2);
  FluxField X;
  X.raw1 = h1 - p1 * 3.0;
  X.raw2 = h2 - p2 * 3.0;
  for (std::size_t n = 0; n < g.nodes(); ++n) {
    const auto H = node_vec(C.H, n);
    // ∇⊥n = (−∂₂n, ∂₁n).
    const auto t1 = hodge_star(wedge(node_mv(C.dn2, n, m, m - 2) * -1.0, H));
    const auto t2 = hodge_star(wedge(node_mv(C.dn1, n, m, m - 2), H));
    // Divergence-form multiplier f_div = −f keeps div X_raw = −2e^{2λ}·(strong residual).
    const double w = std::exp(-2 * F.lambda(n)), re = -f(n).real(), im = -f(n).imag();
    for (int c = 0; c < m; ++c) {
      const double m1 = im * J.d2(n, c) + re * J.d1(n, c);
      const double m2 = -re * J.d2(n, c) + im * J.d1(n, c);
      X.raw1(n, c) += t1[c] - w * m1;
      X.raw2(n, c) += t2[c] - w * m2;
    }
  }
  X.div_defect = D.divergence(X.raw1, X.raw2);
  if (beta0)
    subtract_log_flux(X, *beta0);
  else {
    X.X1 = X.raw1;
    X.X2 = X.raw2;
  }
  return X;
}

struct EquivalenceReport {
  double divergence_form = 0.0;  // ‖strong + (e^{−2λ}/2) div X_raw‖
  double conformal_identity = 0.0;  // ‖∂_z(e^{−2λ}f∂_zΦ) − ½H₀f‖
};

inline EquivalenceReport equivalence_check(const RField& strong, const FluxField& X, const CurvatureField& C, const FrameField& F,
                                           const Jets& J, const CField& f, const Differentiator& D, int lo, int hi) {
  const PolarGrid& g = strong.grid;
  RField d = strong;
  CField q(g, C.m), h(g, C.m);
  for (std::size_t n = 0; n < g.nodes(); ++n) {
    const double w = std::exp(-2 * F.lambda(n));
    for (int c = 0; c < C.m; ++c) {
      d(n, c) += 0.5 * w * X.div_defect(n, c);
      q(n, c) = w * f(n) * dz_phi(J, n, c);
      h(n, c) = 0.5 * C.H0(n, c) * f(n);
    }
  }
  return {annulus_norm(d, lo, hi), annulus_norm(D.d_z(q) - h, lo, hi)};
}

}  // namespace willmore
