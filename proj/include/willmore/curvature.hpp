#pragma once

#include "willmore/surface.hpp"

namespace willmore {

struct CurvatureField {
  int m = 3;
  RField h11, h12, h22;  // e^{−2λ}π_n ∂²_{ij}Φ, m components each
  RField H;              // ½(h₁₁ + h₂₂)
  CField H0;             // ½(h₁₁ − h₂₂ − 2i h₁₂)
  RField K;              // h₁₁·h₂₂ − |h₁₂|²
  RField K_liouville;    // −e^{−2λ}Δλ
  RField energy_density; // |H|² e^{2λ}
  RField dn1, dn2;       // ∂ⱼn as (m−2)-vectors
};

namespace detail {

// ∂ⱼe_k = e^{−λ}∂ⱼ∂ₖΦ − (∂ⱼλ)e_k with ∂ⱼλ = (∂₁Φ·∂₁ⱼΦ + ∂₂Φ·∂₂ⱼΦ)/|∇Φ|².
inline void frame_derivatives(const Jets& J, const FrameField& F, std::size_t n, int j, std::vector<double>& de1, std::vector<double>& de2) {
  const int m = F.m;
  const RField& d1j = j == 0 ? J.d11 : J.d12;
  const RField& d2j = j == 0 ? J.d12 : J.d22;
  double num = 0, den = 0;
  for (int c = 0; c < m; ++c) {
    num += J.d1(n, c) * d1j(n, c) + J.d2(n, c) * d2j(n, c);
    den += J.d1(n, c) * J.d1(n, c) + J.d2(n, c) * J.d2(n, c);
  }
  const double dl = num / den, il = std::exp(-F.lambda(n));
  de1.resize(m);
  de2.resize(m);
  for (int c = 0; c < m; ++c) {
    de1[c] = il * d1j(n, c) - dl * F.e1(n, c);
    de2[c] = il * d2j(n, c) - dl * F.e2(n, c);
  }
}

}  // namespace detail

inline CurvatureField curvature(const ImmersionField& f, const Jets& J, const FrameField& F, const Differentiator& D) {
  if (F.e1.data.empty()) throw std::invalid_argument("curvature needs a frame (run frame_and_gauss first)");
  const PolarGrid& g = f.grid();
  const int m = f.m;
  CurvatureField C;
  C.m = m;
  C.h11 = RField(g, m);
  C.h12 = RField(g, m);
  C.h22 = RField(g, m);
  C.H = RField(g, m);
  C.H0 = CField(g, m);
  C.K = RField(g, 1);
  C.energy_density = RField(g, 1);
  const int nn = binomial(m, m - 2);
  C.dn1 = RField(g, nn);
  C.dn2 = RField(g, nn);
  std::vector<double> de1, de2;
  for (std::size_t n = 0; n < g.nodes(); ++n) {
    const double w = std::exp(-2 * F.lambda(n));
    for (int c = 0; c < m; ++c) {
      C.h11(n, c) = w * J.d11(n, c);
      C.h12(n, c) = w * J.d12(n, c);
      C.h22(n, c) = w * J.d22(n, c);
    }
    project_normal(F, n, C.h11.at(n));
    project_normal(F, n, C.h12.at(n));
    project_normal(F, n, C.h22.at(n));
    double k = 0, h2 = 0;
    for (int c = 0; c < m; ++c) {
      C.H(n, c) = 0.5 * (C.h11(n, c) + C.h22(n, c));
      C.H0(n, c) = 0.5 * cdouble(C.h11(n, c) - C.h22(n, c), -2 * C.h12(n, c));
      k += C.h11(n, c) * C.h22(n, c) - C.h12(n, c) * C.h12(n, c);
      h2 += C.H(n, c) * C.H(n, c);
    }
    C.K(n) = k;
    C.energy_density(n) = h2 / w;
    const auto e1 = node_vec(F.e1, n), e2 = node_vec(F.e2, n);
    for (int j = 0; j < 2; ++j) {
      detail::frame_derivatives(J, F, n, j, de1, de2);
      const auto d = hodge_star(wedge(MultiVec<double>::vector(m, de1.begin()), e2) + wedge(e1, MultiVec<double>::vector(m, de2.begin())));
      store(j == 0 ? C.dn1 : C.dn2, n, d);
    }
  }
  C.K_liouville = D.laplacian(F.lambda);
  for (std::size_t n = 0; n < g.nodes(); ++n) C.K_liouville(n) *= -std::exp(-2 * F.lambda(n));
  return C;
}

// ∫|H|² e^{2λ} dx over radial nodes [lo, hi].
inline double willmore_energy(const CurvatureField& C, int lo, int hi) {
  if (hi < lo) throw std::invalid_argument("empty region");
  return integrate_area(C.energy_density, lo, hi);
}
inline double willmore_energy(const CurvatureField& C) { return willmore_energy(C, 0, C.H.grid.n_r - 1); }

// Liouville residual ‖Δu + e^{2λ}K‖ (Δu = Δλ away from 0).
inline double gauss_bonnet_check(const CurvatureField& C, const FrameField& F, const Differentiator& D, int lo, int hi) {
  RField r = D.laplacian(F.lambda);
  for (std::size_t n = 0; n < r.nodes(); ++n) r(n) += std::exp(2 * F.lambda(n)) * C.K(n);
  return annulus_norm(r, lo, hi);
}

inline double grad_n_sq(const CurvatureField& C, std::size_t n) {
  double s = 0;
  for (int k = 0; k < C.dn1.ncomp; ++k) s += C.dn1(n, k) * C.dn1(n, k) + C.dn2(n, k) * C.dn2(n, k);
  return s;
}

// max |π_T H| / max(|H|, floor·|II|) with |II| = e^{−λ}|∇n|: on minimal surfaces H is pure roundoff of the shape operator.
inline double normality_defect(const CurvatureField& C, const FrameField& F, double floor = 1e-6) {
  double worst = 0;
  for (std::size_t n = 0; n < C.H.nodes(); ++n) {
    const double second = std::exp(-F.lambda(n)) * std::sqrt(grad_n_sq(C, n));
    double a = 0, b = 0, h = 0;
    for (int c = 0; c < C.m; ++c) {
      a += C.H(n, c) * F.e1(n, c);
      b += C.H(n, c) * F.e2(n, c);
      h += C.H(n, c) * C.H(n, c);
    }
    worst = std::max(worst, std::hypot(a, b) / std::max({std::sqrt(h), floor * second, 1e-300}));
  }
  return worst;
}

// Best constant c in e^λ|H₀| ≤ c|∇n| over nodes where ∇n is above roundoff (flat charts have none).
inline double frame_constant(const CurvatureField& C, const FrameField& F) {
  double worst = 0;
  for (std::size_t n = 0; n < C.H.nodes(); ++n) {
    double h0 = 0;
    for (int c = 0; c < C.m; ++c) h0 += std::norm(C.H0(n, c));
    const double dn = std::sqrt(grad_n_sq(C, n));
    if (dn > 1e-10) worst = std::max(worst, std::exp(F.lambda(n)) * std::sqrt(h0) / dn);
  }
  return worst;
}

// ¼∫|∇n|²dx from a stencil gradient of n against ¼∫|II|²_g dvol_g from h_ij.
struct EnergyIdentity {
  double from_gauss_map = 0.0;
  double from_second_form = 0.0;
};
inline EnergyIdentity energy_identity(const CurvatureField& C, const FrameField& F, const Differentiator& D, int lo, int hi) {
  auto [a, b] = D.grad(F.n);
  RField gn(C.H.grid, 1), hh(C.H.grid, 1);
  for (std::size_t n = 0; n < gn.nodes(); ++n) {
    double s = 0, t = 0;
    for (int k = 0; k < a.ncomp; ++k) s += a(n, k) * a(n, k) + b(n, k) * b(n, k);
    for (int c = 0; c < C.m; ++c)
      t += C.h11(n, c) * C.h11(n, c) + 2 * C.h12(n, c) * C.h12(n, c) + C.h22(n, c) * C.h22(n, c);
    gn(n) = 0.25 * s;
    hh(n) = 0.25 * t * std::exp(2 * F.lambda(n));
  }
  return {integrate_area(gn, lo, hi), integrate_area(hh, lo, hi)};
}

struct DeltaProfile {
  std::vector<double> r, delta;
  double integral = 0.0;  // ∫δ² dr/r over the sampled radii
};

// δ(r) = r · max_θ |∇n| per grid circle.
inline DeltaProfile delta_profile(const CurvatureField& C) {
  const PolarGrid& g = C.H.grid;
  DeltaProfile P;
  RField d2(g, 1);
  for (int i = 0; i < g.n_r; ++i) {
    double mx = 0;
    for (int j = 0; j < g.n_theta; ++j) mx = std::max(mx, grad_n_sq(C, g.idx(i, j)));
    P.r.push_back(g.r(i));
    P.delta.push_back(g.r(i) * std::sqrt(mx));
  }
  const auto w = radial_weights(0, g.n_r - 1, g.ds());
  for (int i = 0; i < g.n_r; ++i) P.integral += w[i] * P.delta[i] * P.delta[i];
  return P;
}

}  // namespace willmore
