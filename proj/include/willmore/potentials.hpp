#pragma once

#include <map>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "willmore/residues.hpp"

namespace willmore {

// Δu = rhs on the grid annulus with u = 0 on the outer circle and, per angular mode k, the
// bounded-extension condition ∂_s û_k − |k| û_k = r_min^{−|k|} ∫₀^{r_min} ρ^{1+|k|} rhs_k dρ on the inner circle.
// That inner integral is supplied for the mean mode by `inner_mass` (per component) and taken as 0 for k ≠ 0.
// Each mode is a two-point problem û'' − k²û = e^{2s} rhs_k in s = log r.
inline RField solve_poisson(const RField& rhs, int fd_order = 6, const std::vector<double>& inner_mass = {}) {
  const PolarGrid& g = rhs.grid;
  const int N = g.n_theta, nr = g.n_r, nc = rhs.ncomp;
  const double h = g.ds();
  const auto s1 = line_stencils(nr, h, 1, fd_order), s2 = line_stencils(nr, h, 2, fd_order);

  std::map<int, Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu;
  auto factor = [&](int k) -> Eigen::SparseLU<Eigen::SparseMatrix<double>>& {
    auto it = lu.find(k);
    if (it != lu.end()) return it->second;
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t q = 0; q < s1[0].w.size(); ++q) t.emplace_back(0, s1[0].start + q, s1[0].w[q]);
    t.emplace_back(0, 0, -static_cast<double>(k));
    for (int i = 1; i + 1 < nr; ++i) {
      for (std::size_t q = 0; q < s2[i].w.size(); ++q) t.emplace_back(i, s2[i].start + q, s2[i].w[q]);
      t.emplace_back(i, i, -static_cast<double>(k) * k);
    }
    t.emplace_back(nr - 1, nr - 1, 1.0);
    Eigen::SparseMatrix<double> M(nr, nr);
    M.setFromTriplets(t.begin(), t.end());
    auto& solver = lu[k];
    solver.compute(M);
    if (solver.info() != Eigen::Success) throw std::runtime_error("poisson: singular radial system for mode " + std::to_string(k));
    return solver;
  };

  Eigen::FFT<double> fft;
  std::vector<cdouble> in(N), spec(N), back(N);
  // spectra[c][q] holds the radial profile of mode q.
  std::vector<std::vector<Eigen::VectorXcd>> spectra(nc, std::vector<Eigen::VectorXcd>(N, Eigen::VectorXcd::Zero(nr)));
  for (int c = 0; c < nc; ++c)
    for (int i = 0; i < nr; ++i) {
      for (int j = 0; j < N; ++j) in[j] = rhs(g.idx(i, j), c);
      fft.fwd(spec, in);
      const double w = g.r(i) * g.r(i);
      for (int q = 0; q < N; ++q) spectra[c][q](i) = w * spec[q];
    }
  RField u(g, nc);
  for (int c = 0; c < nc; ++c) {
    for (int q = 0; q < N; ++q) {
      Eigen::VectorXcd& b = spectra[c][q];
      b(0) = q == 0 && !inner_mass.empty() ? cdouble(N * inner_mass[c]) : cdouble(0.0);
      b(nr - 1) = 0.0;
      auto& solver = factor(std::abs(q <= N / 2 ? q : q - N));
      const Eigen::VectorXd re = solver.solve(b.real().eval()), im = solver.solve(b.imag().eval());
      b.real() = re;
      b.imag() = im;
    }
    for (int i = 0; i < nr; ++i) {
      for (int q = 0; q < N; ++q) spec[q] = spectra[c][q](i);
      fft.inv(back, spec);
      for (int j = 0; j < N; ++j) u(g.idx(i, j), c) = back[j].real();
    }
  }
  return u;
}

struct AuxiliaryPotentials {
  RField g, G;            // scalar and grade-2 fields
  RField rhs_g, rhs_G;    // ∇Γ·∇Φ and ∇Γ∧∇Φ with Γ = 2β₀ log|x|
  double g_residual = 0;  // ‖Δg − rhs_g‖ on the interior annulus
  double G_residual = 0;
};

namespace detail {

// Curl fields of S and R without the g, G contributions: L·∇⊥Φ and L∧∇⊥Φ − 2H∧∇Φ.
inline void sr_fields(const RField& L, const Jets& J, const RField& H, std::size_t n, double* s1, double* s2, double* r1, double* r2) {
  const int m = L.ncomp;
  const auto l = node_vec(L, n), p1 = node_vec(J.d1, n), p2 = node_vec(J.d2, n), h = node_vec(H, n);
  *s1 = -inner(l, p2);
  *s2 = inner(l, p1);
  const auto a = wedge(l, p2) * -1.0 - wedge(h, p1) * 2.0, b = wedge(l, p1) - wedge(h, p2) * 2.0;
  for (int k = 0; k < binomial(m, 2); ++k) {
    r1[k] = a[k];
    r2[k] = b[k];
  }
}

}  // namespace detail

// Δg = ∇Γ·∇Φ, ΔG = ∇Γ∧∇Φ with Γ = 2β₀ log|x|, zero on the outer circle, bounded through the origin.
// Boundedness of the mean mode is equivalent to zero total flux of the S and R curl fields at the origin,
// so the inner mean-mode flux of ∇g, ∇G is matched to that of L·∇⊥Φ and L∧∇⊥Φ − 2H∧∇Φ on the inner circle.
inline AuxiliaryPotentials solve_gG(const std::vector<double>& beta0, const RField& L, const RField& H, const Jets& J, const Differentiator& D) {
  const PolarGrid& g = D.grid();
  const int m = J.d1.ncomp, m2 = binomial(m, 2);
  if (static_cast<int>(beta0.size()) != m) throw std::invalid_argument("beta0 length must equal ambient dimension");
  AuxiliaryPotentials P{RField(g, 1), RField(g, m2), RField(g, 1), RField(g, m2)};
  const auto b = MultiVec<double>::vector(m, beta0.begin());
  std::vector<double> ds(m);
  RField s1(g, 1), s2(g, 1), r1(g, m2), r2(g, m2);
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      const std::size_t n = g.idx(i, j);
      const double r = g.r(i), c = std::cos(g.theta(j)), s = std::sin(g.theta(j));
      // ∇Γ = 2β₀ x/|x|², so ∇Γ ⊙ ∇Φ = 2β₀ ⊙ ∂_rΦ / r.
      for (int k = 0; k < m; ++k) ds[k] = (c * J.d1(n, k) + s * J.d2(n, k)) * 2.0 / r;
      const auto d = MultiVec<double>::vector(m, ds.begin());
      P.rhs_g(n) = inner(b, d);
      store(P.rhs_G, n, wedge(b, d));
      if (i == 0) detail::sr_fields(L, J, H, n, s1.at(n), s2.at(n), r1.at(n), r2.at(n));
    }
  // circulation() returns (1/4π)∮ν·V; the mean-mode datum is ∂_s ḡ = (1/2π)∮ν·∇g.
  auto mass = [](std::vector<double> c) {
    for (auto& v : c) v *= 2.0;
    return c;
  };
  P.g = solve_poisson(P.rhs_g, D.order(), mass(circulation(s1, s2, 0)));
  P.G = solve_poisson(P.rhs_G, D.order(), mass(circulation(r1, r2, 0)));
  const auto [lo, hi] = g.interior_range();
  P.g_residual = annulus_norm(D.laplacian(P.g) - P.rhs_g, lo, hi);
  P.G_residual = annulus_norm(D.laplacian(P.G) - P.rhs_G, lo, hi);
  return P;
}

struct PotentialsSR {
  RField S, R;
  double S_defect = 0, R_defect = 0;  // curl-potential loop and consistency defects
};

// ∇⊥S = L·∇⊥Φ − ∇g and ∇⊥R = L∧∇⊥Φ − 2H∧∇Φ − ∇G, with ∇⊥ = (−∂₂, ∂₁).
inline PotentialsSR potentials_SR(const RField& L, const Jets& J, const CurvatureField& C, const AuxiliaryPotentials& aux,
                                  const Differentiator& D) {
  const PolarGrid& g = D.grid();
  const int m = C.m, m2 = binomial(m, 2);
  auto [g1, g2] = D.grad(aux.g);
  auto [G1, G2] = D.grad(aux.G);
  RField s1(g, 1), s2(g, 1), r1(g, m2), r2(g, m2);
  for (std::size_t n = 0; n < g.nodes(); ++n) {
    detail::sr_fields(L, J, C.H, n, s1.at(n), s2.at(n), r1.at(n), r2.at(n));
    s1(n) -= g1(n);
    s2(n) -= g2(n);
    for (int k = 0; k < m2; ++k) {
      r1(n, k) -= G1(n, k);
      r2(n, k) -= G2(n, k);
    }
  }
  const CurlPotential S = curl_potential(s1, s2, D), R = curl_potential(r1, r2, D);
  return {S.P, R.P, S.defect(), R.defect()};
}

struct SystemResiduals {
  double S_equation = 0;  // ‖−ΔS − ∇(⋆n)·∇⊥R − div((⋆n)·∇G)‖
  double R_equation = 0;  // ‖−ΔR − ∇(⋆n)•∇⊥R + ∇(⋆n)·∇⊥S − div((⋆n)•∇G − ⋆n∇g)‖
  double phi_identity = 0;  // ‖−2ΔΦ − (∇S−∇⊥g)·∇⊥Φ + (∇R−∇⊥G)•∇⊥Φ‖
  // Largest term norm per equation, products measured before cancellation; residuals are only resolvable relative to these.
  double S_scale = 0, R_scale = 0, phi_scale = 0;
};

inline SystemResiduals verify_system(const PotentialsSR& SR, const AuxiliaryPotentials& aux, const FrameField& F, const Jets& J,
                                     const Differentiator& D, int lo, int hi) {
  const PolarGrid& g = D.grid();
  const int m = F.m, m2 = binomial(m, 2);
  using MV = MultiVec<double>;
  // The system and the Φ identity hold with the contraction of opposite orientation, (a∧b)•c = (b·c)a − (a·c)b,
  // which is −contract_bullet at every grade (each term of the recursion carries one base contraction).
  auto bul = [](const MV& a, const MV& b) { return contract_bullet(a, b) * -1.0; };
  RField sn(g, m2);
  for (std::size_t n = 0; n < g.nodes(); ++n) store(sn, n, hodge_star(node_mv(F.n, n, m, m - 2)));
  auto [n1, n2] = D.grad(sn);
  auto [S1, S2] = D.grad(SR.S);
  auto [R1, R2] = D.grad(SR.R);
  auto [g1, g2] = D.grad(aux.g);
  auto [G1, G2] = D.grad(aux.G);
  const RField lapS = D.laplacian(SR.S), lapR = D.laplacian(SR.R);

  RField resS(g, 1), resR(g, m2), resP(g, m);
  RField fS1(g, 1), fS2(g, 1), fR1(g, m2), fR2(g, m2);
  RField tS(g, 1), tR(g, 1), tP(g, m);
  for (std::size_t n = 0; n < g.nodes(); ++n) {
    const MV N = node_mv(sn, n, m, 2), N1 = node_mv(n1, n, m, 2), N2 = node_mv(n2, n, m, 2);
    const MV dR1 = node_mv(R1, n, m, 2), dR2 = node_mv(R2, n, m, 2);
    const MV dG1 = node_mv(G1, n, m, 2), dG2 = node_mv(G2, n, m, 2);
    // ∇a ⊙ ∇⊥b = −∂₁a ⊙ ∂₂b + ∂₂a ⊙ ∂₁b.
    auto len = [](const MV& v) { return std::sqrt(inner(v, v)); };
    tS(n) = len(N1) * len(dR2) + len(N2) * len(dR1);
    resS(n) = -lapS(n) - (-inner(N1, dR2) + inner(N2, dR1));
    fS1(n) = inner(N, dG1);
    fS2(n) = inner(N, dG2);
    const MV bullet = bul(N2, dR1) - bul(N1, dR2);
    const MV dotS = N2 * S1(n) - N1 * S2(n);
    tR(n) = tS(n) + len(N2) * std::abs(S1(n)) + len(N1) * std::abs(S2(n));
    store(resR, n, node_mv(lapR, n, m, 2) * -1.0 - bullet + dotS);
    // The ⋆n∇g term enters with a minus sign; with + the equation fails on any surface with β₀ ≠ 0.
    store(fR1, n, bul(N, dG1) - N * g1(n));
    store(fR2, n, bul(N, dG2) - N * g2(n));

    const MV p1 = node_vec(J.d1, n), p2 = node_vec(J.d2, n);
    // V = ∇S − ∇⊥g, W = ∇R − ∇⊥G.
    const double v1 = S1(n) + g2(n), v2 = S2(n) - g1(n);
    const MV w1 = dR1 + dG2, w2 = dR2 - dG1;
    const MV rhs = (p1 * v2 - p2 * v1) - (bul(w2, p1) - bul(w1, p2));
    store(tP, n, rhs);
    for (int c = 0; c < m; ++c) resP(n, c) = -2.0 * (J.d11(n, c) + J.d22(n, c)) - rhs[c];
  }
  const RField divS = D.divergence(fS1, fS2), divR = D.divergence(fR1, fR2);
  resS -= divS;
  resR -= divR;
  RField lapPhi(g, m);
  for (std::size_t n = 0; n < g.nodes(); ++n)
    for (int c = 0; c < m; ++c) lapPhi(n, c) = 2.0 * (J.d11(n, c) + J.d22(n, c));
  auto big = [&](std::initializer_list<const RField*> fs) {
    double s = 0;
    for (const RField* f : fs) s = std::max(s, annulus_norm(*f, lo, hi));
    return s;
  };
  return {annulus_norm(resS, lo, hi), annulus_norm(resR, lo, hi), annulus_norm(resP, lo, hi),
          big({&lapS, &tS, &divS}), big({&lapR, &tR, &divR}), big({&lapPhi, &tP})};
}

}  // namespace willmore
