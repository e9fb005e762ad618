#pragma once

#include <numeric>

#include "willmore/willmore_residual.hpp"

namespace willmore {

template <class T>
T circle_mean(const Field<T>& f, int i, int c = 0) {
  const PolarGrid& g = f.grid;
  T s{};
  for (int j = 0; j < g.n_theta; ++j) s += f(g.idx(i, j), c);
  return s / static_cast<double>(g.n_theta);
}

// Value at r = 0 of a least-squares polynomial in r through (r_i, y_i).
template <class T>
T extrapolate_to_zero(const std::vector<double>& r, const std::vector<T>& y, int degree = 3) {
  const int n = static_cast<int>(r.size());
  degree = std::min(degree, n - 1);
  const double scale = *std::max_element(r.begin(), r.end());
  Eigen::MatrixXd V(n, degree + 1);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d <= degree; ++d) V(i, d) = std::pow(r[i] / scale, d);
  const auto qr = V.colPivHouseholderQr();
  Eigen::VectorXd re(n), im(n);
  for (int i = 0; i < n; ++i) {
    re(i) = std::real(cdouble(y[i]));
    im(i) = std::imag(cdouble(y[i]));
  }
  const double a = qr.solve(re)(0);
  if constexpr (std::is_same_v<T, double>)
    return a;
  else
    return T(a, qr.solve(im)(0));
}

// Radial index window used for limits r → 0: the innermost quarter past the stencil boundary layer.
inline std::pair<int, int> inner_window(const PolarGrid& g) {
  const int lo = g.interior_range().first;
  return {lo, std::min(g.n_r - 1, lo + std::max(4, g.n_r / 4))};
}

struct BranchOrder {
  int theta0 = 1;
  double slope = 0.0;
  RField u;
  double u0 = 0.0;
};

constexpr double kIntegerGate = 0.2;

inline BranchOrder branch_order(const FrameField& F) {
  const PolarGrid& g = F.lambda.grid;
  auto [lo, hi] = inner_window(g);
  // Least-squares slope of circle-mean λ against s over the window (≥ 4 dyadic annuli when the grid allows).
  double ms = 0, ml = 0;
  const int n = hi - lo + 1;
  for (int i = lo; i <= hi; ++i) {
    ms += g.s(i);
    ml += circle_mean(F.lambda, i);
  }
  ms /= n;
  ml /= n;
  double num = 0, den = 0;
  for (int i = lo; i <= hi; ++i) {
    num += (g.s(i) - ms) * (circle_mean(F.lambda, i) - ml);
    den += (g.s(i) - ms) * (g.s(i) - ms);
  }
  BranchOrder B;
  B.slope = num / den;
  const double rounded = std::round(B.slope);
  if (std::abs(B.slope - rounded) > kIntegerGate)
    throw std::domain_error("branch order: slope " + std::to_string(B.slope) + " is not near an integer");
  B.theta0 = 1 + static_cast<int>(rounded);
  if (B.theta0 < 1) throw std::domain_error("branch order: negative slope (pole, not a branch point)");
  B.u = F.lambda;
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < g.n_theta; ++j) B.u(g.idx(i, j)) -= (B.theta0 - 1) * g.s(i);
  std::vector<double> r, y;
  for (int i = lo; i <= hi; ++i) {
    r.push_back(g.r(i));
    y.push_back(circle_mean(B.u, i));
  }
  B.u0 = extrapolate_to_zero(r, y);
  return B;
}

struct TangentVector {
  CVec A;
  double isotropy_defect = 0.0;  // |A·A| / |A|²
  double normal_defect = 0.0;    // max over the innermost window circle of |π_n A| / |A|
};

// A = (2/θ₀) lim circle-mean(z^{1−θ₀} ∂_zΦ).
inline TangentVector tangent_vector(const Jets& J, const FrameField& F, int theta0) {
  const PolarGrid& g = F.lambda.grid;
  const int m = F.m;
  auto [lo, hi] = inner_window(g);
  TangentVector T;
  T.A.assign(m, 0.0);
  std::vector<double> r;
  for (int i = lo; i <= hi; ++i) r.push_back(g.r(i));
  for (int c = 0; c < m; ++c) {
    std::vector<cdouble> y;
    for (int i = lo; i <= hi; ++i) {
      cdouble s = 0;
      for (int j = 0; j < g.n_theta; ++j) {
        const std::size_t n = g.idx(i, j);
        s += std::pow(std::polar(g.r(i), g.theta(j)), 1 - theta0) * dz_phi(J, n, c);
      }
      y.push_back(s / static_cast<double>(g.n_theta));
    }
    T.A[c] = 2.0 / theta0 * extrapolate_to_zero(r, y);
  }
  const double a2 = cnorm2(T.A);
  T.isotropy_defect = std::abs(cdot(T.A, T.A)) / a2;
  for (int j = 0; j < g.n_theta; ++j) {
    const std::size_t n = g.idx(lo, j);
    std::vector<double> re(m), im(m);
    for (int c = 0; c < m; ++c) {
      re[c] = T.A[c].real();
      im[c] = T.A[c].imag();
    }
    project_normal(F, n, re.data());
    project_normal(F, n, im.data());
    double s = 0;
    for (int c = 0; c < m; ++c) s += re[c] * re[c] + im[c] * im[c];
    T.normal_defect = std::max(T.normal_defect, std::sqrt(s / a2));
  }
  return T;
}

struct FirstResidue {
  std::vector<double> beta0;
  std::vector<std::vector<double>> per_circle;
  std::vector<double> radii;
  double rho_spread = 0.0;  // max pairwise deviation across circles
};

// (1/4π) ∮ ν·V r dθ on circle i.
inline std::vector<double> circulation(const RField& V1, const RField& V2, int i) {
  const PolarGrid& g = V1.grid;
  std::vector<double> b(V1.ncomp, 0.0);
  for (int j = 0; j < g.n_theta; ++j) {
    const std::size_t n = g.idx(i, j);
    const double c = std::cos(g.theta(j)), s = std::sin(g.theta(j));
    for (int k = 0; k < V1.ncomp; ++k) b[k] += c * V1(n, k) + s * V2(n, k);
  }
  for (auto& v : b) v *= g.r(i) * g.dtheta() / (4 * std::numbers::pi);
  return b;
}

// Five circles evenly spread over the interior annulus.
inline std::vector<int> default_circles(const PolarGrid& g, int count = 5) {
  auto [lo, hi] = g.interior_range();
  std::vector<int> idx;
  for (int k = 0; k < count; ++k) idx.push_back(lo + (hi - lo) * (k + 1) / (count + 1));
  return idx;
}

inline FirstResidue first_residue(const FluxField& X, const std::vector<int>& circles) {
  if (circles.size() < 3) throw std::invalid_argument("first residue needs at least 3 circles");
  const PolarGrid& g = X.raw1.grid;
  FirstResidue R;
  const int m = X.raw1.ncomp;
  R.beta0.assign(m, 0.0);
  for (int i : circles) {
    if (i <= 0 || i >= g.n_r - 1) throw std::invalid_argument("circles must lie strictly inside the grid");
    R.per_circle.push_back(circulation(X.raw1, X.raw2, i));
    R.radii.push_back(g.r(i));
    for (int k = 0; k < m; ++k) R.beta0[k] += R.per_circle.back()[k] / circles.size();
  }
  for (std::size_t a = 0; a < circles.size(); ++a)
    for (std::size_t b = a + 1; b < circles.size(); ++b) {
      double d = 0;
      for (int k = 0; k < m; ++k) d += std::pow(R.per_circle[a][k] - R.per_circle[b][k], 2);
      R.rho_spread = std::max(R.rho_spread, std::sqrt(d));
    }
  return R;
}

// γ₀ = β₀ + ½[μ = θ₀−2] θ₀ e^{−2u(0)} Re(a_μ A), with a_μ in the divergence-form convention.
inline std::vector<double> modified_residue(const std::vector<double>& beta0, int theta0, const MultiplierSpec& spec, const CVec& A, double u0) {
  std::vector<double> g = beta0;
  if (spec.zero || spec.mu != theta0 - 2) return g;
  const cdouble a = divergence_convention(spec).a_mu;
  for (std::size_t k = 0; k < g.size(); ++k) g[k] += 0.5 * theta0 * std::exp(-2 * u0) * (a * A[k]).real();
  return g;
}

struct CurlPotential {
  RField P;
  double circulation_defect = 0.0;  // max over circles of |∮ ∂_θP dθ|
  double consistency_defect = 0.0;  // max |∂_θP_reconstructed − ∂_θP_target|
  double defect() const { return std::max(circulation_defect, consistency_defect); }
};

// P with ∇⊥P = (V1, V2), i.e. ∂₁P = V2, ∂₂P = −V1, fixed to 0 at (r_max, θ = 0).
// Integrates spectrally along the outer circle, then radially inward with panel quadrature.
inline CurlPotential curl_potential(const RField& V1, const RField& V2, const Differentiator& D) {
  const PolarGrid& g = V1.grid;
  const int nc = V1.ncomp, N = g.n_theta;
  RField ps(g, nc), pt(g, nc);
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < N; ++j) {
      const std::size_t n = g.idx(i, j);
      const double r = g.r(i), c = std::cos(g.theta(j)), s = std::sin(g.theta(j));
      for (int k = 0; k < nc; ++k) {
        ps(n, k) = r * (c * V2(n, k) - s * V1(n, k));
        pt(n, k) = -r * (s * V2(n, k) + c * V1(n, k));
      }
    }
  CurlPotential out{RField(g, nc)};
  for (int i = 0; i < g.n_r; ++i)
    for (int k = 0; k < nc; ++k) out.circulation_defect = std::max(out.circulation_defect, std::abs(circle_mean(pt, i, k)) * 2 * std::numbers::pi);

  Eigen::FFT<double> fft;
  std::vector<cdouble> in(N), spec(N), back(N);
  const int outer = g.n_r - 1;
  for (int k = 0; k < nc; ++k) {
    for (int j = 0; j < N; ++j) in[j] = pt(g.idx(outer, j), k);
    fft.fwd(spec, in);
    for (int q = 0; q < N; ++q) {
      const int wave = q <= N / 2 ? q : q - N;
      spec[q] = (q == 0 || q == N / 2) ? cdouble(0) : spec[q] / cdouble(0, wave);
    }
    fft.inv(back, spec);
    for (int j = 0; j < N; ++j) out.P(g.idx(outer, j), k) = back[j].real() - back[0].real();
  }
  const auto panels = panel_stencils(g.n_r, g.ds());
  for (int i = outer - 1; i >= 0; --i) {
    const Stencil& st = panels[i];
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < nc; ++k) {
        double integral = 0;
        for (std::size_t q = 0; q < st.w.size(); ++q) integral += st.w[q] * ps(g.idx(st.start + static_cast<int>(q), j), k);
        out.P(g.idx(i, j), k) = out.P(g.idx(i + 1, j), k) - integral;
      }
  }
  const RField rec = D.d_theta(out.P);
  const auto [lo, hi] = g.interior_range();
  out.consistency_defect = annulus_norm(rec - pt, lo, hi);
  return out;
}

inline CurlPotential potential_L(const FluxField& X, const Differentiator& D) { return curl_potential(X.X1, X.X2, D); }

// W = (i/2)L + H + β₀ log|z| + ½F_μ.
inline CField w_field(const RField& L, const RField& H, const std::vector<double>& beta0, const CField* F_mu = nullptr) {
  const PolarGrid& g = L.grid;
  CField W(g, L.ncomp);
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      const std::size_t n = g.idx(i, j);
      for (int c = 0; c < L.ncomp; ++c) {
        W(n, c) = cdouble(H(n, c) + beta0[c] * g.s(i), 0.5 * L(n, c));
        if (F_mu) W(n, c) += 0.5 * (*F_mu)(n, c);
      }
    }
  return W;
}

// Total argument increment of f around circle i, in turns.
inline double winding(const CField& f, int i, int c) {
  const PolarGrid& g = f.grid;
  double total = 0, prev = std::arg(f(g.idx(i, 0), c));
  for (int j = 1; j <= g.n_theta; ++j) {
    const double cur = std::arg(f(g.idx(i, j % g.n_theta), c));
    double d = cur - prev;
    d -= 2 * std::numbers::pi * std::round(d / (2 * std::numbers::pi));
    total += d;
    prev = cur;
  }
  return total / (2 * std::numbers::pi);
}

struct SecondResidue {
  std::vector<int> gamma;       // pole order of E_j, never negative
  std::vector<int> zero_order;  // winding of a component whose E_j vanishes at 0 instead of blowing up
  std::vector<bool> degenerate;
  std::vector<std::vector<double>> raw;  // [component][circle] −winding before rounding
  std::vector<double> growth;            // log-log slope of circle-mean |W_j| on the window
  std::vector<double> radii;
  int a = 0;
  int dominance_circle = -1;  // radial index of the innermost consistent circle
  double max_raw_deviation = 0.0;
};

constexpr double kDegenerateFloor = 1e-8;
constexpr double kGrowthGate = 0.5;

// γ_j = −winding(W_j) on the innermost quartile, confirmed on two consecutive circles.
inline SecondResidue second_residue(const CField& W, double floor = kDegenerateFloor) {
  const PolarGrid& g = W.grid;
  const int m = W.ncomp;
  auto [lo, hi] = inner_window(g);
  SecondResidue S;
  S.gamma.assign(m, 0);
  S.degenerate.assign(m, false);
  S.raw.assign(m, {});
  for (int i = lo; i <= hi; ++i) S.radii.push_back(g.r(i));
  double scale = 0;
  std::vector<double> mean_abs(m, 0.0);
  for (int c = 0; c < m; ++c) {
    for (int j = 0; j < g.n_theta; ++j) mean_abs[c] += std::abs(W(g.idx(lo, j), c)) / g.n_theta;
    scale = std::max(scale, mean_abs[c]);
  }
  S.growth.assign(m, 0.0);
  for (int c = 0; c < m; ++c) {
    for (int i = lo; i <= hi; ++i) S.raw[c].push_back(-winding(W, i, c));
    S.degenerate[c] = mean_abs[c] <= floor * std::max(scale, 1.0);
    auto mean_at = [&](int i) {
      double a = 0;
      for (int j = 0; j < g.n_theta; ++j) a += std::abs(W(g.idx(i, j), c));
      return a / g.n_theta;
    };
    S.growth[c] = (std::log(mean_at(hi)) - std::log(mean_at(lo))) / (g.s(hi) - g.s(lo));
  }
  // Innermost pair of consecutive circles where every live component rounds consistently within the gate.
  for (int k = 0; k + 1 < static_cast<int>(S.radii.size()); ++k) {
    bool ok = true;
    for (int c = 0; c < m && ok; ++c) {
      if (S.degenerate[c]) continue;
      const double a = S.raw[c][k], b = S.raw[c][k + 1];
      ok = std::abs(a - std::round(a)) <= kIntegerGate && std::abs(b - std::round(b)) <= kIntegerGate && std::round(a) == std::round(b);
    }
    if (ok) {
      S.dominance_circle = lo + k;
      for (int c = 0; c < m; ++c) {
        if (S.degenerate[c]) continue;
        S.gamma[c] = static_cast<int>(std::round(S.raw[c][k]));
        S.max_raw_deviation = std::max({S.max_raw_deviation, std::abs(S.raw[c][k] - S.gamma[c]), std::abs(S.raw[c][k + 1] - S.gamma[c])});
      }
      break;
    }
  }
  if (S.dominance_circle < 0) throw std::domain_error("second residue: windings not within 0.2 of an integer on two consecutive circles");
  // A meromorphic term c z^{−γ} makes |W_j| scale like r^{−γ}; otherwise the remainder dominates and E_j vanishes there.
  for (int c = 0; c < m; ++c)
    if (!S.degenerate[c] && std::abs(S.growth[c] + S.gamma[c]) > kGrowthGate) {
      S.degenerate[c] = true;
      S.gamma[c] = 0;
    }
  // A zero of E_j has negative −winding; there is no pole, so γ_j = 0.
  S.zero_order.assign(m, 0);
  for (int c = 0; c < m; ++c)
    if (S.gamma[c] < 0) {
      S.zero_order[c] = -S.gamma[c];
      S.gamma[c] = 0;
    }
  S.a = *std::max_element(S.gamma.begin(), S.gamma.end());
  return S;
}

struct ResidueReport {
  int theta0 = 1;
  double slope = 0.0;
  double u0 = 0.0;
  TangentVector A;
  FirstResidue beta0;
  std::vector<double> gamma0;
  SecondResidue gamma;
  double L_defect = 0.0;
  std::vector<std::string> inconsistencies;
};

// Admissible pole-order range max{0, θ₀−μ−2} ≤ a ≤ θ₀−1; f ≡ 0 imposes no lower bound beyond 0.
inline void check_range(ResidueReport& R, const MultiplierSpec& spec) {
  const int lower = spec.zero ? 0 : std::max(0, R.theta0 - spec.mu - 2);
  if (R.gamma.a < lower || R.gamma.a > R.theta0 - 1)
    R.inconsistencies.push_back("pole order a = " + std::to_string(R.gamma.a) + " outside [" + std::to_string(lower) + ", " + std::to_string(R.theta0 - 1) + "]");
}

}  // namespace willmore
