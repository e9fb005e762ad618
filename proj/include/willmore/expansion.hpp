#pragma once
#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>

#include "willmore/curvature.hpp"
#include "willmore/residues.hpp"

namespace willmore {

// ε-loss slack on every measured decay exponent.
inline constexpr double kExponentSlack = 0.1;

struct DecayExponent {
  double value = std::numeric_limits<double>::quiet_NaN();
  double ci = 0.0;          // ±2 standard errors of the log-log slope
  double raw = std::numeric_limits<double>::quiet_NaN();  // plain slope, no log factor removed
  int log_power = 0;        // k in |remainder| ~ r^value |log r|^k
  bool at_floor = false;    // remainder indistinguishable from roundoff
  double relative = 0.0;    // max over the window of |remainder| / |field| circle norms
  std::vector<double> radii, norms;
  bool satisfies(double predicted) const { return at_floor || value >= predicted - kExponentSlack; }
};

struct ExpansionFit {
  int theta0 = 1;
  int a = 0;
  CVec A;
  std::vector<CVec> B;  // B_1 … B_{θ₀−a}
  CVec C_theta_a;
  std::vector<double> C;  // coefficient of −|z|^{2θ₀}(θ₀ log|z| − 1)
  std::vector<double> origin;  // Φ(0), a translation fitted alongside mode 0
  DecayExponent xi;
  double fit_residual = 0.0;  // relative size of the remainder on the window
  double condition = 0.0;
  int window_lo = 0, window_hi = 0;
  double predicted_exponent() const { return 2.0 * theta0 - a + 1; }
};

struct HFit {
  int theta0 = 1;
  int a = 0;
  CVec E;                       // E_a
  std::vector<double> gamma0;   // fitted log coefficient, for cross-checks only
  DecayExponent eta;
  double fit_residual = 0.0;  // relative size of the remainder on the window
  double condition = 0.0;
  double predicted_exponent() const { return 1.0 - a; }
};

// Inner third of the interior radii.
inline std::pair<int, int> expansion_window(const PolarGrid& g) {
  const auto [lo, hi] = g.interior_range();
  return {lo, lo + std::max(8, (hi - lo) / 3)};
}

namespace detail {

// e^{ikθ} coefficient of component c on circle i.
inline cdouble circle_mode(const RField& f, int i, int c, int k) {
  const auto& g = f.grid;
  cdouble s = 0;
  for (int j = 0; j < g.n_theta; ++j) s += f(g.idx(i, j), c) * std::polar(1.0, -k * g.theta(j));
  return s / static_cast<double>(g.n_theta);
}

using Radial = std::function<double(double)>;

struct ModeFit {
  std::vector<cdouble> coef;
  double residual = 0.0;
  double condition = 0.0;
};

// Weighted radial least squares of one Fourier mode; weight(r) multiplies each row.
inline ModeFit fit_mode(const RField& f, int c, int k, int lo, int hi, const std::vector<Radial>& cols, const Radial& weight) {
  const auto& g = f.grid;
  const int n = hi - lo, p = static_cast<int>(cols.size());
  Eigen::MatrixXd M(n, p);
  Eigen::MatrixXd y(n, 2);
  for (int i = lo; i < hi; ++i) {
    const double r = g.r(i), w = weight(r);
    for (int q = 0; q < p; ++q) M(i - lo, q) = w * cols[q](r);
    const cdouble v = circle_mode(f, i, c, k);
    y(i - lo, 0) = w * v.real();
    y(i - lo, 1) = w * v.imag();
  }
  Eigen::VectorXd scale = M.colwise().norm().transpose();
  for (int q = 0; q < p; ++q)
    if (scale(q) == 0) scale(q) = 1;
  const Eigen::MatrixXd Ms = M * scale.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Ms, Eigen::ComputeThinU | Eigen::ComputeThinV);
  ModeFit out;
  const auto& sv = svd.singularValues();
  out.condition = sv(p - 1) > 0 ? sv(0) / sv(p - 1) : std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd x = svd.solve(y);
  out.coef.resize(p);
  for (int q = 0; q < p; ++q) out.coef[q] = cdouble(x(q, 0), x(q, 1)) / scale(q);
  const double ny = y.norm();
  out.residual = ny > 0 ? (Ms * x - y).norm() / ny : 0.0;
  return out;
}

inline std::vector<Radial> powers(int from, int count) {
  std::vector<Radial> cols;
  for (int q = from; q < from + count; ++q) cols.push_back([q](double r) { return std::pow(r, q); });
  return cols;
}

// Slope of log(circle max-norm of the remainder) against log r, modulo a logarithmic factor:
// norms are divided by |log r|^k for the k in {0,1,2} that makes the profile most linear
// (k = 0 unless another k at least halves the misfit).
inline DecayExponent decay_exponent(const RField& rem, const RField& ref, int lo, int hi) {
  const auto& g = rem.grid;
  DecayExponent e;
  std::vector<double> x, y;
  for (int i = lo; i < hi; ++i) {
    double nr = 0, nf = 0;
    for (int j = 0; j < g.n_theta; ++j) {
      const std::size_t idx = g.idx(i, j);
      double sr = 0, sf = 0;
      for (int c = 0; c < rem.ncomp; ++c) {
        sr += rem(idx, c) * rem(idx, c);
        sf += ref(idx, c) * ref(idx, c);
      }
      nr = std::max(nr, std::sqrt(sr));
      nf = std::max(nf, std::sqrt(sf));
    }
    e.radii.push_back(g.r(i));
    e.norms.push_back(nr);
    if (nf > 0) e.relative = std::max(e.relative, nr / nf);
    if (nr > 1e-12 * nf && nr > 1e-280) {
      x.push_back(std::log(g.r(i)));
      y.push_back(std::log(nr));
    }
  }
  if (x.size() < 4) {
    e.at_floor = true;
    return e;
  }
  const double n = static_cast<double>(x.size());
  auto line = [&](int k, double& slope, double& ci) {
    std::vector<double> yk(y);
    for (std::size_t i = 0; i < x.size(); ++i) yk[i] -= k * std::log(std::abs(x[i]));
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += yk[i] / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sxx += (x[i] - mx) * (x[i] - mx), sxy += (x[i] - mx) * (yk[i] - my);
    slope = sxy / sxx;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) ss += std::pow(yk[i] - my - slope * (x[i] - mx), 2);
    ci = n > 2 ? 2.0 * std::sqrt(ss / (n - 2) / sxx) : 0.0;
    return std::sqrt(ss / n);
  };
  double misfit = line(0, e.value, e.ci);
  e.raw = e.value;
  for (int k = 1; k <= 2; ++k) {
    double sl, ci;
    const double mk = line(k, sl, ci);
    if (mk < 0.5 * misfit) {
      misfit = mk;
      e.value = sl;
      e.ci = ci;
      e.log_power = k;
    }
  }
  return e;
}

inline constexpr int kNuisance = 3;

// Products of logarithmic terms put r^q log r and r^q log² r into the remainder.
inline std::vector<Radial> log_powers(int from, int count) {
  std::vector<Radial> cols;
  for (int q = from; q < from + count; ++q) {
    cols.push_back([q](double r) { return std::pow(r, q) * std::log(r); });
    cols.push_back([q](double r) { return std::pow(r, q) * std::log(r) * std::log(r); });
  }
  return cols;
}

}  // namespace detail

// Φ = Re(A z^{θ₀} + Σ B_j z^{θ₀+j} + C_{θ₀−a}|z|^{2θ₀}z^{−a}) − C|z|^{2θ₀}(θ₀ log|z| − 1) + ξ, fitted mode by mode:
// each template term owns one angular mode; ξ = O(r^{2θ₀−a+1}) enters as nuisance powers.
inline ExpansionFit fit_phi(const RField& phi, int theta0, int a) {
  if (a < 0 || a >= theta0) throw std::invalid_argument("fit_phi: need 0 <= a <= theta0-1");
  const auto& g = phi.grid;
  const int m = phi.ncomp, n = theta0;
  const int rem0 = 2 * n - a + 1;
  const auto [lo, hi] = expansion_window(g);
  ExpansionFit F;
  F.theta0 = n;
  F.a = a;
  F.window_lo = lo;
  F.window_hi = hi;
  F.A.assign(m, 0.0);
  F.B.assign(n - a, CVec(m, 0.0));
  F.C_theta_a.assign(m, 0.0);
  F.C.assign(m, 0.0);
  F.origin.assign(m, 0.0);
  auto note = [&](const detail::ModeFit& mf) {
    F.condition = std::max(F.condition, mf.condition);
  };
  auto log_col = [n](double r) { return -std::pow(r, 2 * n) * (n * std::log(r) - 1); };
  for (int c = 0; c < m; ++c) {
    for (int j = 0; j <= n - a; ++j) {
      const int p = n + j;
      auto cols = detail::powers(p, 1);
      auto extra = detail::powers(std::max(p + 1, rem0), detail::kNuisance);
      cols.insert(cols.end(), extra.begin(), extra.end());
      // Roundoff in Φ scales like r^{θ₀}, so r^{−θ₀} rows carry uniform noise.
      const auto mf = detail::fit_mode(phi, c, p, lo, hi, cols, [n](double r) { return std::pow(r, -n); });
      note(mf);
      (j == 0 ? F.A[c] : F.B[j - 1][c]) = 2.0 * mf.coef[0];
    }
    if (a >= 1) {
      const int p = 2 * n - a;
      auto cols = detail::powers(p, 1);
      auto extra = detail::powers(rem0, detail::kNuisance);
      auto logs = detail::log_powers(rem0 + 1, 1);
      cols.insert(cols.end(), extra.begin(), extra.end());
      cols.insert(cols.end(), logs.begin(), logs.end());
      const auto mf = detail::fit_mode(phi, c, a, lo, hi, cols, [p](double r) { return std::pow(r, -p); });
      note(mf);
      F.C_theta_a[c] = 2.0 * std::conj(mf.coef[0]);
      // Mode 0: the logarithmic term sits below a remainder of the same order; an r^{2θ₀} column absorbs ξ there.
      std::vector<detail::Radial> cols0{log_col};
      auto extra0 = detail::powers(std::min(2 * n, rem0), detail::kNuisance + 1);
      auto logs0 = detail::log_powers(2 * n + 2, 1);
      cols0.insert(cols0.end(), extra0.begin(), extra0.end());
      cols0.insert(cols0.end(), logs0.begin(), logs0.end());
      cols0.push_back([](double) { return 1.0; });
      const auto m0 = detail::fit_mode(phi, c, 0, lo, hi, cols0, [n](double r) { return std::pow(r, -2 * n); });
      note(m0);
      F.C[c] = m0.coef[0].real();
      F.origin[c] = m0.coef.back().real();
    } else {
      // a = 0: Re C_{θ₀} r^{2θ₀} merges with the "+C r^{2θ₀}" part of the logarithmic term.
      std::vector<detail::Radial> cols0{log_col};
      auto extra0 = detail::powers(2 * n, 1);
      auto extra1 = detail::powers(rem0, detail::kNuisance);
      cols0.insert(cols0.end(), extra0.begin(), extra0.end());
      auto logs0 = detail::log_powers(2 * n + 2, 1);
      cols0.insert(cols0.end(), extra1.begin(), extra1.end());
      cols0.insert(cols0.end(), logs0.begin(), logs0.end());
      cols0.push_back([](double) { return 1.0; });
      const auto m0 = detail::fit_mode(phi, c, 0, lo, hi, cols0, [n](double r) { return std::pow(r, -2 * n); });
      note(m0);
      F.C[c] = m0.coef[0].real();
      F.C_theta_a[c] = m0.coef[1].real();
      F.origin[c] = m0.coef.back().real();
    }
  }
  RField xi(g, m);
  for (int i = lo; i < hi; ++i) {
    const double r = g.r(i);
    for (int jt = 0; jt < g.n_theta; ++jt) {
      const cdouble z = std::polar(r, g.theta(jt));
      const std::size_t idx = g.idx(i, jt);
      for (int c = 0; c < m; ++c) {
        cdouble t = F.A[c] * std::pow(z, n);
        for (int j = 1; j <= n - a; ++j) t += F.B[j - 1][c] * std::pow(z, n + j);
        t += F.C_theta_a[c] * std::pow(r, 2 * n) * std::pow(z, -a);
        xi(idx, c) = phi(idx, c) - F.origin[c] - t.real() - F.C[c] * log_col(r);
      }
    }
  }
  F.xi = detail::decay_exponent(xi, phi, lo, hi);
  F.fit_residual = F.xi.relative;
  return F;
}

inline ExpansionFit fit_phi(const RField& phi, const ResidueReport& R) { return fit_phi(phi, R.theta0, R.gamma.a); }

// H = Re(E_a z^{−a}) − γ₀ log|z| + η with η = O(r^{1−a}); γ₀ is refitted only as a cross-check, η uses the supplied γ₀.
inline HFit fit_H(const RField& H, int theta0, int a, const std::vector<double>& gamma0) {
  if (a < 0 || a >= theta0) throw std::invalid_argument("fit_H: pole order a must satisfy 0 <= a <= theta0-1");
  const auto& g = H.grid;
  const int m = H.ncomp;
  const auto [lo, hi] = expansion_window(g);
  HFit F;
  F.theta0 = theta0;
  F.a = a;
  F.E.assign(m, 0.0);
  F.gamma0.assign(m, 0.0);
  auto note = [&](const detail::ModeFit& mf) {
    F.condition = std::max(F.condition, mf.condition);
  };
  const int q0 = std::min(0, 1 - a);
  for (int c = 0; c < m; ++c) {
    std::vector<detail::Radial> cols0{[](double r) { return -std::log(r); }};
    auto extra0 = detail::powers(q0, std::max(0, 1 - a) - q0 + detail::kNuisance + 1);
    cols0.insert(cols0.end(), extra0.begin(), extra0.end());
    const auto m0 = detail::fit_mode(H, c, 0, lo, hi, cols0, [q0](double r) { return std::pow(r, -q0); });
    note(m0);
    F.gamma0[c] = m0.coef[0].real();
    if (a == 0) {
      F.E[c] = m0.coef[1].real();
    } else {
      auto cols = detail::powers(-a, detail::kNuisance + 1);
      const auto mf = detail::fit_mode(H, c, a, lo, hi, cols, [a](double r) { return std::pow(r, a); });
      note(mf);
      F.E[c] = 2.0 * std::conj(mf.coef[0]);
    }
  }
  RField eta(g, m);
  for (int i = lo; i < hi; ++i) {
    const double r = g.r(i);
    for (int jt = 0; jt < g.n_theta; ++jt) {
      const cdouble zma = std::pow(std::polar(r, g.theta(jt)), -a);
      const std::size_t idx = g.idx(i, jt);
      for (int c = 0; c < m; ++c) eta(idx, c) = H(idx, c) - (F.E[c] * zma).real() + gamma0[c] * std::log(r);
    }
  }
  F.eta = detail::decay_exponent(eta, H, lo, hi);
  F.fit_residual = F.eta.relative;
  return F;
}

inline HFit fit_H(const CurvatureField& C, const ResidueReport& R) { return fit_H(C.H, R.theta0, R.gamma.a, R.gamma0); }

struct ConstantDefects {
  double C = 0.0;                 // |C_vec − e^{2u0}γ₀/(2θ₀³)|
  double C_theta0_squared = 0.0;  // same against the /(2θ₀²) variant, for the record
  double C_parallel = 0.0;        // component of C_vec orthogonal to γ₀, relative
  double C_theta_a = 0.0;         // |C_{θ₀−a} − e^{2u0}E_a/(2θ₀(θ₀−a))|
  bool C_theta_a_skipped = false;
};

inline ConstantDefects verify_constants(const ExpansionFit& F, const HFit& Hf, const std::vector<double>& gamma0, double u0) {
  ConstantDefects d;
  const double e2u = std::exp(2 * u0);
  const int n = F.theta0;
  double gg = 0, cg = 0, cc = 0;
  for (std::size_t c = 0; c < F.C.size(); ++c) {
    d.C = std::max(d.C, std::abs(F.C[c] - e2u / (2.0 * n * n * n) * gamma0[c]));
    d.C_theta0_squared = std::max(d.C_theta0_squared, std::abs(F.C[c] - e2u / (2.0 * n * n) * gamma0[c]));
    gg += gamma0[c] * gamma0[c];
    cg += F.C[c] * gamma0[c];
    cc += F.C[c] * F.C[c];
  }
  if (gg > 0 && cc > 0) d.C_parallel = std::sqrt(std::max(0.0, cc - cg * cg / gg) / cc);
  d.C_theta_a_skipped = F.a == 0;
  if (!d.C_theta_a_skipped)
    for (std::size_t c = 0; c < F.C_theta_a.size(); ++c)
      d.C_theta_a = std::max(d.C_theta_a, std::abs(F.C_theta_a[c] - e2u / (2.0 * n * (n - F.a)) * Hf.E[c]));
  return d;
}

inline ConstantDefects verify_constants(const ExpansionFit& F, const HFit& Hf, const ResidueReport& R) {
  return verify_constants(F, Hf, R.gamma0, R.u0);
}

}  // namespace willmore
