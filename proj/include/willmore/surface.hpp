#pragma once

#include <Eigen/Core>
#include <unsupported/Eigen/AutoDiff>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "willmore/grid.hpp"
#include "willmore/multivec.hpp"

namespace willmore {

using CVec = std::vector<cdouble>;

struct SurfaceSpec {
  std::string name;
  int ambient_dim = 3;
  PolarGrid grid;
  std::map<std::string, double> scalars;
  std::map<std::string, CVec> vectors;

  double scalar(const std::string& key, double fallback) const {
    auto it = scalars.find(key);
    return it == scalars.end() ? fallback : it->second;
  }
};

// Exact first and second partial derivatives in (x₁, x₂); each field has m components.
struct Jets {
  RField d1, d2, d11, d12, d22;
};

struct ImmersionField {
  SurfaceSpec spec;
  int m = 3;
  RField phi;
  std::optional<Jets> exact;

  const PolarGrid& grid() const { return phi.grid; }
};

namespace detail {

using J1 = Eigen::AutoDiffScalar<Eigen::Matrix<long double, 2, 1>>;
using J2 = Eigen::AutoDiffScalar<Eigen::Matrix<J1, 2, 1>>;

inline J2 K(long double c) { return J2(J1(c)); }

inline std::pair<J2, J2> seed(long double x, long double y) {
  J1 xi(x, 2, 0), yi(y, 2, 1);
  J2 X(xi, 2, 0), Y(yi, 2, 1);
  for (int a = 0; a < 2; ++a) {
    X.derivatives()(a).derivatives().setZero();
    Y.derivatives()(a).derivatives().setZero();
  }
  return {X, Y};
}

// Complex-valued jet.
struct CJ {
  J2 re, im;
};
inline CJ operator+(const CJ& a, const CJ& b) { return {a.re + b.re, a.im + b.im}; }
inline CJ operator-(const CJ& a, const CJ& b) { return {a.re - b.re, a.im - b.im}; }
inline CJ operator*(const CJ& a, const CJ& b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
inline CJ operator*(const CJ& a, const J2& s) { return {a.re * s, a.im * s}; }
inline CJ scale(const CJ& a, std::complex<long double> c) {
  return {a.re * K(c.real()) - a.im * K(c.imag()), a.re * K(c.imag()) + a.im * K(c.real())};
}
inline CJ inv(const CJ& a) {
  const J2 d = a.re * a.re + a.im * a.im;
  return {a.re / d, -a.im / d};
}
inline CJ ipow(const CJ& a, int n) {
  CJ base = n < 0 ? inv(a) : a;
  CJ r{K(1), K(0)};
  for (int k = 0; k < std::abs(n); ++k) r = r * base;
  return r;
}
// Re(c · a) for complex scalar c.
inline J2 re_mul(std::complex<long double> c, const CJ& a) { return a.re * K(c.real()) - a.im * K(c.imag()); }

using Evaluator = std::function<void(const J2& x, const J2& y, std::vector<J2>& out)>;

inline std::complex<long double> ld(cdouble c) { return {c.real(), c.imag()}; }

inline void check_sample(const std::vector<J2>& out) {
  for (const auto& v : out)
    if (!std::isfinite(static_cast<double>(v.value().value()))) throw std::domain_error("catalog chart is singular on the grid");
}

}  // namespace detail

// Complex bilinear dot product u·v (no conjugation).
inline cdouble cdot(const CVec& u, const CVec& v) {
  cdouble s = 0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}
inline double cnorm2(const CVec& u) {
  double s = 0;
  for (auto c : u) s += std::norm(c);
  return s;
}
inline CVec conj(const CVec& u) {
  CVec r(u);
  for (auto& c : r) c = std::conj(c);
  return r;
}

// Planted template data of synthetic charts.
struct PlantedExpansion {
  int theta0 = 1;
  int a = 0;
  CVec A;
  std::vector<CVec> B;  // B_1 … B_{θ₀−a}
  CVec E;               // E_a
  std::vector<double> gamma0;
  double u0 = 0.0;
  CVec C_theta_a;
  std::vector<double> C;
};

namespace detail {

struct Synthetic {
  int n = 2, k = 1;
  CVec A, E, cn, ck, e;
  std::vector<double> v, Kvec;
  cdouble beta = 0.0;
};

inline Synthetic synthetic_data(const SurfaceSpec& sp) {
  Synthetic s;
  const int m = sp.ambient_dim;
  s.n = static_cast<int>(sp.scalar("theta0", 2));
  s.k = static_cast<int>(sp.scalar("a", 1));
  s.beta = {sp.scalar("beta_re", 0.0), sp.scalar("beta_im", 0.0)};
  if (s.n < 1 || s.k < 0 || s.k > s.n - 1) throw std::invalid_argument("synthetic_th4 needs theta0 >= 1 and 0 <= a <= theta0-1");
  auto get = [&](const char* key) {
    auto it = sp.vectors.find(key);
    if (it == sp.vectors.end()) throw std::invalid_argument(std::string("synthetic_th4 needs vector ") + key);
    if (static_cast<int>(it->second.size()) != m) throw std::invalid_argument(std::string("vector length mismatch: ") + key);
    return it->second;
  };
  s.A = get("A");
  s.E = get("E");
  const CVec g0 = get("gamma0");
  const double a2 = cnorm2(s.A);
  const double tol = 1e-12;
  if (a2 == 0.0 || std::abs(cdot(s.A, s.A)) > tol * a2) throw std::invalid_argument("A must be isotropic (A·A = 0)");
  for (auto c : g0)
    if (std::abs(c.imag()) > tol) throw std::invalid_argument("gamma0 must be real");
  s.v.resize(m);
  for (int i = 0; i < m; ++i) s.v[i] = -0.5 * g0[i].real();
  CVec vc(s.v.begin(), s.v.end());
  if (std::abs(cdot(vc, s.A)) > tol * std::sqrt(a2 * cnorm2(vc) + 1e-300)) throw std::invalid_argument("gamma0 must be normal to span(A)");
  const double e2 = cnorm2(s.E);
  if (s.k >= 1) {
    if (std::abs(cdot(s.E, s.E)) > tol * e2 || std::abs(cdot(s.E, s.A)) > tol * std::sqrt(a2 * e2) ||
        std::abs(cdot(s.E, conj(s.A))) > tol * std::sqrt(a2 * e2) || std::abs(cdot(s.E, vc)) > tol * std::sqrt(e2 * cnorm2(vc) + 1e-300))
      throw std::invalid_argument("E_a must be isotropic and orthogonal to A and gamma0 for a conformal chart");
  } else {
    for (auto c : s.E)
      if (std::abs(c.imag()) > tol) throw std::invalid_argument("E_0 must be real when a = 0");
    if (std::abs(cdot(s.E, s.A)) > tol * std::sqrt(a2 * e2 + 1e-300)) throw std::invalid_argument("E_0 must be normal to span(A)");
  }
  // Minimal end X = Re(c_n w^{-n} + c_k w^{-k} + e w^n/n) + v log|w| + K, nullity forces c_n·e = |v|²/(2n).
  s.cn = conj(s.A);
  for (auto& c : s.cn) c *= 2.0 / a2;
  const double cn2 = cnorm2(s.cn);
  double v2 = 0;
  for (double x : s.v) v2 += x * x;
  s.e = conj(s.cn);
  for (auto& c : s.e) c *= v2 / (2.0 * s.n * cn2);
  s.ck = s.E;
  if (s.k >= 1)
    for (auto& c : s.ck) c *= s.n / (2.0 * (s.n - s.k));
  s.Kvec.resize(m);
  for (int i = 0; i < m; ++i) s.Kvec[i] = g0[i].real() / (2.0 * s.n) + (s.k == 0 ? 0.5 * s.E[i].real() : 0.0);
  return s;
}

}  // namespace detail

inline PlantedExpansion planted_expansion(const SurfaceSpec& sp) {
  PlantedExpansion p;
  const int m = sp.ambient_dim;
  if (sp.name == "branched_plane") {
    p.theta0 = static_cast<int>(sp.scalar("theta0", 2));
    auto it = sp.vectors.find("A");
    p.A = it != sp.vectors.end() ? it->second : CVec(m, 0.0);
    if (it == sp.vectors.end()) {
      p.A[0] = 1.0;
      p.A[1] = cdouble(0, -1);
    }
    p.a = 0;
    p.E.assign(m, 0.0);
    p.gamma0.assign(m, 0.0);
    p.B.assign(p.theta0, CVec(m, 0.0));
    p.u0 = std::log(p.theta0 * std::sqrt(cnorm2(p.A) / 2));
    p.C_theta_a.assign(m, 0.0);
    p.C.assign(m, 0.0);
    return p;
  }
  if (sp.name != "synthetic_th4") throw std::invalid_argument("no planted expansion for " + sp.name);
  const auto s = detail::synthetic_data(sp);
  p.theta0 = s.n;
  p.a = s.k;
  p.A = s.A;
  p.E = s.E;
  p.gamma0.resize(m);
  for (int i = 0; i < m; ++i) p.gamma0[i] = -2.0 * s.v[i];
  p.u0 = std::log(s.n * std::sqrt(cnorm2(s.A) / 2));
  // h(z) = z + βz² so Re(A h^n) contributes binom(n,j) β^j A at order n+j.
  for (int j = 1; j <= s.n - s.k; ++j) {
    const double binom = static_cast<double>(binomial(s.n, j));
    CVec b(m);
    for (int i = 0; i < m; ++i) b[i] = binom * std::pow(s.beta, j) * s.A[i];
    p.B.push_back(b);
  }
  const double e2u = std::exp(2 * p.u0);
  p.C_theta_a.resize(m);
  p.C.resize(m);
  for (int i = 0; i < m; ++i) {
    p.C_theta_a[i] = e2u / (2.0 * s.n * (s.n - s.k)) * s.E[i];
    p.C[i] = e2u / (2.0 * s.n * s.n * s.n) * p.gamma0[i];
  }
  return p;
}

namespace detail {

inline Evaluator make_evaluator(const SurfaceSpec& sp) {
  const int m = sp.ambient_dim;
  if (m < kMinDim || m > kMaxDim) throw std::invalid_argument("ambient_dim must lie in [3,8]");
  const std::string& name = sp.name;
  auto zeros = [m](std::vector<J2>& out) { out.assign(m, K(0)); };

  if (name == "plane") {
    return [=](const J2& x, const J2& y, std::vector<J2>& out) {
      zeros(out);
      out[0] = x;
      out[1] = y;
    };
  }
  if (name == "branched_plane") {
    const auto p = planted_expansion(sp);
    if (static_cast<int>(p.A.size()) != m) throw std::invalid_argument("A length mismatch");
    if (p.theta0 < 1) throw std::invalid_argument("theta0 must be >= 1");
    if (std::abs(cdot(p.A, p.A)) > 1e-12 * cnorm2(p.A)) throw std::invalid_argument("A must be isotropic (A·A = 0)");
    return [=](const J2& x, const J2& y, std::vector<J2>& out) {
      zeros(out);
      const CJ zn = ipow(CJ{x, y}, p.theta0);
      for (int i = 0; i < m; ++i) out[i] = re_mul(ld(p.A[i]), zn);
    };
  }
  if (name == "sphere_stereographic") {
    const long double R = sp.scalar("R", 1.0), side = sp.scalar("side", 1.0);
    if (!(R > 0)) throw std::invalid_argument("R must be positive");
    return [=](const J2& x, const J2& y, std::vector<J2>& out) {
      zeros(out);
      const J2 q = x * x + y * y, d = K(1) + q;
      out[0] = K(2 * R) * x / d;
      out[1] = K(2 * R) * y / d;
      out[2] = K(side * R) * (K(1) - q) / d;
    };
  }
  // Catenoid c(cosh t cos φ, cosh t sin φ, t) with z = e^{-(t+iφ)}.
  auto catenoid = [](long double c, const J2& x, const J2& y, std::vector<J2>& out) {
    const J2 q = x * x + y * y;
    const J2 f = (K(1) + q) / (K(2) * q);
    out[0] = K(c) * f * x;
    out[1] = K(-c) * f * y;
    out[2] = K(-c / 2) * log(q);
  };
  if (name == "catenoid_end") {
    const long double c = sp.scalar("c", 1.0);
    return [=](const J2& x, const J2& y, std::vector<J2>& out) {
      zeros(out);
      catenoid(c, x, y, out);
    };
  }
  if (name == "inverted_catenoid") {
    const long double c = sp.scalar("c", 1.0);
    return [=](const J2& x, const J2& y, std::vector<J2>& out) {
      zeros(out);
      catenoid(c, x, y, out);
      const J2 n2 = out[0] * out[0] + out[1] * out[1] + out[2] * out[2];
      for (int i = 0; i < 3; ++i) out[i] = out[i] / n2;
    };
  }
  if (name == "cylinder_cmc") {
    const long double rho = sp.scalar("radius", 1.0);
    return [=](const J2& x, const J2& y, std::vector<J2>& out) {
      zeros(out);
      const J2 q = x * x + y * y, r = sqrt(q);
      out[0] = K(rho) * x / r;
      out[1] = K(-rho) * y / r;
      out[2] = K(-rho / 2) * log(q);
    };
  }
  if (name == "clifford_torus_patch") {
    if (m != 4) throw std::invalid_argument("clifford_torus_patch lives in R^4");
    const long double sc = sp.scalar("scale", 1.0) / std::sqrt(2.0L);
    // Torus angles (θ, −log r): the annulus e^{-2π} <= r <= 1 covers the torus once.
    return [=](const J2& x, const J2& y, std::vector<J2>& out) {
      zeros(out);
      const J2 q = x * x + y * y, r = sqrt(q), s = K(0.5) * log(q);
      out[0] = K(sc) * x / r;
      out[1] = K(sc) * y / r;
      out[2] = K(sc) * cos(s);
      out[3] = K(-sc) * sin(s);
    };
  }
  if (name == "synthetic_th4") {
    const Synthetic s = synthetic_data(sp);
    return [=](const J2& x, const J2& y, std::vector<J2>& out) {
      zeros(out);
      const CJ z{x, y};
      const CJ w = z + scale(z * z, ld(s.beta));
      const CJ wn = ipow(w, -s.n), wk = ipow(w, -s.k), wp = ipow(w, s.n);
      const J2 logr = K(0.5) * log(w.re * w.re + w.im * w.im);
      J2 n2 = K(0);
      for (int i = 0; i < m; ++i) {
        J2 X = re_mul(ld(s.cn[i]), wn) + re_mul(ld(s.e[i]) / static_cast<long double>(s.n), wp) + K(s.v[i]) * logr + K(s.Kvec[i]);
        if (s.k >= 1) X = X + re_mul(ld(s.ck[i]), wk);
        out[i] = X;
        n2 = n2 + X * X;
      }
      for (int i = 0; i < m; ++i) out[i] = out[i] / n2;
    };
  }
  throw std::invalid_argument("unknown catalog surface: " + name);
}

}  // namespace detail

inline const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names = {"plane",        "branched_plane", "sphere_stereographic", "catenoid_end", "inverted_catenoid",
                                                 "cylinder_cmc", "clifford_torus_patch", "synthetic_th4"};
  return names;
}

inline ImmersionField catalog_surface(const SurfaceSpec& sp) {
  sp.grid.validate();
  const auto eval = detail::make_evaluator(sp);
  const int m = sp.ambient_dim;
  const PolarGrid& g = sp.grid;
  ImmersionField f;
  f.spec = sp;
  f.m = m;
  f.phi = RField(g, m);
  Jets J{RField(g, m), RField(g, m), RField(g, m), RField(g, m), RField(g, m)};
  std::vector<detail::J2> out;
  for (int i = 0; i < g.n_r; ++i)
    for (int j = 0; j < g.n_theta; ++j) {
      const long double r = g.r(i), t = g.theta(j);
      auto [X, Y] = detail::seed(r * std::cos(t), r * std::sin(t));
      eval(X, Y, out);
      detail::check_sample(out);
      const std::size_t n = g.idx(i, j);
      for (int c = 0; c < m; ++c) {
        const auto& v = out[c];
        f.phi(n, c) = static_cast<double>(v.value().value());
        J.d1(n, c) = static_cast<double>(v.derivatives()(0).value());
        J.d2(n, c) = static_cast<double>(v.derivatives()(1).value());
        J.d11(n, c) = static_cast<double>(v.derivatives()(0).derivatives()(0));
        J.d12(n, c) = static_cast<double>(v.derivatives()(0).derivatives()(1));
        J.d22(n, c) = static_cast<double>(v.derivatives()(1).derivatives()(1));
      }
    }
  f.exact = std::move(J);
  return f;
}

// Samples without evaluators (imported data).
inline ImmersionField sampled_surface(const RField& phi, const std::string& name = "samples") {
  phi.grid.validate();
  ImmersionField f;
  f.spec.name = name;
  f.spec.ambient_dim = phi.ncomp;
  f.spec.grid = phi.grid;
  f.m = phi.ncomp;
  f.phi = phi;
  for (double v : phi.data)
    if (!std::isfinite(v)) throw std::domain_error("non-finite sample");
  return f;
}

// First and second derivatives: exact when evaluators exist, otherwise composed stencils.
inline Jets differentiate(const ImmersionField& f, const Differentiator& D) {
  if (f.exact) return *f.exact;
  auto [d1, d2] = D.grad(f.phi);
  auto [d11, d12a] = D.grad(d1);
  auto [d21, d22] = D.grad(d2);
  RField d12 = (d12a + d21) * 0.5;
  return {std::move(d1), std::move(d2), std::move(d11), std::move(d12), std::move(d22)};
}

struct FrameField {
  int m = 3;
  RField lambda;  // ½ log(½|∇Φ|²)
  RField defect;
  RField e1, e2;  // unit tangent frame, m components
  RField n;       // Gauss map, grade m−2 coefficients in canonical order
  double max_defect = 0.0;
};

inline FrameField conformal_factor(const ImmersionField& f, const Jets& J) {
  const PolarGrid& g = f.grid();
  FrameField F;
  F.m = f.m;
  F.lambda = RField(g, 1);
  F.defect = RField(g, 1);
  for (std::size_t n = 0; n < g.nodes(); ++n) {
    double a = 0, b = 0, ab = 0;
    for (int c = 0; c < f.m; ++c) {
      a += J.d1(n, c) * J.d1(n, c);
      b += J.d2(n, c) * J.d2(n, c);
      ab += J.d1(n, c) * J.d2(n, c);
    }
    if (a + b == 0.0) throw std::domain_error("degenerate sample: |∇Φ| = 0 at a grid node");
    const double lam = 0.5 * std::log(0.5 * (a + b));
    const double el = std::exp(lam);
    F.lambda(n) = lam;
    F.defect(n) = std::max(std::abs(std::sqrt(a) - std::sqrt(b)) / el, std::abs(ab) / (el * el));
    F.max_defect = std::max(F.max_defect, F.defect(n));
  }
  return F;
}

inline MultiVec<double> node_vec(const RField& f, std::size_t n) {
  return MultiVec<double>::vector(f.ncomp, f.at(n));
}
inline MultiVec<double> node_mv(const RField& f, std::size_t n, int m, int grade) {
  MultiVec<double> v(m, grade);
  for (int k = 0; k < v.size(); ++k) v[k] = f(n, k);
  return v;
}
inline void store(RField& f, std::size_t n, const MultiVec<double>& v) {
  for (int k = 0; k < v.size(); ++k) f(n, k) = v[k];
}

constexpr double kConformalDefectTol = 1e-6;

inline FrameField frame_and_gauss(const ImmersionField& f, const Jets& J, FrameField F, double defect_tol = kConformalDefectTol) {
  if (F.max_defect > defect_tol) throw std::domain_error("input is not conformal: defect " + std::to_string(F.max_defect));
  const PolarGrid& g = f.grid();
  const int m = f.m;
  F.e1 = RField(g, m);
  F.e2 = RField(g, m);
  F.n = RField(g, binomial(m, m - 2));
  for (std::size_t n = 0; n < g.nodes(); ++n) {
    const double il = std::exp(-F.lambda(n));
    for (int c = 0; c < m; ++c) {
      F.e1(n, c) = J.d1(n, c) * il;
      F.e2(n, c) = J.d2(n, c) * il;
    }
    MultiVec<double> nn = hodge_star(wedge(node_vec(F.e1, n), node_vec(F.e2, n)));
    nn *= 1.0 / norm(nn);
    store(F.n, n, nn);
  }
  return F;
}

// Normal projection π_n v = v − (v·e₁)e₁ − (v·e₂)e₂ at node n (in place on m components).
template <class T>
void project_normal(const FrameField& F, std::size_t n, T* v) {
  T a{}, b{};
  for (int c = 0; c < F.m; ++c) {
    a += v[c] * F.e1(n, c);
    b += v[c] * F.e2(n, c);
  }
  for (int c = 0; c < F.m; ++c) v[c] -= a * F.e1(n, c) + b * F.e2(n, c);
}

template <class T>
Field<T> normal_part(const FrameField& F, Field<T> v) {
  for (std::size_t n = 0; n < v.nodes(); ++n) project_normal(F, n, v.at(n));
  return v;
}

}  // namespace willmore
