#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace willmore {

using cdouble = std::complex<double>;

// Exponential-polar grid: s = log r uniform on [log r_min, log r_max], θ uniform on [0, 2π).
struct PolarGrid {
  double r_min = 1e-3;
  double r_max = 1.0;
  int n_r = 64;
  int n_theta = 64;

  void validate() const {
    if (!(r_min > 0.0 && r_min < r_max && r_max <= 1.0)) throw std::invalid_argument("grid radii must satisfy 0 < r_min < r_max <= 1");
    if (n_r < 16) throw std::invalid_argument("grid needs n_r >= 16");
    if (n_theta < 32 || n_theta % 2) throw std::invalid_argument("grid needs even n_theta >= 32");
  }
  double s_min() const { return std::log(r_min); }
  double s_max() const { return std::log(r_max); }
  double ds() const { return (s_max() - s_min()) / (n_r - 1); }
  double dtheta() const { return 2.0 * std::numbers::pi / n_theta; }
  double s(int i) const { return i == n_r - 1 ? s_max() : s_min() + i * ds(); }
  double r(int i) const { return i == n_r - 1 ? r_max : std::exp(s(i)); }
  double theta(int j) const { return j * dtheta(); }
  std::size_t nodes() const { return static_cast<std::size_t>(n_r) * n_theta; }
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_theta + j; }
  // Radial index range [lo, hi] of nodes with r in [a, b].
  std::pair<int, int> radial_range(double a, double b) const {
    int lo = n_r, hi = -1;
    for (int i = 0; i < n_r; ++i) {
      const double ri = r(i);
      if (ri >= a * (1 - 1e-12) && ri <= b * (1 + 1e-12)) {
        lo = std::min(lo, i);
        hi = std::max(hi, i);
      }
    }
    return {lo, hi};
  }
  // Annulus used for norms: drops the innermost and outermost 10% of radial nodes.
  std::pair<int, int> interior_range() const {
    const int cut = std::max(1, n_r / 10);
    return {cut, n_r - 1 - cut};
  }
  PolarGrid refined(int level) const {
    PolarGrid g = *this;
    for (int l = 0; l < level; ++l) {
      g.n_r = 2 * g.n_r - 1;
      g.n_theta *= 2;
    }
    return g;
  }
};

inline bool operator==(const PolarGrid& a, const PolarGrid& b) {
  return a.r_min == b.r_min && a.r_max == b.r_max && a.n_r == b.n_r && a.n_theta == b.n_theta;
}

template <class T>
struct Field {
  PolarGrid grid;
  int ncomp = 1;
  std::vector<T> data;

  Field() = default;
  Field(const PolarGrid& g, int nc, T init = T{}) : grid(g), ncomp(nc), data(g.nodes() * nc, init) {}

  std::size_t nodes() const { return grid.nodes(); }
  T& operator()(std::size_t node, int c = 0) { return data[node * ncomp + c]; }
  const T& operator()(std::size_t node, int c = 0) const { return data[node * ncomp + c]; }
  T* at(std::size_t node) { return data.data() + node * ncomp; }
  const T* at(std::size_t node) const { return data.data() + node * ncomp; }

  Field& operator+=(const Field& o) {
    for (std::size_t k = 0; k < data.size(); ++k) data[k] += o.data[k];
    return *this;
  }
  Field& operator-=(const Field& o) {
    for (std::size_t k = 0; k < data.size(); ++k) data[k] -= o.data[k];
    return *this;
  }
  Field& operator*=(T s) {
    for (auto& v : data) v *= s;
    return *this;
  }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Field a, T s) { return a *= s; }
};

using RField = Field<double>;
using CField = Field<cdouble>;

inline CField complexify(const RField& f) {
  CField c(f.grid, f.ncomp);
  for (std::size_t k = 0; k < f.data.size(); ++k) c.data[k] = f.data[k];
  return c;
}
inline RField real_part(const CField& f) {
  RField c(f.grid, f.ncomp);
  for (std::size_t k = 0; k < f.data.size(); ++k) c.data[k] = f.data[k].real();
  return c;
}
inline RField imag_part(const CField& f) {
  RField c(f.grid, f.ncomp);
  for (std::size_t k = 0; k < f.data.size(); ++k) c.data[k] = f.data[k].imag();
  return c;
}

// Finite-difference weights on arbitrary nodes (Fornberg's recursion), derivative order `deriv` at 0.
inline std::vector<double> fd_weights(const std::vector<double>& x, int deriv) {
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(n, std::vector<double>(deriv + 1, 0.0));
  double c1 = 1.0, c4 = x[0];
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, deriv);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i];
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][deriv];
  return w;
}

struct Stencil {
  int start = 0;
  std::vector<double> w;
};

// Per-node stencils on a uniform line of n nodes with spacing h; centered in the interior,
// shifted one-sided near the ends with one extra point per derivative order.
inline std::vector<Stencil> line_stencils(int n, double h, int deriv, int order) {
  const int centered = order + 1;
  const int half = order / 2;
  std::vector<Stencil> out(n);
  for (int i = 0; i < n; ++i) {
    int width = centered;
    int start = i - half;
    if (start < 0 || start + width > n) {
      width = order + deriv;
      start = std::clamp(i - width / 2, 0, n - width);
    }
    std::vector<double> x(width);
    for (int k = 0; k < width; ++k) x[k] = (start + k - i) * h;
    out[i] = {start, fd_weights(x, deriv)};
  }
  return out;
}

// Spectral in θ, finite differences of configurable order in s = log r.
class Differentiator {
 public:
  explicit Differentiator(const PolarGrid& g, int fd_order = 6) : g_(g), order_(fd_order) {
    if (fd_order < 2 || fd_order % 2) throw std::invalid_argument("finite-difference order must be even and >= 2");
    if (g.n_r < fd_order + 3) throw std::invalid_argument("grid too coarse for the radial stencil");
    s1_ = line_stencils(g.n_r, g.ds(), 1, fd_order);
    s2_ = line_stencils(g.n_r, g.ds(), 2, fd_order);
  }

  const PolarGrid& grid() const { return g_; }
  int order() const { return order_; }

  template <class T>
  Field<T> d_s(const Field<T>& f) const { return apply_s(f, s1_); }
  template <class T>
  Field<T> d_ss(const Field<T>& f) const { return apply_s(f, s2_); }
  template <class T>
  Field<T> d_theta(const Field<T>& f) const { return apply_theta(f, 1); }
  template <class T>
  Field<T> d_thth(const Field<T>& f) const { return apply_theta(f, 2); }

  // Cartesian gradient (∂₁f, ∂₂f).
  template <class T>
  std::pair<Field<T>, Field<T>> grad(const Field<T>& f) const {
    const Field<T> fs = d_s(f), ft = d_theta(f);
    Field<T> g1(g_, f.ncomp), g2(g_, f.ncomp);
    for (int i = 0; i < g_.n_r; ++i) {
      const double ir = 1.0 / g_.r(i);
      for (int j = 0; j < g_.n_theta; ++j) {
        const double c = std::cos(g_.theta(j)), s = std::sin(g_.theta(j));
        const std::size_t n = g_.idx(i, j);
        for (int k = 0; k < f.ncomp; ++k) {
          g1(n, k) = (c * fs(n, k) - s * ft(n, k)) * ir;
          g2(n, k) = (s * fs(n, k) + c * ft(n, k)) * ir;
        }
      }
    }
    return {std::move(g1), std::move(g2)};
  }
  template <class T>
  Field<T> divergence(const Field<T>& v1, const Field<T>& v2) const {
    return grad(v1).first + grad(v2).second;
  }
  template <class T>
  Field<T> laplacian(const Field<T>& f) const {
    Field<T> out = d_ss(f) + d_thth(f);
    for (int i = 0; i < g_.n_r; ++i) {
      const double w = 1.0 / (g_.r(i) * g_.r(i));
      for (int j = 0; j < g_.n_theta; ++j)
        for (int k = 0; k < f.ncomp; ++k) out(g_.idx(i, j), k) *= w;
    }
    return out;
  }
  // ∂_z = ½(∂₁ − i∂₂), ∂_z̄ = ½(∂₁ + i∂₂).
  template <class T>
  CField d_z(const Field<T>& f) const { return wirtinger(f, -1.0); }
  template <class T>
  CField d_zbar(const Field<T>& f) const { return wirtinger(f, 1.0); }

 private:
  template <class T>
  CField wirtinger(const Field<T>& f, double sgn) const {
    auto [g1, g2] = grad(f);
    CField out(g_, f.ncomp);
    for (std::size_t k = 0; k < out.data.size(); ++k)
      out.data[k] = 0.5 * (cdouble(g1.data[k]) + sgn * cdouble(0, 1) * cdouble(g2.data[k]));
    return out;
  }

  template <class T>
  Field<T> apply_s(const Field<T>& f, const std::vector<Stencil>& st) const {
    Field<T> out(g_, f.ncomp);
    for (int i = 0; i < g_.n_r; ++i) {
      const Stencil& S = st[i];
      for (int j = 0; j < g_.n_theta; ++j) {
        T* o = out.at(g_.idx(i, j));
        for (std::size_t q = 0; q < S.w.size(); ++q) {
          const T* src = f.at(g_.idx(S.start + static_cast<int>(q), j));
          for (int k = 0; k < f.ncomp; ++k) o[k] += S.w[q] * src[k];
        }
      }
    }
    return out;
  }

  template <class T>
  Field<T> apply_theta(const Field<T>& f, int deriv) const {
    const int N = g_.n_theta;
    Eigen::FFT<double> fft;
    std::vector<cdouble> in(N), spec(N), back(N);
    Field<T> out(g_, f.ncomp);
    for (int i = 0; i < g_.n_r; ++i) {
      for (int k = 0; k < f.ncomp; ++k) {
        for (int j = 0; j < N; ++j) in[j] = cdouble(f(g_.idx(i, j), k));
        fft.fwd(spec, in);
        for (int q = 0; q < N; ++q) {
          const int wave = q <= N / 2 ? q : q - N;
          if (deriv == 1)
            spec[q] *= (q == N / 2) ? cdouble(0) : cdouble(0, wave);
          else
            spec[q] *= -static_cast<double>(wave) * wave;
        }
        fft.inv(back, spec);
        for (int j = 0; j < N; ++j) {
          if constexpr (std::is_same_v<T, double>)
            out(g_.idx(i, j), k) = back[j].real();
          else
            out(g_.idx(i, j), k) = back[j];
        }
      }
    }
    return out;
  }

  PolarGrid g_;
  int order_;
  std::vector<Stencil> s1_, s2_;
};

// ∫ over panel [x_k, x_{k+1}] of the degree-(p−1) interpolant through p nearby nodes of a uniform line.
inline std::vector<Stencil> panel_stencils(int n, double h, int p = 8) {
  p = std::min(p, n);
  std::vector<Stencil> out(std::max(n - 1, 0));
  for (int k = 0; k + 1 < n; ++k) {
    const int start = std::clamp(k - (p / 2 - 1), 0, n - p);
    // Moment conditions Σ w_q (x_q)^d = ∫_{x_k}^{x_{k+1}} x^d dx in units of h, origin at x_k.
    Eigen::MatrixXd V(p, p);
    Eigen::VectorXd mom(p);
    for (int d = 0; d < p; ++d) {
      for (int q = 0; q < p; ++q) V(d, q) = std::pow(static_cast<double>(start + q - k), d);
      mom(d) = 1.0 / (d + 1);
    }
    const Eigen::VectorXd w = V.fullPivLu().solve(mom) * h;
    out[k] = {start, std::vector<double>(w.data(), w.data() + p)};
  }
  return out;
}

// Radial quadrature weights on nodes [lo, hi] with spacing h.
inline std::vector<double> radial_weights(int lo, int hi, double h, int p = 8) {
  const int n = hi - lo + 1;
  std::vector<double> w(n, 0.0);
  for (const auto& st : panel_stencils(n, h, p))
    for (std::size_t q = 0; q < st.w.size(); ++q) w[st.start + q] += st.w[q];
  return w;
}

// ∫∫ f dx over the annulus of radial nodes [lo, hi] (dx = r² ds dθ), scalar field component c.
inline double integrate_area(const RField& f, int lo, int hi, int c = 0) {
  const PolarGrid& g = f.grid;
  const auto w = radial_weights(lo, hi, g.ds());
  double total = 0.0;
  for (int i = lo; i <= hi; ++i) {
    double ring = 0.0;
    for (int j = 0; j < g.n_theta; ++j) ring += f(g.idx(i, j), c);
    total += w[i - lo] * ring * g.dtheta() * g.r(i) * g.r(i);
  }
  return total;
}

// Max-norm over the interior annulus of the Euclidean norm across components.
template <class T>
double annulus_norm(const Field<T>& f, int lo, int hi) {
  double mx = 0.0;
  for (int i = lo; i <= hi; ++i)
    for (int j = 0; j < f.grid.n_theta; ++j) {
      double s = 0.0;
      for (int k = 0; k < f.ncomp; ++k) s += std::norm(f(f.grid.idx(i, j), k));
      mx = std::max(mx, std::sqrt(s));
    }
  return mx;
}
template <class T>
double annulus_norm(const Field<T>& f) {
  const auto [lo, hi] = f.grid.interior_range();
  return annulus_norm(f, lo, hi);
}

// Observed convergence order from norms at successive refinements (spacing halves each level).
inline std::vector<double> observed_orders(const std::vector<double>& errs) {
  std::vector<double> p;
  for (std::size_t k = 1; k < errs.size(); ++k) p.push_back(std::log2(errs[k - 1] / errs[k]));
  return p;
}

}  // namespace willmore
