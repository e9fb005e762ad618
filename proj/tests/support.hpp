#pragma once
// Shared fixtures for the unit tests.
#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "willmore/pipeline.hpp"

namespace willmore::testing {

inline SurfaceSpec spec(const std::string& name, PolarGrid g = {0.05, 1.0, 65, 64}, int m = 3) {
  SurfaceSpec s;
  s.name = name;
  s.ambient_dim = m;
  s.grid = g;
  return s;
}

// Planted chart with A = (1, −i, 0, 0, 0), a pole in components 3 and 4 (a ≥ 1) and γ₀ along e₅.
inline SurfaceSpec synthetic(int theta0, int a, int n_r = 129, int n_theta = 64) {
  SurfaceSpec s = spec("synthetic_th4", {std::pow(10.0, -8.0 / theta0), 1.0, n_r, n_theta}, 5);
  s.scalars = {{"theta0", theta0}, {"a", a}, {"beta_re", 0.1}, {"beta_im", 0.05}};
  s.vectors["A"] = {1.0, cdouble(0, -1), 0.0, 0.0, 0.0};
  if (a >= 1)
    s.vectors["E"] = {0.0, 0.0, 0.3, cdouble(0, 0.3), 0.0};
  else
    s.vectors["E"] = {0.0, 0.0, 0.4, 0.0, 0.0};
  s.vectors["gamma0"] = {0.0, 0.0, 0.0, 0.0, 0.7};
  return s;
}

// Surface → frame → curvature on one grid, with exact jets.
struct Chain {
  ImmersionField f;
  Differentiator D;
  Jets J;
  FrameField F;
  CurvatureField C;

  explicit Chain(const SurfaceSpec& s)
      : f(catalog_surface(s)), D(s.grid), J(*f.exact), F(frame_and_gauss(f, J, conformal_factor(f, J))), C(curvature(f, J, F, D)) {}
  const PolarGrid& grid() const { return f.grid(); }
  CField zero_multiplier() const { return CField(grid(), 1); }
};

// Each refinement step either improves at min_order or both levels already sit below floor (roundoff).
inline ::testing::AssertionResult converges(const std::vector<double>& e, double min_order, double floor) {
  const auto p = observed_orders(e);
  for (std::size_t k = 0; k < p.size(); ++k)
    if (!(p[k] >= min_order || (e[k] <= floor && e[k + 1] <= floor)))
      return ::testing::AssertionFailure() << "step " << k << ": " << e[k] << " -> " << e[k + 1] << " (order " << p[k] << ", floor " << floor << ")";
  return ::testing::AssertionSuccess();
}

inline double norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double cnorm(const CVec& v) {
  double s = 0;
  for (auto x : v) s += std::norm(x);
  return std::sqrt(s);
}

inline double cdiff(const CVec& u, const CVec& v) {
  double s = 0;
  for (std::size_t k = 0; k < u.size(); ++k) s += std::norm(u[k] - v[k]);
  return std::sqrt(s);
}

}  // namespace willmore::testing
