#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "willmore/multivec.hpp"

using namespace willmore;
using IV = MultiVec<long long>;
using DV = MultiVec<double>;

namespace {

IV random_int(int m, int k, std::mt19937& rng) {
  std::uniform_int_distribution<int> d(-5, 5);
  IV v(m, k);
  for (int i = 0; i < v.size(); ++i) v[i] = d(rng);
  return v;
}
DV random_real(int m, int k, std::mt19937& rng) {
  std::normal_distribution<double> d;
  DV v(m, k);
  for (int i = 0; i < v.size(); ++i) v[i] = d(rng);
  return v;
}
double max_abs(const DV& v) {
  double mx = 0;
  for (int i = 0; i < v.size(); ++i) mx = std::max(mx, std::abs(v[i]));
  return mx;
}

// α•(f₀∧…∧f_{p−1}) evaluated by splitting the factor list at `cut`, recursively; any cut must agree.
DV bullet_split(const DV& alpha, const std::vector<DV>& f, std::size_t lo, std::size_t hi, std::mt19937& rng) {
  if (hi - lo == 1) return interior(alpha, f[lo]);
  std::uniform_int_distribution<std::size_t> d(lo + 1, hi - 1);
  const std::size_t cut = d(rng);
  auto wedge_range = [&](std::size_t a, std::size_t b) {
    DV w = f[a];
    for (std::size_t k = a + 1; k < b; ++k) w = wedge(w, f[k]);
    return w;
  };
  const DV beta = wedge_range(lo, cut), gamma = wedge_range(cut, hi);
  const int p = static_cast<int>(cut - lo), q = static_cast<int>(hi - cut);
  DV r = wedge(bullet_split(alpha, f, lo, cut, rng), gamma);
  const DV other = wedge(bullet_split(alpha, f, cut, hi, rng), beta);
  return (p * q) % 2 ? r - other : r + other;
}

}  // namespace

TEST(MultiVec, CoefficientCountAndZero) {
  for (int m = 3; m <= 8; ++m)
    for (int k = 0; k <= m; ++k) {
      IV z(m, k);
      EXPECT_EQ(z.size(), binomial(m, k));
      for (int i = 0; i < z.size(); ++i) EXPECT_EQ(z[i], 0);
      for (int i = 1; i < z.size(); ++i) EXPECT_EQ(std::popcount(z.mask(i)), k);
    }
}

TEST(MultiVec, CanonicalOrderIsLexicographic) {
  IV v(4, 2);
  const unsigned expect[] = {0b0011, 0b0101, 0b1001, 0b0110, 0b1010, 0b1100};
  for (int i = 0; i < 6; ++i) EXPECT_EQ(v.mask(i), expect[i]);
}

TEST(MultiVec, WedgeExamples) {
  const IV e1 = IV::e(3, 1), e2 = IV::e(3, 2);
  EXPECT_EQ(wedge(e1, e2), IV::blade(3, 0b011));
  const IV v = e1 + e2 * 3;
  EXPECT_EQ(wedge(v, v), IV(3, 2));
  EXPECT_EQ(wedge(e1 + e2, e1 - e2), IV::blade(3, 0b011, -2));
  EXPECT_THROW(wedge(IV(3, 2), IV(3, 2)), std::invalid_argument);
  EXPECT_THROW(wedge(IV(3, 1), IV(4, 1)), std::invalid_argument);
}

TEST(MultiVec, WedgeAssociativeAndGradedAnticommutativeExact) {
  std::mt19937 rng(1);
  for (int m = 3; m <= 8; ++m)
    for (int p = 0; p <= m; ++p)
      for (int q = 0; p + q <= m; ++q) {
        const IV a = random_int(m, p, rng), b = random_int(m, q, rng);
        const IV ab = wedge(a, b), ba = wedge(b, a);
        EXPECT_EQ(ab, (p * q) % 2 ? -ba : ba);
        for (int s = 0; p + q + s <= m; s += 1 + (m > 5)) {
          const IV c = random_int(m, s, rng);
          EXPECT_EQ(wedge(wedge(a, b), c), wedge(a, wedge(b, c)));
        }
      }
}

TEST(MultiVec, WedgeAssociativeFloat) {
  std::mt19937 rng(2);
  for (int m = 3; m <= 8; ++m)
    for (int p = 0; p <= m; ++p)
      for (int q = 0; p + q <= m; ++q)
        for (int s = 0; p + q + s <= m; ++s) {
          const DV a = random_real(m, p, rng), b = random_real(m, q, rng), c = random_real(m, s, rng);
          EXPECT_LT(max_abs(wedge(wedge(a, b), c) - wedge(a, wedge(b, c))), 1e-12);
        }
}

TEST(MultiVec, HodgeBasics) {
  EXPECT_EQ(hodge_star(wedge(IV::e(3, 1), IV::e(3, 2))), IV::e(3, 3));
  const IV e1 = IV::e(3, 1), e2 = IV::e(3, 2), n = IV::e(3, 3);
  EXPECT_EQ(hodge_star(wedge(n, e1)), e2);
  EXPECT_EQ(hodge_star(wedge(n, e2)), -e1);
}

TEST(MultiVec, DoubleStarSignAndIsometryExact) {
  std::mt19937 rng(3);
  for (int m = 3; m <= 8; ++m)
    for (int k = 0; k <= m; ++k) {
      const IV a = random_int(m, k, rng), b = random_int(m, k, rng);
      const IV ss = hodge_star(hodge_star(a));
      EXPECT_EQ(ss, (k * (m - k)) % 2 ? -a : a);
      EXPECT_EQ(inner(hodge_star(a), hodge_star(b)), inner(a, b));
      // Defining property e_I ∧ ⋆e_I = vol.
      for (int i = 0; i < a.size(); ++i) {
        const IV blade = IV::blade(m, a.mask(i));
        EXPECT_EQ(wedge(blade, hodge_star(blade)), IV::blade(m, (1u << m) - 1u));
      }
    }
}

TEST(MultiVec, HodgeIdentitiesOnRandomFrames) {
  std::mt19937 rng(4);
  std::normal_distribution<double> d;
  for (int m = 3; m <= 8; ++m)
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::MatrixXd M(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) M(i, j) = d(rng);
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
      Eigen::MatrixXd Q = qr.householderQ();
      if (Q.determinant() < 0) Q.col(m - 1) *= -1;
      auto col = [&](int c) { return DV::vector(m, Q.col(c).data()); };
      const DV e1 = col(0), e2 = col(1);
      DV n = col(2);
      for (int c = 3; c < m; ++c) n = wedge(n, col(c));
      EXPECT_LT(max_abs(hodge_star(wedge(e1, e2)) - n), 1e-12);
      EXPECT_LT(max_abs(hodge_star(wedge(n, e1)) - e2), 1e-12);
      EXPECT_LT(max_abs(hodge_star(wedge(n, e2)) + e1), 1e-12);
      EXPECT_NEAR(inner(n, n), 1.0, 1e-12);
    }
}

TEST(MultiVec, InteriorExamples) {
  const IV e12 = IV::blade(3, 0b011);
  EXPECT_EQ(interior(e12, IV::e(3, 1)), IV::e(3, 2));
  EXPECT_EQ(interior(e12, IV::e(3, 3)), IV(3, 1));
  EXPECT_THROW(interior(IV(3, 1), IV(3, 2)), std::invalid_argument);
}

TEST(MultiVec, InteriorDualityExhaustive) {
  std::mt19937 rng(5);
  for (int m = 3; m <= 5; ++m)
    for (int q = 0; q <= m; ++q)
      for (int p = 0; p <= q; ++p) {
        const IV g = random_int(m, q, rng), b = random_int(m, p, rng);
        const IV gb = interior(g, b);
        IV basis(m, q - p);
        for (int i = 0; i < basis.size(); ++i) {
          const IV alpha = IV::blade(m, basis.mask(i));
          EXPECT_EQ(inner(gb, alpha), inner(g, wedge(b, alpha)));
        }
      }
}

TEST(MultiVec, InteriorBilinear) {
  std::mt19937 rng(6);
  for (int m = 3; m <= 8; ++m) {
    const IV g = random_int(m, 3, rng), g2 = random_int(m, 3, rng);
    const IV b = random_int(m, 2, rng), b2 = random_int(m, 2, rng);
    EXPECT_EQ(interior(g * 2 + g2, b), interior(g, b) * 2 + interior(g2, b));
    EXPECT_EQ(interior(g, b - b2 * 3), interior(g, b) - interior(g, b2) * 3);
  }
}

TEST(MultiVec, BulletBaseCaseAndZero) {
  std::mt19937 rng(7);
  for (int m = 3; m <= 8; ++m)
    for (int k = 1; k <= m; ++k) {
      const IV a = random_int(m, k, rng), v = random_int(m, 1, rng);
      EXPECT_EQ(contract_bullet(a, v), interior(a, v));
      EXPECT_EQ(contract_bullet(a, IV(m, 2)), IV(m, k));
    }
  EXPECT_THROW(contract_bullet(IV(3, 0), IV(3, 1)), std::invalid_argument);
}

TEST(MultiVec, BulletHandExample) {
  // (e₁∧e₂∧e₃)•(e₁∧e₄) = (α⌐e₁)∧e₄ − (α⌐e₄)∧e₁ = e₂∧e₃∧e₄.
  const IV alpha = IV::blade(4, 0b0111);
  EXPECT_EQ(contract_bullet(alpha, IV::blade(4, 0b1001)), IV::blade(4, 0b1110));
  // (e₁∧e₂∧e₃)•(e₁∧e₂) = e₂₃∧e₂ − (−e₁₃)∧e₁ = 0.
  EXPECT_EQ(contract_bullet(alpha, IV::blade(4, 0b0011)), IV(4, 3));
}

TEST(MultiVec, BulletRecursionIndependentOfSplit) {
  std::mt19937 rng(8);
  for (int m = 3; m <= 5; ++m)
    for (int k = 1; k <= m; ++k)
      for (int p = 2; p <= m && k + p - 2 <= m; ++p)
        for (int trial = 0; trial < 4; ++trial) {
          const DV alpha = random_real(m, k, rng);
          std::vector<DV> f;
          for (int i = 0; i < p; ++i) f.push_back(random_real(m, 1, rng));
          DV beta = f[0];
          for (int i = 1; i < p; ++i) beta = wedge(beta, f[i]);
          const DV lib = contract_bullet(alpha, beta);
          for (int rep = 0; rep < 3; ++rep) EXPECT_LT(max_abs(lib - bullet_split(alpha, f, 0, f.size(), rng)), 1e-12);
        }
}

TEST(MultiVec, BulletGrade2Combinations) {
  // Grade-2 • grade-1 and grade-2 • grade-2 against a direct expansion in m = 3, 4.
  for (int m = 3; m <= 4; ++m) {
    const IV a = IV::blade(m, 0b011) + IV::blade(m, 0b101) * 2 - IV::blade(m, 0b110) * 3;
    for (int i = 1; i <= m; ++i) EXPECT_EQ(contract_bullet(a, IV::e(m, i)), interior(a, IV::e(m, i)));
    IV g2(m, 2);
    for (int i = 0; i < g2.size(); ++i) {
      const unsigned mask = g2.mask(i);
      const int lo = std::countr_zero(mask), hi = 31 - std::countl_zero(mask);
      const IV ei = IV::e(m, lo + 1), ej = IV::e(m, hi + 1);
      const IV expect = wedge(interior(a, ei), ej) - wedge(interior(a, ej), ei);
      EXPECT_EQ(contract_bullet(a, IV::blade(m, mask)), expect);
    }
  }
}
