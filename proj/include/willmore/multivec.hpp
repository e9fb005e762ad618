#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace willmore {

constexpr int kMinDim = 3;
constexpr int kMaxDim = 8;

// Basis blade e_{i1}∧…∧e_{ik} (i1<…<ik) is the bitmask with bits i1-1,…,ik-1 set.
namespace detail {

struct GradeTable {
  std::vector<unsigned> masks;           // lexicographic order of index tuples
  std::array<int, 1u << kMaxDim> index;  // mask -> position, -1 when grade differs
};

struct DimTable {
  std::array<GradeTable, kMaxDim + 1> grades;
};

inline void enumerate(int m, int k, int start, unsigned acc, std::vector<unsigned>& out) {
  if (k == 0) {
    out.push_back(acc);
    return;
  }
  for (int i = start; i <= m - k; ++i) enumerate(m, k - 1, i + 1, acc | (1u << i), out);
}

inline const DimTable& table(int m) {
  static const std::array<DimTable, kMaxDim + 1> all = [] {
    std::array<DimTable, kMaxDim + 1> t{};
    for (int m = kMinDim; m <= kMaxDim; ++m) {
      for (int k = 0; k <= m; ++k) {
        GradeTable& g = t[m].grades[k];
        g.index.fill(-1);
        enumerate(m, k, 0, 0u, g.masks);
        for (std::size_t i = 0; i < g.masks.size(); ++i) g.index[g.masks[i]] = static_cast<int>(i);
      }
    }
    return t;
  }();
  if (m < kMinDim || m > kMaxDim) throw std::invalid_argument("ambient dimension must lie in [3,8]");
  return all[m];
}

// Sign of reordering e_I ∧ e_J into increasing order (I, J disjoint).
inline int reorder_sign(unsigned I, unsigned J) {
  int swaps = 0;
  while (J) {
    const int j = std::countr_zero(J);
    J &= J - 1;
    swaps += std::popcount(I >> (j + 1));
  }
  return (swaps & 1) ? -1 : 1;
}

}  // namespace detail

inline int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<int>(r);
}

template <class T = double>
class MultiVec {
 public:
  static constexpr int kMaxCoeffs = 70;  // binomial(8,4)

  MultiVec() = default;
  MultiVec(int m, int k) : m_(m), k_(k) {
    if (k < 0 || k > m) throw std::invalid_argument("grade out of range");
    n_ = static_cast<int>(detail::table(m).grades[k].masks.size());
    c_.fill(T{});
  }

  static MultiVec blade(int m, unsigned mask, T c = T{1}) {
    MultiVec v(m, std::popcount(mask));
    v.set(mask, c);
    return v;
  }
  // 1-based basis vector e_i.
  static MultiVec e(int m, int i) { return blade(m, 1u << (i - 1)); }
  template <class It>
  static MultiVec vector(int m, It first) {
    MultiVec v(m, 1);
    for (int i = 0; i < m; ++i, ++first) v.c_[i] = static_cast<T>(*first);
    return v;
  }

  int dim() const { return m_; }
  int grade() const { return k_; }
  int size() const { return n_; }
  T& operator[](int i) { return c_[i]; }
  const T& operator[](int i) const { return c_[i]; }
  unsigned mask(int i) const { return detail::table(m_).grades[k_].masks[i]; }
  int index(unsigned mask) const { return detail::table(m_).grades[k_].index[mask]; }
  T coeff(unsigned mask) const {
    const int i = index(mask);
    return i < 0 ? T{} : c_[i];
  }
  void set(unsigned mask, T v) { c_[checked(mask)] = v; }
  void add(unsigned mask, T v) { c_[checked(mask)] += v; }

  template <class U>
  MultiVec<U> cast() const {
    MultiVec<U> r(m_, k_);
    for (int i = 0; i < n_; ++i) r[i] = static_cast<U>(c_[i]);
    return r;
  }

  MultiVec& operator+=(const MultiVec& o) {
    same_shape(o);
    for (int i = 0; i < n_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  MultiVec& operator-=(const MultiVec& o) {
    same_shape(o);
    for (int i = 0; i < n_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  MultiVec& operator*=(T s) {
    for (int i = 0; i < n_; ++i) c_[i] *= s;
    return *this;
  }
  friend MultiVec operator+(MultiVec a, const MultiVec& b) { return a += b; }
  friend MultiVec operator-(MultiVec a, const MultiVec& b) { return a -= b; }
  friend MultiVec operator*(MultiVec a, T s) { return a *= s; }
  friend MultiVec operator*(T s, MultiVec a) { return a *= s; }
  friend MultiVec operator-(MultiVec a) { return a *= T{-1}; }
  friend bool operator==(const MultiVec& a, const MultiVec& b) {
    if (a.m_ != b.m_ || a.k_ != b.k_) return false;
    for (int i = 0; i < a.n_; ++i)
      if (a.c_[i] != b.c_[i]) return false;
    return true;
  }

 private:
  int checked(unsigned mask) const {
    const int i = index(mask);
    if (i < 0) throw std::invalid_argument("basis blade does not match grade");
    return i;
  }
  void same_shape(const MultiVec& o) const {
    if (o.m_ != m_ || o.k_ != k_) throw std::invalid_argument("multivector shape mismatch");
  }

  int m_ = kMinDim;
  int k_ = 0;
  int n_ = 1;
  std::array<T, kMaxCoeffs> c_{};
};

template <class T>
MultiVec<T> wedge(const MultiVec<T>& a, const MultiVec<T>& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("wedge: dimension mismatch");
  if (a.grade() + b.grade() > a.dim()) throw std::invalid_argument("wedge: grade overflow");
  MultiVec<T> r(a.dim(), a.grade() + b.grade());
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] == T{}) continue;
    const unsigned I = a.mask(i);
    for (int j = 0; j < b.size(); ++j) {
      const unsigned J = b.mask(j);
      if ((I & J) || b[j] == T{}) continue;
      r.add(I | J, static_cast<T>(detail::reorder_sign(I, J)) * a[i] * b[j]);
    }
  }
  return r;
}

// ⋆e_I = sign(I, I^c) e_{I^c}, so that e_I ∧ ⋆e_I = e_{1…m}.
template <class T>
MultiVec<T> hodge_star(const MultiVec<T>& a) {
  const int m = a.dim();
  const unsigned full = (1u << m) - 1u;
  MultiVec<T> r(m, m - a.grade());
  for (int i = 0; i < a.size(); ++i) {
    const unsigned I = a.mask(i);
    r.set(full & ~I, static_cast<T>(detail::reorder_sign(I, full & ~I)) * a[i]);
  }
  return r;
}

// γ⌐β with ⟨γ⌐β, α⟩ = ⟨γ, β∧α⟩.
template <class T>
MultiVec<T> interior(const MultiVec<T>& gamma, const MultiVec<T>& beta) {
  if (gamma.dim() != beta.dim()) throw std::invalid_argument("interior: dimension mismatch");
  if (gamma.grade() < beta.grade()) throw std::invalid_argument("interior: grade of gamma below grade of beta");
  MultiVec<T> r(gamma.dim(), gamma.grade() - beta.grade());
  for (int j = 0; j < gamma.size(); ++j) {
    if (gamma[j] == T{}) continue;
    const unsigned J = gamma.mask(j);
    for (int i = 0; i < beta.size(); ++i) {
      const unsigned I = beta.mask(i);
      if ((I & J) != I || beta[i] == T{}) continue;
      r.add(J & ~I, static_cast<T>(detail::reorder_sign(I, J & ~I)) * gamma[j] * beta[i]);
    }
  }
  return r;
}

namespace detail {

template <class T>
MultiVec<T> bullet_blade(const MultiVec<T>& alpha, unsigned mask) {
  const int m = alpha.dim();
  const unsigned low = mask & (~mask + 1u);
  const unsigned rest = mask & ~low;
  const MultiVec<T> first = MultiVec<T>::blade(m, low);
  if (rest == 0u) return interior(alpha, first);
  // e_mask = e_low ∧ e_rest with grades p=1, q=|rest|.
  const MultiVec<T> tail = MultiVec<T>::blade(m, rest);
  MultiVec<T> r = wedge(interior(alpha, first), tail);
  const MultiVec<T> inner = wedge(bullet_blade(alpha, rest), first);
  if (std::popcount(rest) & 1)
    r -= inner;
  else
    r += inner;
  return r;
}

}  // namespace detail

// First-order contraction: α•v = α⌐v for 1-vectors, extended by the graded Leibniz rule.
template <class T>
MultiVec<T> contract_bullet(const MultiVec<T>& alpha, const MultiVec<T>& beta) {
  if (alpha.dim() != beta.dim()) throw std::invalid_argument("bullet: dimension mismatch");
  const int g = alpha.grade() + beta.grade() - 2;
  if (beta.grade() < 1 || alpha.grade() < 1 || g > alpha.dim())
    throw std::invalid_argument("bullet: undefined grade combination");
  MultiVec<T> r(alpha.dim(), g);
  for (int i = 0; i < beta.size(); ++i) {
    if (beta[i] == T{}) continue;
    r += detail::bullet_blade(alpha, beta.mask(i)) * beta[i];
  }
  return r;
}

template <class T>
T inner(const MultiVec<T>& a, const MultiVec<T>& b) {
  if (a.dim() != b.dim() || a.grade() != b.grade()) throw std::invalid_argument("inner: shape mismatch");
  T s{};
  for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

template <class T>
double norm(const MultiVec<T>& a) {
  return std::sqrt(static_cast<double>(inner(a, a)));
}

}  // namespace willmore
