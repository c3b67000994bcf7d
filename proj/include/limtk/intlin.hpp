#pragma once

// Small exact integer linear algebra: Smith normal form with transform
// tracking, lattice membership with coordinates, determinants. Matrices are
// dense row-major vectors of long long; all inputs here are tiny.

#include <cstdlib>
#include <vector>

#include "limtk/word.hpp"

namespace limtk {

using IMat = std::vector<std::vector<long long>>;  // rows
using IVec = std::vector<long long>;

inline IMat identity_mat(int n) {
  IMat m(static_cast<size_t>(n), IVec(static_cast<size_t>(n), 0));
  for (int i = 0; i < n; ++i) m[static_cast<size_t>(i)][static_cast<size_t>(i)] = 1;
  return m;
}

inline IMat mat_mul(const IMat& a, const IMat& b) {
  size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
  IMat r(n, IVec(m, 0));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j) {
      long long s = 0;
      for (size_t t = 0; t < k; ++t) s += a[i][t] * b[t][j];
      r[i][j] = s;
    }
  return r;
}

inline IVec mat_apply(const IMat& a, const IVec& v) {
  IVec r(a.size(), 0);
  for (size_t i = 0; i < a.size(); ++i) {
    long long s = 0;
    for (size_t j = 0; j < v.size(); ++j) s += a[i][j] * v[j];
    r[i] = s;
  }
  return r;
}

inline long long det_mat(IMat a) {  // Bareiss, exact
  int n = static_cast<int>(a.size());
  if (n == 0) return 1;
  long long prev = 1, sign = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (a[static_cast<size_t>(k)][static_cast<size_t>(k)] == 0) {
      int p = -1;
      for (int i = k + 1; i < n; ++i)
        if (a[static_cast<size_t>(i)][static_cast<size_t>(k)] != 0) { p = i; break; }
      if (p < 0) return 0;
      std::swap(a[static_cast<size_t>(k)], a[static_cast<size_t>(p)]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j)
        a[static_cast<size_t>(i)][static_cast<size_t>(j)] =
            (a[static_cast<size_t>(i)][static_cast<size_t>(j)] * a[static_cast<size_t>(k)][static_cast<size_t>(k)] -
             a[static_cast<size_t>(i)][static_cast<size_t>(k)] * a[static_cast<size_t>(k)][static_cast<size_t>(j)]) /
            prev;
    prev = a[static_cast<size_t>(k)][static_cast<size_t>(k)];
  }
  return sign * a[static_cast<size_t>(n - 1)][static_cast<size_t>(n - 1)];
}

// Smith decomposition of an n x s matrix: E * A * F = D diagonal, with
// Einv tracked so that the lattice spanned by the columns of A equals
// span{ D[i][i] * column_i(Einv) }.
struct Smith {
  IMat d;     // n x s diagonal
  IMat e;     // n x n, row transform
  IMat einv;  // n x n
  IMat f;     // s x s, column transform
  int rank;
};

inline Smith smith_form(IMat a) {
  int n = static_cast<int>(a.size());
  int s = n ? static_cast<int>(a[0].size()) : 0;
  Smith sm{a, identity_mat(n), identity_mat(n), identity_mat(s), 0};
  auto& d = sm.d;
  auto row_add = [&](int i, int j, long long c) {  // row_i += c*row_j
    for (int t = 0; t < s; ++t) d[static_cast<size_t>(i)][static_cast<size_t>(t)] += c * d[static_cast<size_t>(j)][static_cast<size_t>(t)];
    for (int t = 0; t < n; ++t) sm.e[static_cast<size_t>(i)][static_cast<size_t>(t)] += c * sm.e[static_cast<size_t>(j)][static_cast<size_t>(t)];
    for (int t = 0; t < n; ++t) sm.einv[static_cast<size_t>(t)][static_cast<size_t>(j)] -= c * sm.einv[static_cast<size_t>(t)][static_cast<size_t>(i)];
  };
  auto row_swap = [&](int i, int j) {
    std::swap(d[static_cast<size_t>(i)], d[static_cast<size_t>(j)]);
    std::swap(sm.e[static_cast<size_t>(i)], sm.e[static_cast<size_t>(j)]);
    for (int t = 0; t < n; ++t) std::swap(sm.einv[static_cast<size_t>(t)][static_cast<size_t>(i)], sm.einv[static_cast<size_t>(t)][static_cast<size_t>(j)]);
  };
  auto col_add = [&](int i, int j, long long c) {  // col_i += c*col_j
    for (int t = 0; t < n; ++t) d[static_cast<size_t>(t)][static_cast<size_t>(i)] += c * d[static_cast<size_t>(t)][static_cast<size_t>(j)];
    for (int t = 0; t < s; ++t) sm.f[static_cast<size_t>(t)][static_cast<size_t>(i)] += c * sm.f[static_cast<size_t>(t)][static_cast<size_t>(j)];
  };
  auto col_swap = [&](int i, int j) {
    for (int t = 0; t < n; ++t) std::swap(d[static_cast<size_t>(t)][static_cast<size_t>(i)], d[static_cast<size_t>(t)][static_cast<size_t>(j)]);
    for (int t = 0; t < s; ++t) std::swap(sm.f[static_cast<size_t>(t)][static_cast<size_t>(i)], sm.f[static_cast<size_t>(t)][static_cast<size_t>(j)]);
  };

  int k = 0;
  while (k < n && k < s) {
    // find pivot
    int pi = -1, pj = -1;
    long long best = 0;
    for (int i = k; i < n; ++i)
      for (int j = k; j < s; ++j) {
        long long v = std::llabs(d[static_cast<size_t>(i)][static_cast<size_t>(j)]);
        if (v != 0 && (best == 0 || v < best)) { best = v; pi = i; pj = j; }
      }
    if (pi < 0) break;
    if (pi != k) row_swap(k, pi);
    if (pj != k) col_swap(k, pj);
    bool dirty = false;
    for (int i = k + 1; i < n; ++i) {
      long long q = d[static_cast<size_t>(i)][static_cast<size_t>(k)] / d[static_cast<size_t>(k)][static_cast<size_t>(k)];
      if (q) row_add(i, k, -q);
      if (d[static_cast<size_t>(i)][static_cast<size_t>(k)] != 0) dirty = true;
    }
    for (int j = k + 1; j < s; ++j) {
      long long q = d[static_cast<size_t>(k)][static_cast<size_t>(j)] / d[static_cast<size_t>(k)][static_cast<size_t>(k)];
      if (q) col_add(j, k, -q);
      if (d[static_cast<size_t>(k)][static_cast<size_t>(j)] != 0) dirty = true;
    }
    if (dirty) continue;  // re-pivot on a smaller remainder
    if (d[static_cast<size_t>(k)][static_cast<size_t>(k)] < 0) {
      for (int t = 0; t < s; ++t) d[static_cast<size_t>(k)][static_cast<size_t>(t)] = -d[static_cast<size_t>(k)][static_cast<size_t>(t)];
      for (int t = 0; t < n; ++t) sm.e[static_cast<size_t>(k)][static_cast<size_t>(t)] = -sm.e[static_cast<size_t>(k)][static_cast<size_t>(t)];
      for (int t = 0; t < n; ++t) sm.einv[static_cast<size_t>(t)][static_cast<size_t>(k)] = -sm.einv[static_cast<size_t>(t)][static_cast<size_t>(k)];
    }
    ++k;
  }
  sm.rank = k;
  return sm;
}

// Solves sum_i x_i * basis_i = v over the integers. basis holds column
// vectors. Returns false if v is outside the lattice.
inline bool lattice_contains(const std::vector<IVec>& basis, const IVec& v, IVec* coords = nullptr) {
  int n = static_cast<int>(v.size());
  int s = static_cast<int>(basis.size());
  if (s == 0) {
    for (long long x : v)
      if (x != 0) return false;
    if (coords) coords->clear();
    return true;
  }
  IMat a(static_cast<size_t>(n), IVec(static_cast<size_t>(s), 0));
  for (int j = 0; j < s; ++j)
    for (int i = 0; i < n; ++i) a[static_cast<size_t>(i)][static_cast<size_t>(j)] = basis[static_cast<size_t>(j)][static_cast<size_t>(i)];
  Smith sm = smith_form(a);
  IVec ev = mat_apply(sm.e, v);
  IVec y(static_cast<size_t>(s), 0);
  for (int i = 0; i < n; ++i) {
    long long di = (i < sm.rank) ? sm.d[static_cast<size_t>(i)][static_cast<size_t>(i)] : 0;
    if (i < sm.rank) {
      if (ev[static_cast<size_t>(i)] % di != 0) return false;
      y[static_cast<size_t>(i)] = ev[static_cast<size_t>(i)] / di;
    } else if (ev[static_cast<size_t>(i)] != 0) {
      return false;
    }
  }
  if (coords) *coords = mat_apply(sm.f, y);
  return true;
}

// True iff the linear map given by `rows` (each row a functional) is
// injective on the lattice spanned by `basis` (columns).
inline bool injective_on_lattice(const std::vector<IVec>& rows, const std::vector<IVec>& basis) {
  int s = static_cast<int>(basis.size());
  if (s == 0) return true;
  int m = static_cast<int>(rows.size());
  IMat a(static_cast<size_t>(m), IVec(static_cast<size_t>(s), 0));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < s; ++j) {
      long long acc = 0;
      for (size_t t = 0; t < rows[static_cast<size_t>(i)].size(); ++t)
        acc += rows[static_cast<size_t>(i)][t] * basis[static_cast<size_t>(j)][t];
      a[static_cast<size_t>(i)][static_cast<size_t>(j)] = acc;
    }
  return smith_form(a).rank == s;
}

inline bool is_zero_vec(const IVec& v) {
  for (long long x : v)
    if (x != 0) return false;
  return true;
}

}  // namespace limtk
