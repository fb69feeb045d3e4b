#pragma once
// Exact two-phase simplex (Bland's rule, rational arithmetic) for the small
// feasibility/optimization problems in cone and chamber logic:
//   max c.x  s.t.  A x = b, x >= 0.
// Bland's rule guarantees termination; everything is exact over Q.

#include "wallx/linalg.hpp"

namespace wallx {

struct LpResult {
  enum Status { Infeasible, Optimal, Unbounded } status = Infeasible;
  Q value;  // objective at optimum (valid when Optimal)
  VecQ x;   // a maximizer over the structural variables (when Optimal)
};

namespace detail {

struct Tableau {
  size_t m = 0, n = 0;        // rows, columns (excluding rhs)
  Mat t;                      // m x (n+1); last column = rhs, kept >= 0
  VecQ red;                   // reduced costs; red[n] = -objective
  std::vector<size_t> basis;  // basic variable per row

  void pivot(size_t r, size_t jin) {
    Q inv = Q(1) / t[r][jin];
    for (Q& v : t[r]) v *= inv;
    for (size_t i = 0; i < m; ++i) {
      if (i == r || t[i][jin] == 0) continue;
      Q f = t[i][jin];
      for (size_t j = 0; j <= n; ++j) t[i][j] -= f * t[r][j];
    }
    if (red[jin] != 0) {
      Q f = red[jin];
      for (size_t j = 0; j <= n; ++j) red[j] -= f * t[r][j];
    }
    basis[r] = jin;
  }

  void price(const VecQ& c) {  // c has size n (pad artificials with 0)
    red.assign(n + 1, Q(0));
    for (size_t j = 0; j <= n; ++j) {
      Q v = (j < n && j < c.size()) ? c[j] : Q(0);
      for (size_t i = 0; i < m; ++i) {
        size_t bi = basis[i];
        const Q cb = bi < c.size() ? c[bi] : Q(0);
        if (cb != 0 && t[i][j] != 0) v -= cb * t[i][j];
      }
      red[j] = v;
    }
  }

  // Bland iteration to optimality. Returns false iff unbounded.
  bool run() {
    for (;;) {
      size_t jin = n;
      for (size_t j = 0; j < n; ++j)
        if (red[j] > 0) { jin = j; break; }
      if (jin == n) return true;
      size_t row = m;
      Q best = 0;
      for (size_t i = 0; i < m; ++i) {
        if (t[i][jin] <= 0) continue;
        Q ratio = t[i][n] / t[i][jin];
        if (row == m || ratio < best ||
            (ratio == best && basis[i] < basis[row]))
          { row = i; best = ratio; }
      }
      if (row == m) return false;
      pivot(row, jin);
    }
  }
};

}  // namespace detail

// Maximize c.x subject to A x = b, x >= 0 (equality standard form).
inline LpResult lp_max(const VecQ& c, const Mat& a, const VecQ& b) {
  require(a.size() == b.size(), Err::InternalError, "lp: A/b size mismatch");
  size_t m = a.size();
  size_t ns = c.size();
  for (const VecQ& row : a)
    require(row.size() == ns, Err::InternalError, "lp: A/c size mismatch");

  detail::Tableau tb;
  tb.m = m;
  tb.n = ns + m;  // structural + artificial
  tb.t.assign(m, VecQ(tb.n + 1, Q(0)));
  tb.basis.resize(m);
  for (size_t i = 0; i < m; ++i) {
    Q sign = b[i] < 0 ? Q(-1) : Q(1);
    for (size_t j = 0; j < ns; ++j) tb.t[i][j] = sign * a[i][j];
    tb.t[i][ns + i] = 1;
    tb.t[i][tb.n] = sign * b[i];
    tb.basis[i] = ns + i;
  }

  // Phase 1: maximize -(sum of artificials).
  VecQ c1(tb.n, Q(0));
  for (size_t j = ns; j < tb.n; ++j) c1[j] = -1;
  tb.price(c1);
  tb.run();  // bounded by construction
  if (-tb.red[tb.n] < 0) return {LpResult::Infeasible, Q(0), {}};

  // Drive residual artificials out of the basis; drop redundant rows.
  for (size_t i = 0; i < tb.m;) {
    if (tb.basis[i] < ns) { ++i; continue; }
    size_t j = 0;
    while (j < ns && tb.t[i][j] == 0) ++j;
    if (j < ns) { tb.pivot(i, j); ++i; }
    else {
      tb.t.erase(tb.t.begin() + i);
      tb.basis.erase(tb.basis.begin() + i);
      --tb.m;
    }
  }
  // Truncate artificial columns.
  for (VecQ& row : tb.t) {
    row[ns] = row[tb.n];
    row.resize(ns + 1);
  }
  tb.n = ns;
  tb.m = tb.t.size();

  // Phase 2.
  tb.price(c);
  if (!tb.run()) return {LpResult::Unbounded, Q(0), {}};
  LpResult res;
  res.status = LpResult::Optimal;
  res.value = -tb.red[tb.n];
  res.x.assign(ns, Q(0));
  for (size_t i = 0; i < tb.m; ++i)
    if (tb.basis[i] < ns) res.x[tb.basis[i]] = tb.t[i][ns];
  return res;
}

inline bool lp_feasible(const Mat& a, const VecQ& b, size_t nvars) {
  VecQ c(nvars, Q(0));
  return lp_max(c, a, b).status == LpResult::Optimal;
}

}  // namespace wallx
