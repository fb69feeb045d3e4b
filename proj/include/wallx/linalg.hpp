#pragma once
// Exact rational linear algebra at desk scale: RREF, kernels, solves,
// determinants/minors. Everything is O(n^3)-naive over Q, which is plenty
// for rank <= 3, m <= 10 inputs and the degree-by-degree ring builds.

#include <optional>

#include "wallx/common.hpp"

namespace wallx {

using Mat = std::vector<VecQ>;  // row-major

inline Mat mat_identity(size_t n) {
  Mat m(n, VecQ(n, Q(0)));
  for (size_t i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

inline Mat mat_transpose(const Mat& a) {
  if (a.empty()) return {};
  Mat t(a[0].size(), VecQ(a.size()));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a[i].size(); ++j) t[j][i] = a[i][j];
  return t;
}

inline VecQ mat_vec(const Mat& a, const VecQ& x) {
  VecQ y(a.size(), Q(0));
  for (size_t i = 0; i < a.size(); ++i) y[i] = dotq(a[i], x);
  return y;
}

inline Mat mat_mul(const Mat& a, const Mat& b) {
  Mat c(a.size(), VecQ(b.empty() ? 0 : b[0].size(), Q(0)));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t k = 0; k < b.size(); ++k) {
      if (a[i][k] == 0) continue;
      for (size_t j = 0; j < b[k].size(); ++j) c[i][j] += a[i][k] * b[k][j];
    }
  return c;
}

// In-place reduced row echelon form; returns the pivot column of each pivot
// row (row order = pivot order).
inline std::vector<size_t> rref(Mat& m) {
  std::vector<size_t> pivots;
  size_t rows = m.size(), cols = rows ? m[0].size() : 0, r = 0;
  for (size_t c = 0; c < cols && r < rows; ++c) {
    size_t sel = r;
    while (sel < rows && m[sel][c] == 0) ++sel;
    if (sel == rows) continue;
    std::swap(m[sel], m[r]);
    Q inv = Q(1) / m[r][c];
    for (size_t j = c; j < cols; ++j) m[r][j] *= inv;
    for (size_t i = 0; i < rows; ++i) {
      if (i == r || m[i][c] == 0) continue;
      Q f = m[i][c];
      for (size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

inline size_t mat_rank(Mat m) { return rref(m).size(); }

// Basis of { x : A x = 0 }.
inline std::vector<VecQ> nullspace(Mat a) {
  size_t cols = a.empty() ? 0 : a[0].size();
  auto pivots = rref(a);
  std::vector<bool> is_pivot(cols, false);
  for (size_t c : pivots) is_pivot[c] = true;
  std::vector<VecQ> basis;
  for (size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    VecQ v(cols, Q(0));
    v[f] = 1;
    for (size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -a[r][f];
    basis.push_back(v);
  }
  return basis;
}

// One solution of A x = b, or nullopt if inconsistent.
inline std::optional<VecQ> solve(Mat a, const VecQ& b) {
  require(a.size() == b.size(), Err::InternalError, "solve: size mismatch");
  size_t cols = a.empty() ? 0 : a[0].size();
  for (size_t i = 0; i < a.size(); ++i) a[i].push_back(b[i]);
  auto pivots = rref(a);
  if (!pivots.empty() && pivots.back() == cols) return std::nullopt;
  VecQ x(cols, Q(0));
  for (size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = a[r][cols];
  return x;
}

inline std::optional<Mat> mat_inverse(const Mat& a) {
  size_t n = a.size();
  Mat w = a;
  for (size_t i = 0; i < n; ++i) {
    VecQ e(n, Q(0));
    e[i] = 1;
    for (size_t j = 0; j < n; ++j) w[j].push_back(e[j]);
  }
  auto pivots = rref(w);
  if (pivots.size() < n) return std::nullopt;
  Mat inv(n, VecQ(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) inv[i][j] = w[i][n + j];
  return inv;
}

inline Q det(Mat m) {
  size_t n = m.size();
  Q d = 1;
  for (size_t c = 0; c < n; ++c) {
    size_t sel = c;
    while (sel < n && m[sel][c] == 0) ++sel;
    if (sel == n) return 0;
    if (sel != c) { std::swap(m[sel], m[c]); d = -d; }
    d *= m[c][c];
    Q inv = Q(1) / m[c][c];
    for (size_t i = c + 1; i < n; ++i) {
      if (m[i][c] == 0) continue;
      Q f = m[i][c] * inv;
      for (size_t j = c; j < n; ++j) m[i][j] -= f * m[c][j];
    }
  }
  return d;
}

// All k-subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<size_t>> subsets_of_size(size_t n, size_t k) {
  std::vector<std::vector<size_t>> out;
  std::vector<size_t> cur;
  auto rec = [&](auto&& self, size_t start) -> void {
    if (cur.size() == k) { out.push_back(cur); return; }
    for (size_t i = start; i + (k - cur.size()) <= n; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

// Primitive integer basis of { c in Z^m : sum_j c_j row_j = 0 } for an m x r
// integer row matrix. Spans the Q-kernel; primitive scaling per generator is
// all the downstream fan geometry needs.
inline std::vector<VecI> integer_kernel(const std::vector<VecI>& rows) {
  Mat a;  // r x m: columns are the rows of the input
  if (rows.empty()) return {};
  size_t m = rows.size(), r = rows[0].size();
  a.assign(r, VecQ(m));
  for (size_t j = 0; j < m; ++j)
    for (size_t i = 0; i < r; ++i) a[i][j] = rows[j][i];
  std::vector<VecI> out;
  for (const VecQ& v : nullspace(a)) out.push_back(primitive(v));
  return out;
}

}  // namespace wallx
