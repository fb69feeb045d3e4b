#pragma once
// Formal series carriers. A ZClass is a Laurent polynomial in z with
// coefficients in one sector ring. An ExpSeries is a finite expansion
// sum of terms  t^n (log t)^ell z^p (class),  the shape produced by
// multiplying coefficient tables by z exp(sigma/z); box operators act on it
// through honest derivations (Leibniz on the log powers).

#include <map>
#include <numeric>

#include "wallx/cohomology.hpp"

namespace wallx {

struct ZClass {
  int sector = -1;
  std::map<int, RingVec> c;  // z exponent -> class

  bool empty() const { return c.empty(); }
};

inline void zc_prune(ZClass& a) {
  for (auto it = a.c.begin(); it != a.c.end();)
    it = is_zero(it->second) ? a.c.erase(it) : std::next(it);
}

inline bool zc_is_zero(const ZClass& a) {
  for (auto& [p, v] : a.c)
    if (!is_zero(v)) return false;
  return true;
}

inline ZClass zc_one(const SectorRing& R, int sector) {
  ZClass z;
  z.sector = sector;
  z.c[0] = R.one();
  return z;
}

inline ZClass zc_zero_like(const SectorRing& R, int sector) {
  (void)R;
  ZClass z;
  z.sector = sector;
  return z;
}

inline void zc_acc(const SectorRing& R, ZClass& a, const ZClass& b, const Q& s = Q(1)) {
  if (b.c.empty()) return;
  if (a.sector < 0) a.sector = b.sector;
  require(a.sector == b.sector, Err::TagMismatch,
          "combined classes from different sectors");
  for (auto& [p, v] : b.c) {
    auto it = a.c.find(p);
    if (it == a.c.end()) it = a.c.emplace(p, R.zero()).first;
    for (size_t i = 0; i < R.dim; ++i) it->second[i] += s * v[i];
  }
}

inline ZClass zc_scale(ZClass a, const Q& s) {
  for (auto& [p, v] : a.c)
    for (Q& x : v) x *= s;
  return a;
}

inline ZClass zc_zshift(ZClass a, int m) {
  if (m == 0) return a;
  ZClass out;
  out.sector = a.sector;
  for (auto& [p, v] : a.c) out.c[p + m] = v;
  return out;
}

inline ZClass zc_mul_ring(const SectorRing& R, const ZClass& a, const RingVec& w) {
  ZClass out;
  out.sector = a.sector;
  for (auto& [p, v] : a.c) {
    RingVec m = R.mul(v, w);
    if (!is_zero(m)) out.c[p] = std::move(m);
  }
  return out;
}

// Multiply by (u + a z) where u is a (nilpotent) degree-1 class.
inline ZClass zc_mul_linear(const SectorRing& R, const ZClass& x, const RingVec& u,
                            const Q& a) {
  ZClass out = zc_mul_ring(R, x, u);
  zc_acc(R, out, zc_zshift(zc_scale(x, a), 1));
  zc_prune(out);
  if (out.sector < 0) out.sector = x.sector;
  return out;
}

// Divide by (u + a z): geometric series in the nilpotent part,
//   1/(u + a z) = sum_{i>=0} (-1)^i u^i / (a z)^{i+1}.
inline ZClass zc_div_linear(const SectorRing& R, const ZClass& x, const RingVec& u,
                            const Q& a) {
  require(a != 0, Err::PoleFlag, "division by a purely nilpotent factor");
  ZClass out;
  out.sector = x.sector;
  for (auto& [p, v] : x.c) {
    RingVec w = v;
    Q f = 1 / a;
    int shift = -1;
    while (!is_zero(w)) {
      ZClass piece;
      piece.sector = x.sector;
      piece.c[p + shift] = w;
      zc_acc(R, out, zc_scale(piece, f));
      w = R.mul(w, u);
      f = -f / a;
      shift -= 1;
    }
  }
  zc_prune(out);
  return out;
}

inline ZClass zc_mul(const SectorRing& R, const ZClass& a, const ZClass& b) {
  if (!a.c.empty() && !b.c.empty())
    require(a.sector == b.sector, Err::TagMismatch,
            "multiplied classes from different sectors");
  ZClass out;
  out.sector = a.sector >= 0 ? a.sector : b.sector;
  for (auto& [p1, c1] : a.c)
    for (auto& [p2, c2] : b.c) {
      RingVec m = R.mul(c1, c2);
      if (is_zero(m)) continue;
      auto it = out.c.find(p1 + p2);
      if (it == out.c.end()) it = out.c.emplace(p1 + p2, R.zero()).first;
      for (size_t i = 0; i < R.dim; ++i) it->second[i] += m[i];
    }
  zc_prune(out);
  return out;
}

inline bool zc_eq(const SectorRing& R, const ZClass& a, const ZClass& b) {
  ZClass d = a;
  zc_acc(R, d, zc_scale(b, Q(-1)));
  return zc_is_zero(d);
}

inline std::string zc_str(const SectorRing& R, const ZClass& a) {
  std::string s;
  for (auto& [p, v] : a.c) {
    if (is_zero(v)) continue;
    if (!s.empty()) s += "  +  ";
    s += "z^" + std::to_string(p) + " * (" + R.class_str(v) + ")";
  }
  return s.empty() ? "0" : s;
}

// ---------------------------------------------------------------------------

struct ExpKey {
  VecI n;       // key in chamber-basis coordinates
  VecI logpow;  // log t_i exponents
  bool operator<(const ExpKey& o) const {
    if (n != o.n) return n < o.n;
    return logpow < o.logpow;
  }
  bool operator==(const ExpKey& o) const { return n == o.n && logpow == o.logpow; }
};

struct ExpSeries {
  std::map<ExpKey, ZClass> t;
};

// Shared read-only context for series operations on one side.
struct SideCtx {
  const std::vector<VecI>& charges;
  const SideGeom& side;
  const SideCohomology& coh;

  const SectorRing& ring(int sector) const { return coh.sectors[size_t(sector)]; }
};

inline void es_acc(const SideCtx& cx, ExpSeries& a, const ExpSeries& b,
                   const Q& s = Q(1)) {
  for (auto& [k, v] : b.t) {
    auto it = a.t.find(k);
    if (it == a.t.end()) {
      a.t[k] = zc_scale(v, s);
    } else {
      zc_acc(cx.ring(v.sector), it->second, v, s);
    }
  }
}

inline ExpSeries es_scale(ExpSeries a, const Q& s) {
  for (auto& [k, v] : a.t) v = zc_scale(v, s);
  return a;
}

inline ExpSeries es_zmul(ExpSeries a, int m) {
  for (auto& [k, v] : a.t) v = zc_zshift(v, m);
  return a;
}

inline ExpSeries es_shift_key(const ExpSeries& a, const VecI& shift) {
  ExpSeries out;
  for (auto& [k, v] : a.t) {
    ExpKey nk = k;
    for (size_t i = 0; i < nk.n.size(); ++i) nk.n[i] += shift[i];
    out.t[nk] = v;
  }
  return out;
}

inline void es_prune(ExpSeries& a) {
  for (auto it = a.t.begin(); it != a.t.end();) {
    zc_prune(it->second);
    it = it->second.c.empty() ? a.t.erase(it) : std::next(it);
  }
}

// z * (derivation paired with the dual-lattice row Dv). Acting on one term,
//   z del ( t^n (log t)^ell c ) =
//     (Dv . k) z * t^n (log t)^ell c  +  sum_i ell_i (Dv . q_i) z * t^n (log t)^{ell - e_i} c,
// where k is the ambient key of n.
inline ExpSeries zdel(const SideCtx& cx, const ExpSeries& s, const VecQ& Dv) {
  ExpSeries out;
  size_t r = cx.side.pbasis.size();
  for (auto& [key, val] : s.t) {
    VecQ k = cx.side.key_ambient(key.n);
    Q Dk = dotq(Dv, k);
    if (Dk != 0) {
      ExpSeries piece;
      piece.t[key] = zc_zshift(zc_scale(val, Dk), 1);
      es_acc(cx, out, piece);
    }
    for (size_t i = 0; i < r; ++i) {
      if (key.logpow[i] == 0) continue;
      Q ai = dotq(Dv, cx.side.qbasis[i]);
      if (ai == 0) continue;
      ExpKey nk = key;
      nk.logpow[i] -= 1;
      ExpSeries piece;
      piece.t[nk] = zc_zshift(zc_scale(val, ai * key.logpow[i]), 1);
      es_acc(cx, out, piece);
    }
  }
  es_prune(out);
  return out;
}

// exp(sign * sigma / z) in one sector: finite list of (logpow, z-class)
// factors, sigma = sum_i theta(p_i) log t_i.
inline std::vector<std::pair<VecI, ZClass>> sigma_exp(const SideCtx& cx, int sector,
                                                      int sign) {
  const SectorRing& R = cx.ring(sector);
  size_t r = cx.side.pbasis.size();
  std::vector<RingVec> th(r);
  for (size_t i = 0; i < r; ++i) th[i] = R.theta(cx.side.pbasis[i]);
  std::vector<std::pair<VecI, ZClass>> out;
  VecI ell(r, 0);
  auto rec = [&](auto&& self, size_t i, RingVec acc, Q fac) -> void {
    if (i == r) {
      ZClass z;
      z.sector = sector;
      z.c[-int(std::accumulate(ell.begin(), ell.end(), 0LL))] =
          R.scale(acc, fac);
      out.push_back({ell, std::move(z)});
      return;
    }
    RingVec cur = acc;
    for (long long e = 0;; ++e) {
      ell[i] = e;
      Q f = fac;
      for (long long t = 1; t <= e; ++t) f /= t;
      self(self, i + 1, cur, f * (sign < 0 && (e % 2) ? Q(-1) : Q(1)));
      cur = R.mul(cur, th[i]);
      if (is_zero(cur)) break;
    }
    ell[i] = 0;
  };
  rec(rec, 0, R.one(), Q(1));
  return out;
}

}  // namespace wallx
