#pragma once
// Coefficient tables of the hypergeometric series attached to one chamber:
//   I = z exp(sigma/z) sum_n t^n I_n,   sigma = sum_i theta(p_i) log t_i,
// with I_n a product over charges of linear z-factors in the sector ring of
// the key. Also: the Euler-twisted table, the wall-block partition of keys,
// and conversion to/from the log-expanded form.

#include "wallx/series.hpp"

namespace wallx {

struct CoeffTable {
  std::map<VecI, ZClass> c;  // key (chamber coordinates) -> coefficient
  Q order;                   // every key with deg <= order is present
};

// I_n as a finite product: for each charge row D_j with pairing D = D_j . k,
//   D > 0: divide by  prod_{a in (0, D], <a> = <D>} (u_j + a z)
//   D <= 0: multiply by prod_{a in (D, 0], <a> = <D>} (u_j + a z)
inline ZClass coeff_at_key(const SideCtx& cx, const VecI& n, int sector) {
  const SectorRing& R = cx.ring(sector);
  VecQ k = cx.side.key_ambient(n);
  ZClass acc = zc_one(R, sector);
  for (size_t j = 0; j < cx.charges.size(); ++j) {
    Q D = dotq(to_vecq(cx.charges[j]), k);
    const RingVec& uj = R.ambient_class[j];
    if (D > 0) {
      for (Q a = (q_frac(D) == 0 ? Q(1) : q_frac(D)); a <= D; a += 1)
        acc = zc_div_linear(R, acc, uj, a);
    } else {
      for (Q a = (q_frac(D) == 0 ? Q(0) : q_frac(D) - 1); a > D; a -= 1)
        acc = zc_mul_linear(R, acc, uj, a);
    }
  }
  return acc;
}

// All keys n >= 0 with deg(n) <= order; keys with no box sector are skipped.
inline CoeffTable build_coeff_table(const SideCtx& cx, const Q& order) {
  for (const Q& w : cx.side.degw)
    require(w > 0, Err::InternalError, "degree weights must be positive");
  CoeffTable out;
  out.order = order;
  size_t r = cx.side.pbasis.size();
  VecI n(r, 0);
  size_t count = 0;
  auto rec = [&](auto&& self, size_t i, Q left) -> void {
    if (i == r) {
      auto sec = cx.side.sector_of_key(n);
      if (sec) {
        require(++count <= 200000, Err::ConfigError, "coefficient table too large");
        out.c[n] = coeff_at_key(cx, n, int(*sec));
      }
      return;
    }
    for (long long e = 0;; ++e) {
      n[i] = e;
      Q used = Q(e) * cx.side.degw[i];
      if (used > left) break;
      self(self, i + 1, left - used);
    }
    n[i] = 0;
  };
  rec(rec, 0, order);
  return out;
}

// Euler twist data: rows E in the dual lattice. Each must pair integrally
// with every box and, when a wall is present, lie in the closed chamber of
// both sides and pair to zero with the wall direction.
inline void validate_twists(const GitModel& g, const std::vector<VecI>& twists) {
  for (const VecI& E : twists) {
    require(E.size() == size_t(g.in.r), Err::ConfigError, "twist rank mismatch");
    VecQ Eq = to_vecq(E);
    auto check_side = [&](const SideGeom& side) {
      require(detail::in_closed_chamber(g.in.charges, side.minimal_anticones, Eq),
              Err::ConfigError, "twist class outside the closed chamber");
      for (const BoxElement& b : side.boxes)
        require(q_is_int(dotq(Eq, b.f)), Err::NonIntegralPairing,
                "twist class pairs fractionally with a box element");
    };
    check_side(g.plus);
    if (g.minus) check_side(*g.minus);
    if (g.wall)
      require(dotq(Eq, to_vecq(g.wall->e)) == 0, Err::ConfigError,
              "twist class does not extend across the wall");
  }
}

// C'_n = prod_j v_j prod_{b=1}^{E_j . k} (v_j + b z) * C_n, v_j = theta(E_j).
inline CoeffTable twist_table(const SideCtx& cx, const CoeffTable& table,
                              const std::vector<VecI>& twists) {
  CoeffTable out;
  out.order = table.order;
  for (auto& [n, val] : table.c) {
    const SectorRing& R = cx.ring(val.sector);
    VecQ k = cx.side.key_ambient(n);
    ZClass acc = val;
    for (const VecI& E : twists) {
      Q Ekq = dotq(to_vecq(E), k);
      require(q_is_int(Ekq) && Ekq >= 0, Err::NonIntegralPairing,
              "twist pairing must be a nonnegative integer");
      long long M = static_cast<long long>(q_int(Ekq));
      RingVec v = R.theta(to_vecq(E));
      acc = zc_mul_ring(R, acc, v);
      for (long long b = 1; b <= M; ++b)
        acc = zc_mul_linear(R, acc, v, Q(b));
    }
    out.c[n] = std::move(acc);
  }
  return out;
}

// Wall blocks: keys l, k are equivalent when l - k is an integer multiple of
// the wall direction. In chamber coordinates: equal n_i for i < r and
// congruent n_r mod |p_r . e|. Canonical representative: n_r reduced.
inline VecI block_rep(const VecI& n, const Q& pe) {
  require(q_is_int(pe) && pe != 0, Err::InternalError,
          "wall pairing must be a nonzero integer");
  long long m = std::llabs(static_cast<long long>(q_int(pe)));
  VecI rep = n;
  long long v = rep.back() % m;
  if (v < 0) v += m;
  rep.back() = v;
  return rep;
}

inline std::map<VecI, std::vector<VecI>> block_partition(const CoeffTable& table,
                                                         const Q& pe) {
  std::map<VecI, std::vector<VecI>> out;
  for (auto& [n, val] : table.c) out[block_rep(n, pe)].push_back(n);
  return out;
}

// Full log-expanded series  z exp(sigma/z) sum t^n I_n.
inline ExpSeries expand_table(const SideCtx& cx, const CoeffTable& table) {
  ExpSeries out;
  std::map<int, std::vector<std::pair<VecI, ZClass>>> expo;  // per sector
  for (auto& [n, val] : table.c) {
    if (zc_is_zero(val)) continue;
    auto it = expo.find(val.sector);
    if (it == expo.end())
      it = expo.emplace(val.sector, sigma_exp(cx, val.sector, +1)).first;
    const SectorRing& R = cx.ring(val.sector);
    for (auto& [ell, fac] : it->second) {
      ZClass term = zc_zshift(zc_mul(R, fac, val), 1);  // +1: overall factor z
      if (zc_is_zero(term)) continue;
      ExpSeries piece;
      piece.t[ExpKey{n, ell}] = std::move(term);
      es_acc(cx, out, piece);
    }
  }
  es_prune(out);
  return out;
}

// Invert expand_table: multiply by exp(-sigma/z), require every log power to
// cancel, undo the overall z. Keys beyond max_deg are dropped (operators
// push content past the built order; the caller bounds what is trustworthy).
inline std::map<VecI, ZClass> strip_prefactor(const SideCtx& cx, const ExpSeries& s,
                                              const Q& max_deg) {
  ExpSeries acc;
  std::map<int, std::vector<std::pair<VecI, ZClass>>> expo;
  for (auto& [key, val] : s.t) {
    if (cx.side.deg_of(key.n) > max_deg) continue;
    auto it = expo.find(val.sector);
    if (it == expo.end())
      it = expo.emplace(val.sector, sigma_exp(cx, val.sector, -1)).first;
    const SectorRing& R = cx.ring(val.sector);
    for (auto& [ell, fac] : it->second) {
      ZClass term = zc_zshift(zc_mul(R, fac, val), -1);  // -1: undo overall z
      if (zc_is_zero(term)) continue;
      ExpKey nk = key;
      for (size_t i = 0; i < nk.logpow.size(); ++i) nk.logpow[i] += ell[i];
      ExpSeries piece;
      piece.t[nk] = std::move(term);
      es_acc(cx, acc, piece);
    }
  }
  es_prune(acc);
  std::map<VecI, ZClass> out;
  for (auto& [key, val] : acc.t) {
    bool pure = true;
    for (long long e : key.logpow) pure = pure && e == 0;
    require(pure, Err::InternalError, "log powers did not cancel under stripping");
    out[key.n] = val;
  }
  return out;
}

}  // namespace wallx
