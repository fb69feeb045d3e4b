#pragma once
// Box-operator annihilation checks. For a lattice direction d the operator
//   Delta_d = prod_{d_j>0} prod_{l=0}^{d_j-1} (z del_j - l z)
//           - t^d prod_{d_j<0} prod_{l=0}^{-d_j-1} (z del_j - l z)
// annihilates the full series. Two independent routes are provided: the
// honest one applies the derivations to the log-expanded series and checks
// that everything inside the trustworthy degree window cancels; the table
// route checks the equivalent two-term coefficient recursion.

#include "wallx/ifunction.hpp"

namespace wallx {

// Pairings dj = D_j . d of every charge with the direction.
inline VecI charge_pairings(const SideCtx& cx, const VecI& d) {
  VecI djs(cx.charges.size());
  for (size_t j = 0; j < cx.charges.size(); ++j) {
    Q v = dotq(to_vecq(cx.charges[j]), d);
    require(q_is_int(v), Err::InternalError, "charge pairing not integral");
    djs[j] = static_cast<long long>(q_int(v));
  }
  return djs;
}

// prod over charges with sign*dj > 0 of prod_{l=0}^{sign*dj - 1} (z del_j - l z),
// composed by honest derivations on the expansion.
inline ExpSeries apply_factor_word(const SideCtx& cx, ExpSeries s, const VecI& djs,
                                   int sign) {
  for (size_t j = 0; j < djs.size(); ++j) {
    long long m = sign * djs[j];
    for (long long l = 0; l < m; ++l) {
      ExpSeries der = zdel(cx, s, to_vecq(cx.charges[j]));
      es_acc(cx, der, es_zmul(std::move(s), 1), Q(-l));
      s = std::move(der);
      es_prune(s);
    }
  }
  return s;
}

struct GkzCheck {
  bool ok = true;
  size_t keys_checked = 0;
  std::string first_failure;
};

// Honest route: Delta_d applied to the expansion of the table; every term
// whose key degree is within the window  deg <= order + min(0, <omega, d>)
// must vanish identically.
inline GkzCheck gkz_operator_check(const SideCtx& cx, const CoeffTable& table,
                                   const VecI& d) {
  require(d.size() == cx.side.omega.size(), Err::ConfigError,
          "direction rank mismatch");
  VecQ kshift_q(cx.side.pbasis.size());
  for (size_t i = 0; i < cx.side.pbasis.size(); ++i)
    kshift_q[i] = dotq(cx.side.pbasis[i], to_vecq(d));
  VecI kshift(kshift_q.size());
  for (size_t i = 0; i < kshift_q.size(); ++i) {
    require(q_is_int(kshift_q[i]), Err::InternalError,
            "lattice direction has fractional chamber coordinates");
    kshift[i] = static_cast<long long>(q_int(kshift_q[i]));
  }
  Q wd = dotq(cx.side.omega, to_vecq(d));
  Q window = table.order + (wd < 0 ? wd : Q(0));
  require(window >= 0, Err::WindowExceeded,
          "table order too small for this direction");

  VecI djs = charge_pairings(cx, d);
  ExpSeries base = expand_table(cx, table);
  ExpSeries lhs = apply_factor_word(cx, base, djs, +1);
  ExpSeries rhs = apply_factor_word(cx, base, djs, -1);
  rhs = es_shift_key(rhs, kshift);
  es_acc(cx, lhs, rhs, Q(-1));
  es_prune(lhs);

  GkzCheck out;
  for (auto& [key, val] : lhs.t) {
    // Every term with deg <= window is fully determined by the built table
    // (negative keys included: their only source is the shifted word), so it
    // must cancel identically.
    if (cx.side.deg_of(key.n) > window) continue;
    if (!zc_is_zero(val)) {
      out.ok = false;
      if (out.first_failure.empty())
        out.first_failure =
            "residue at key " + vec_str(to_vecq(key.n)) + ": " +
            zc_str(cx.ring(val.sector), val);
    }
  }
  // count keys genuinely inside the window (cancellation empties the map)
  for (auto& [n, val] : table.c)
    if (cx.side.deg_of(n) <= window) ++out.keys_checked;
  require(out.keys_checked > 0, Err::WindowExceeded, "empty check window");
  return out;
}

// Table route: with A_n = prod_{d_j>0} prod_{l=0}^{d_j-1} (u_j + (D_j.k - l) z)
// and B_n its negative-entry analogue, annihilation is equivalent to
//   A_n C_n == B_{n - shift} C_{n - shift}   (absent keys read as zero).
inline GkzCheck gkz_recursion_check(const SideCtx& cx, const CoeffTable& table,
                                    const VecI& d) {
  VecQ kshift_q(cx.side.pbasis.size());
  for (size_t i = 0; i < cx.side.pbasis.size(); ++i)
    kshift_q[i] = dotq(cx.side.pbasis[i], to_vecq(d));
  VecI kshift(kshift_q.size());
  for (size_t i = 0; i < kshift_q.size(); ++i) {
    require(q_is_int(kshift_q[i]), Err::InternalError,
            "lattice direction has fractional chamber coordinates");
    kshift[i] = static_cast<long long>(q_int(kshift_q[i]));
  }

  VecI djs = charge_pairings(cx, d);
  auto side_product = [&](const SectorRing& R, int sector, const VecI& n,
                          int sign) {
    VecQ k = cx.side.key_ambient(n);
    ZClass acc = zc_one(R, sector);
    for (size_t j = 0; j < djs.size(); ++j) {
      long long m = sign * djs[j];
      Q Dk = dotq(to_vecq(cx.charges[j]), k);
      for (long long l = 0; l < m; ++l)
        acc = zc_mul_linear(R, acc, R.ambient_class[j], Dk - l);
    }
    return acc;
  };

  GkzCheck out;
  for (auto& [n, val] : table.c) {
    VecI prev(n.size());
    bool prev_ok = true;
    for (size_t i = 0; i < n.size(); ++i) {
      prev[i] = n[i] - kshift[i];
      prev_ok = prev_ok && prev[i] >= 0;
    }
    const SectorRing& R = cx.ring(val.sector);
    ZClass lhs = zc_mul(R, side_product(R, val.sector, n, +1), val);
    ZClass rhs = zc_zero_like(R, val.sector);
    auto pit = prev_ok ? table.c.find(prev) : table.c.end();
    if (pit != table.c.end()) {
      require(pit->second.sector == val.sector, Err::TagMismatch,
              "lattice-shifted key changed sector");
      rhs = zc_mul(R, side_product(R, val.sector, prev, -1), pit->second);
    } else if (prev_ok && cx.side.deg_of(prev) > table.order) {
      continue;  // source key beyond the built order: slot not checkable
    }
    // remaining absent cases read as zero: outside the quadrant, or a key
    // with no box sector
    ++out.keys_checked;
    if (!zc_eq(R, lhs, rhs)) {
      out.ok = false;
      if (out.first_failure.empty())
        out.first_failure = "recursion fails at key " + vec_str(to_vecq(n));
    }
  }
  require(out.keys_checked > 0, Err::WindowExceeded,
          "no recursion slot is determined at this order");
  return out;
}

// Euler-twist word. On one wall block the pairing E . k is constant, so
//   prod_E prod_{a=0}^{E.k} (z del_E - a z)
// applied to the expanded block equals, after stripping, the twisted table
// restricted to the same block. Checked exactly, block by block.
inline GkzCheck lefschetz_block_check(const SideCtx& cx, const CoeffTable& table,
                                      const std::vector<VecI>& twists,
                                      const Q& pe) {
  CoeffTable tw = twist_table(cx, table, twists);
  auto blocks = block_partition(table, pe);
  GkzCheck out;
  for (auto& [rep, keys] : blocks) {
    CoeffTable sub;
    sub.order = table.order;
    for (const VecI& n : keys) sub.c[n] = table.c.at(n);
    ExpSeries ex = expand_table(cx, sub);
    VecQ krep = cx.side.key_ambient(rep);
    for (const VecI& E : twists) {
      Q Mq = dotq(to_vecq(E), krep);
      require(q_is_int(Mq) && Mq >= 0, Err::NonIntegralPairing,
              "twist pairing must be a nonnegative integer on the block");
      long long M = q_int(Mq);
      for (long long a = 0; a <= M; ++a) {
        ExpSeries der = zdel(cx, ex, to_vecq(E));
        es_acc(cx, der, es_zmul(std::move(ex), 1), Q(-a));
        ex = std::move(der);
        es_prune(ex);
      }
    }
    auto stripped = strip_prefactor(cx, ex, table.order);
    for (const VecI& n : keys) {
      const SectorRing& R = cx.ring(tw.c.at(n).sector);
      auto it = stripped.find(n);
      ZClass got =
          it == stripped.end() ? zc_zero_like(R, tw.c.at(n).sector) : it->second;
      ++out.keys_checked;
      if (!zc_eq(R, got, tw.c.at(n))) {
        out.ok = false;
        if (out.first_failure.empty())
          out.first_failure = "twist word fails at key " + vec_str(to_vecq(n));
      }
    }
    for (auto& [n, val] : stripped)
      if (!zc_is_zero(val) && sub.c.find(n) == sub.c.end()) {
        out.ok = false;
        if (out.first_failure.empty())
          out.first_failure = "twist word leaked outside the block";
      }
  }
  return out;
}

// Prefactor identity: stripping z del_j from the expansion must equal the
// multiplication operator (theta(D_j) + (D_j . k) z) on the raw table.
inline bool prefactor_identity_check(const SideCtx& cx, const CoeffTable& table,
                                     size_t j) {
  ExpSeries ex = expand_table(cx, table);
  ExpSeries der = zdel(cx, ex, to_vecq(cx.charges[j]));
  auto stripped = strip_prefactor(cx, der, table.order);
  for (auto& [n, val] : table.c) {
    const SectorRing& R = cx.ring(val.sector);
    VecQ k = cx.side.key_ambient(n);
    Q Dk = dotq(to_vecq(cx.charges[j]), k);
    ZClass expect = zc_mul_linear(R, val, R.ambient_class[j], Dk);
    auto it = stripped.find(n);
    ZClass got = it == stripped.end() ? zc_zero_like(R, val.sector) : it->second;
    if (!zc_eq(R, got, expect)) return false;
  }
  return true;
}

}  // namespace wallx
