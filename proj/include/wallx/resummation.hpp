#pragma once
// Regularization and resummation across the wall. On the minus side each key
// n carries the x-power
//   lambda_n = lamcoef * (n_r + theta(p_r)/z),   x = ytilde_r^(-p_r.e/sum e),
// and the regularized series divides term n by Gamma(1 + lambda_n). Gamma
// factors are carried as exact symbols (rational base + nilpotent/z part);
// every cancellation is checked, never assumed. The Borel/Laplace step maps
// x^lambda / Gamma(1+lambda) termwise to u^(-lambda); substituting
// ytilde_r = u^(sum e / p_r.e) is then a pure relabel, which makes the
// resummation identity an exact termwise comparison with the original table.

#include <complex>

#include "wallx/gkz.hpp"

namespace wallx {

struct GammaSymbol {
  Q base;       // rational part of the argument
  RingVec nil;  // nilpotent class sitting at z^{-1}
  int sector = -1;
};

inline bool gs_eq(const GammaSymbol& a, const GammaSymbol& b) {
  return a.sector == b.sector && a.base == b.base && a.nil == b.nil;
}

// (b + nil/z) as a z-Laurent class.
inline ZClass gs_linear(const SectorRing& R, int sector, const Q& b,
                        const RingVec& nil) {
  ZClass out;
  out.sector = sector;
  out.c[0] = R.scale(R.one(), b);
  if (!is_zero(nil)) out.c[-1] = nil;
  zc_prune(out);
  return out;
}

// Divide by (base + nil/z): geometric expansion in the nilpotent part.
inline ZClass zc_div_symbol(const SectorRing& R, const ZClass& a, int sector,
                            const Q& base, const RingVec& nil) {
  require(base != 0, Err::PoleFlag,
          "pole: symbol with vanishing rational part");
  ZClass inv;
  inv.sector = sector;
  RingVec pw = R.one();
  Q s = 1 / base;
  for (long long k = 0;; ++k) {
    inv.c[-k] = R.scale(pw, s);
    pw = R.mul(pw, nil);
    s = -s / base;
    if (R.is_zero(pw)) break;
    require(k <= static_cast<long long>(R.top_degree) + 2, Err::InternalError,
            "nilpotent part fails to terminate");
  }
  zc_prune(inv);
  return zc_mul(R, a, inv);
}

// Multiply a by the ratio Gamma(hi)/Gamma(lo). The symbols must agree in
// sector and nilpotent part and differ by an integer; the ratio then reduces
// to a polynomial (or its inverse, which can hit a pole).
inline ZClass gamma_ratio_apply(const SectorRing& R, ZClass a,
                                const GammaSymbol& hi, const GammaSymbol& lo) {
  require(hi.sector == lo.sector && hi.nil == lo.nil, Err::GammaMismatch,
          "symbols differ beyond an integer offset");
  Q off = hi.base - lo.base;
  require(q_is_int(off), Err::GammaMismatch, "symbol offset not integral");
  long long m = q_int(off);
  for (long long i = 0; i < m; ++i)
    a = zc_mul(R, a, gs_linear(R, hi.sector, lo.base + i, lo.nil));
  for (long long i = 0; i < -m; ++i)
    a = zc_div_symbol(R, a, hi.sector, hi.base + i, hi.nil);
  return a;
}

struct RegKey {
  VecI nrest;  // first r-1 chamber coordinates
  Q xb;        // rational x-exponent, lamcoef * n_r
  bool operator<(const RegKey& o) const {
    if (nrest != o.nrest) return nrest < o.nrest;
    return xb < o.xb;
  }
};

struct RegTerm {
  ZClass num;       // polynomial part of the coefficient
  GammaSymbol den;  // divided by Gamma(base + nil/z)
};

struct RegSeries {
  std::map<RegKey, RegTerm> t;
  Q order;
};

// The nilpotent part of every x-exponent in one sector.
inline RingVec reg_nil(const SideCtx& cx, const WallData& w, int sector) {
  const SectorRing& R = cx.ring(sector);
  return R.scale(R.theta(cx.side.pbasis.back()), w.lamcoef);
}

inline RegSeries regularize(const SideCtx& cx, const WallData& w,
                            const CoeffTable& table) {
  RegSeries out;
  out.order = table.order;
  size_t r = cx.side.pbasis.size();
  for (auto& [n, val] : table.c) {
    RegKey key;
    key.nrest.assign(n.begin(), n.end() - 1);
    key.xb = w.lamcoef * n[r - 1];
    GammaSymbol den{Q(1) + key.xb, reg_nil(cx, w, val.sector), val.sector};
    out.t[key] = RegTerm{val, den};
  }
  return out;
}

inline VecI reg_full_key(const WallData& w, const RegKey& key) {
  Q nr = key.xb / w.lamcoef;
  require(q_is_int(nr), Err::InternalError, "x-exponent off the lattice grid");
  VecI n = key.nrest;
  n.push_back(q_int(nr));
  return n;
}

// Annihilation of the regularized series. With beta = p_r . d the operator
// trades the x-power shift for |m| x-derivatives, m = lamcoef * beta: on the
// source side when m < 0, on the slot side when m > 0. Either way the
// derivative produces the ratio Gamma(1+lambda)/Gamma(1+lambda-|m|), and that
// ratio must cancel the stored denominator symbols exactly -- their nilpotent
// parts equal and their bases offset by precisely m (GammaMismatch if not).
// What survives the cancellation is the bare two-term numerator recursion.
inline GkzCheck reg_recursion_check(const SideCtx& cx, const WallData& w,
                                    const RegSeries& rs, const VecI& d) {
  size_t r = cx.side.pbasis.size();
  VecI djs = charge_pairings(cx, d);
  VecI shift_rest(r - 1);
  for (size_t i = 0; i + 1 < r; ++i) {
    Q v = dotq(cx.side.pbasis[i], d);
    require(q_is_int(v), Err::InternalError, "direction off the chamber grid");
    shift_rest[i] = q_int(v);
  }
  Q beta = dotq(cx.side.pbasis.back(), d);
  Q mq = w.lamcoef * beta;
  require(q_is_int(mq), Err::GammaMismatch,
          "derivative order along this direction is not integral");

  auto linprod = [&](const SectorRing& R, int sector, const VecI& n, int sign) {
    VecQ k = cx.side.key_ambient(n);
    ZClass acc = zc_one(R, sector);
    for (size_t j = 0; j < djs.size(); ++j) {
      long long mm = sign * djs[j];
      Q Dk = dotq(to_vecq(cx.charges[j]), k);
      for (long long l = 0; l < mm; ++l)
        acc = zc_mul_linear(R, acc, R.ambient_class[j], Dk - l);
    }
    return acc;
  };

  std::set<RegKey> slots;
  for (auto& [key, term] : rs.t) {
    slots.insert(key);
    RegKey img;
    img.nrest = key.nrest;
    for (size_t i = 0; i + 1 < r; ++i) img.nrest[i] += shift_rest[i];
    img.xb = key.xb + mq;
    slots.insert(img);
  }

  GkzCheck out;
  for (const RegKey& slot : slots) {
    RegKey src;
    src.nrest = slot.nrest;
    for (size_t i = 0; i + 1 < r; ++i) src.nrest[i] -= shift_rest[i];
    src.xb = slot.xb - mq;
    VecI n_slot = reg_full_key(w, slot);
    VecI n_src = reg_full_key(w, src);
    if (cx.side.deg_of(n_slot) > rs.order) continue;  // slot value unknown
    if (cx.side.deg_of(n_src) > rs.order) continue;   // source unknown
    auto it_slot = rs.t.find(slot);
    auto it_src = rs.t.find(src);
    if (it_slot == rs.t.end() && it_src == rs.t.end()) continue;
    int sector = it_slot != rs.t.end() ? it_slot->second.num.sector
                                       : it_src->second.num.sector;
    const SectorRing& R = cx.ring(sector);
    const RingVec nil = reg_nil(cx, w, sector);
    // Exact cancellation of the derivative's Gamma ratio against the stored
    // symbols: both must sit at base 1 + xb with the sector's nilpotent part,
    // so their offset is exactly m.
    if (it_slot != rs.t.end())
      require(gs_eq(it_slot->second.den,
                    GammaSymbol{Q(1) + slot.xb, nil, sector}),
              Err::GammaMismatch, "stored symbol disagrees with the slot");
    if (it_src != rs.t.end())
      require(gs_eq(it_src->second.den, GammaSymbol{Q(1) + src.xb, nil, sector}),
              Err::GammaMismatch, "stored symbol disagrees with the source");

    ZClass lhs = it_slot != rs.t.end()
                     ? zc_mul(R, linprod(R, sector, n_slot, +1),
                              it_slot->second.num)
                     : zc_zero_like(R, sector);
    ZClass rhs = it_src != rs.t.end()
                     ? zc_mul(R, linprod(R, sector, n_src, -1),
                              it_src->second.num)
                     : zc_zero_like(R, sector);
    ++out.keys_checked;
    if (!zc_eq(R, lhs, rhs)) {
      out.ok = false;
      if (out.first_failure.empty())
        out.first_failure =
            "regularized recursion fails at slot " + vec_str(to_vecq(n_slot));
    }
  }
  require(out.keys_checked > 0, Err::WindowExceeded,
          "no regularized slot is determined at this order");
  return out;
}

// Termwise Laplace: u L(x^lambda / Gamma(1+lambda)) = u^(-lambda). The Gamma
// produced by the transform must cancel the stored symbol exactly.
struct LapSeries {
  std::map<RegKey, ZClass> t;  // key.xb holds the u-exponent, = -x-exponent
  Q order;
};

inline LapSeries laplace_transform(const SideCtx& cx, const WallData& w,
                                   const RegSeries& rs) {
  LapSeries out;
  out.order = rs.order;
  for (auto& [key, term] : rs.t) {
    GammaSymbol expect{Q(1) + key.xb, reg_nil(cx, w, term.num.sector),
                       term.num.sector};
    require(gs_eq(term.den, expect), Err::GammaMismatch,
            "Laplace image does not cancel the stored symbol");
    RegKey ukey;
    ukey.nrest = key.nrest;
    ukey.xb = -key.xb;
    out.t[ukey] = term.num;
  }
  return out;
}

// Substituting ytilde_r = u^(sum e / p_r.e) turns u^(-lambda) back into
// ytilde_r^(n_r + theta(p_r)/z): the resummed series must match the original
// table term by term.
inline GkzCheck resummation_check(const SideCtx& cx, const WallData& w,
                                  const LapSeries& lap,
                                  const CoeffTable& table) {
  GkzCheck out;
  if (lap.t.size() != table.c.size()) {
    out.ok = false;
    out.first_failure = "key counts differ";
  }
  for (auto& [ukey, num] : lap.t) {
    RegKey xkey;
    xkey.nrest = ukey.nrest;
    xkey.xb = -ukey.xb;
    VecI n = reg_full_key(w, xkey);
    auto it = table.c.find(n);
    ++out.keys_checked;
    if (it == table.c.end()) {
      out.ok = false;
      if (out.first_failure.empty())
        out.first_failure = "resummed key missing: " + vec_str(to_vecq(n));
      continue;
    }
    const SectorRing& R = cx.ring(num.sector);
    if (!zc_eq(R, num, it->second)) {
      out.ok = false;
      if (out.first_failure.empty())
        out.first_failure = "resummed term differs at " + vec_str(to_vecq(n));
    }
  }
  return out;
}

// Components of the transform: terms grouped by n_r mod |p_r.e|; each group
// resums to one function of the wall coordinate.
inline std::map<long long, std::vector<RegKey>> laplace_groups(
    const SideCtx& cx, const WallData& w, const LapSeries& lap) {
  Q pe = dotq(cx.side.pbasis.back(), w.e);
  require(q_is_int(pe) && pe != 0, Err::InternalError, "bad wall pairing");
  long long m = std::llabs(q_int(pe));
  std::map<long long, std::vector<RegKey>> out;
  for (auto& [ukey, num] : lap.t) {
    RegKey xkey{ukey.nrest, -ukey.xb};
    VecI n = reg_full_key(w, xkey);
    out[n.back() % m].push_back(ukey);
  }
  return out;
}

// Exponent relabeling between (ytilde_1..ytilde_{r-1}, u) and y coordinates:
// ytilde_i = y_i * y_r^{c_i} and u = y_r^{-c (p_r . e) / sum e}. Pure exact
// key arithmetic; composing a minus-side monomial through it lands on the
// plus-side exponents p_i^+ . k (the two coordinate systems present the same
// ambient monomial y^k).
inline VecQ cov_to_y(const WallData& w, const VecI& nrest, const Q& uexp) {
  size_t r = nrest.size() + 1;
  VecQ out(r, Q(0));
  Q last = -uexp * w.c * w.pe_minus / w.esum;
  for (size_t i = 0; i + 1 < r; ++i) {
    out[i] = nrest[i];
    last += w.ci[i] * Q(nrest[i]);
  }
  out[r - 1] = last;
  return out;
}

inline std::pair<VecI, Q> cov_from_y(const WallData& w, const VecQ& yexp) {
  size_t r = yexp.size();
  VecI nrest(r - 1, 0);
  Q acc = -yexp[r - 1];
  for (size_t i = 0; i + 1 < r; ++i) {
    require(q_is_int(yexp[i]), Err::InternalError,
            "transverse exponent not integral");
    nrest[i] = q_int(yexp[i]);
    acc += w.ci[i] * yexp[i];
  }
  Q uexp = acc * w.esum / (w.c * w.pe_minus);
  return {nrest, uexp};
}

// ---------------------------------------------------------------------------
// Ray asymptotics: exact contiguity plus numeric growth diagnostics along one
// wall block.

inline Q pow_q(const Q& b, long long e) {
  Q out = 1;
  for (long long i = 0; i < std::llabs(e); ++i) out *= b;
  if (e < 0) {
    require(out != 0, Err::InternalError, "zero base with negative exponent");
    out = 1 / out;
  }
  return out;
}

// Location of the singular locus: x^(sum e) = Qsing with
//   Qsing = (sum_j e_j)^(sum_j e_j) * prod_{e_j != 0} (-e_j)^(-e_j).
inline Q singular_q(const std::vector<Q>& ej, const Q& esum) {
  require(q_is_int(esum), Err::InternalError, "discrepancy must be integral");
  Q out = pow_q(esum, q_int(esum));
  for (const Q& e : ej)
    if (e != 0) {
      require(q_is_int(e), Err::InternalError, "wall pairings must be integral");
      out *= pow_q(-e, -q_int(e));
    }
  return out;
}

inline std::vector<std::complex<double>> zc_eval_z(const SectorRing& R,
                                                   const ZClass& a,
                                                   std::complex<double> z0) {
  std::vector<std::complex<double>> out(R.dim, 0.0);
  for (auto& [p, v] : a.c) {
    std::complex<double> zp = std::pow(z0, double(p));
    for (size_t i = 0; i < R.dim; ++i) out[i] += zp * q_dbl(v[i]);
  }
  return out;
}

struct RayReport {
  bool contiguity_ok = true;   // exact two-term identity along the ray
  size_t steps = 0;            // consecutive pairs measured
  double slope = 0;            // fitted d log|ratio| / d log l
  double reg_ratio = 0;        // extrapolated regularized ratio limit
  double raw_ratio_last = 0;   // |C_{l+1}|/|C_l| at the end of the ray
  Q qsing;                     // exact singular-locus constant
};

// Walk the block ray rep, rep + step, rep + 2 step, ... where step moves the
// last coordinate by |p_r . e|; consecutive keys differ by one wall vector.
inline RayReport ray_report(const SideCtx& cx, const WallData& w, const VecI& rep,
                            size_t length, bool regularized) {
  size_t r = cx.side.pbasis.size();
  Q pe = dotq(cx.side.pbasis.back(), w.e);
  long long step = std::llabs(q_int(pe));
  VecI d = w.e;
  if (pe < 0)
    for (long long& x : d) x = -x;
  VecI djs = charge_pairings(cx, d);

  std::vector<VecI> keys;
  std::vector<ZClass> coeffs;
  for (size_t t = 0; t < length; ++t) {
    VecI n = rep;
    n[r - 1] += step * static_cast<long long>(t);
    auto sec = cx.side.sector_of_key(n);
    require(sec.has_value(), Err::ConfigError, "ray leaves the box sectors");
    keys.push_back(n);
    coeffs.push_back(coeff_at_key(cx, n, int(*sec)));
  }

  RayReport out;
  out.qsing = singular_q(w.ej, w.esum);

  auto linprod = [&](const SectorRing& R, int sector, const VecI& n, int sign) {
    VecQ k = cx.side.key_ambient(n);
    ZClass acc = zc_one(R, sector);
    for (size_t j = 0; j < djs.size(); ++j) {
      long long mm = sign * djs[j];
      Q Dk = dotq(to_vecq(cx.charges[j]), k);
      for (long long l = 0; l < mm; ++l)
        acc = zc_mul_linear(R, acc, R.ambient_class[j], Dk - l);
    }
    return acc;
  };

  std::vector<double> ratio;  // dominant-entry signed/complex ratio magnitudes
  std::vector<double> sratio; // signed ratio along the dominant entry
  for (size_t t = 0; t + 1 < keys.size(); ++t) {
    const SectorRing& R = cx.ring(coeffs[t].sector);
    ZClass lhs = zc_mul(R, linprod(R, coeffs[t].sector, keys[t + 1], +1),
                        coeffs[t + 1]);
    ZClass rhs =
        zc_mul(R, linprod(R, coeffs[t].sector, keys[t], -1), coeffs[t]);
    if (!zc_eq(R, lhs, rhs)) out.contiguity_ok = false;

    auto a = zc_eval_z(R, coeffs[t], 1.0);
    auto b = zc_eval_z(R, coeffs[t + 1], 1.0);
    size_t idx = 0;
    double best = -1;
    for (size_t i = 0; i < b.size(); ++i)
      if (std::abs(b[i]) > best && std::abs(a[i]) > 0) {
        best = std::abs(b[i]);
        idx = i;
      }
    double num = std::abs(b[idx]), den = std::abs(a[idx]);
    double rr = den > 0 ? num / den : 0;
    double sr = den > 0 ? (b[idx] / a[idx]).real() : 0;
    if (regularized) {
      // divide term l by Gamma(1 + lamcoef * n_r): ratio picks up
      // 1/(lamcoef * n_r(t+1)) ... for integer offsets one factorial step
      double g0 = std::tgamma(1.0 + q_dbl(w.lamcoef * keys[t][r - 1]));
      double g1 = std::tgamma(1.0 + q_dbl(w.lamcoef * keys[t + 1][r - 1]));
      rr *= g0 / g1;
      sr *= g0 / g1;
    }
    ratio.push_back(rr);
    sratio.push_back(sr);
    ++out.steps;
  }
  if (ratio.size() >= 4) {
    // least-squares slope of log ratio vs log l over the second half
    size_t lo = ratio.size() / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    size_t cnt = 0;
    for (size_t t = lo; t < ratio.size(); ++t) {
      if (ratio[t] <= 0) continue;
      double X = std::log(double(t + 1)), Y = std::log(ratio[t]);
      sx += X;
      sy += Y;
      sxx += X * X;
      sxy += X * Y;
      ++cnt;
    }
    if (cnt >= 2) out.slope = (sxy - sx * sy / cnt) / (sxx - sx * sx / cnt);
    out.raw_ratio_last = ratio.back();
    // Richardson extrapolation of the signed ratio (error ~ 1/l)
    double rl = sratio[sratio.size() - 1], rl1 = sratio[sratio.size() - 2];
    double L = double(sratio.size());
    out.reg_ratio = rl + (L - 1) * (rl - rl1);
  }
  return out;
}

}  // namespace wallx
