#pragma once
// Floating-point mirror of the exact series layer: sector rings over complex
// doubles at a fixed z, per-key coefficient products with the same factor
// conventions as the exact table, and truncated block sums of the two chart
// expansions at matched sample points (convergent on one side of the wall,
// optimally truncated on the other).
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <utility>
#include <vector>

#include "wallx/numerics.hpp"
#include "wallx/series.hpp"

namespace wallx {

using CVec = std::vector<Cplx>;

inline double cv_norm(const CVec& a) {
  double m = 0;
  for (const Cplx& x : a) m = std::max(m, std::abs(x));
  return m;
}

struct NumRing {
  size_t dim = 0;
  size_t top = 0;                       // top graded degree: nilpotency bound
  std::vector<std::vector<CVec>> mult;  // structure constants
  std::vector<CVec> ambient;            // ambient divisor classes as doubles

  CVec zero() const { return CVec(dim, Cplx(0)); }
  CVec one() const {
    CVec v(dim, Cplx(0));
    v[0] = 1.0;
    return v;
  }
};

inline CVec to_cvec(const RingVec& v) {
  CVec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = q_dbl(v[i]);
  return out;
}

inline NumRing make_num_ring(const SectorRing& R) {
  NumRing nr;
  nr.dim = R.dim;
  nr.top = R.top_degree;
  nr.mult.resize(R.dim);
  for (size_t i = 0; i < R.dim; ++i)
    for (size_t j = 0; j < R.dim; ++j)
      nr.mult[i].push_back(to_cvec(R.mult[i][j]));
  for (const RingVec& a : R.ambient_class) nr.ambient.push_back(to_cvec(a));
  return nr;
}

inline CVec nr_add(CVec a, const CVec& b) {
  for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

inline CVec nr_scale(CVec a, Cplx s) {
  for (Cplx& x : a) x *= s;
  return a;
}

inline CVec nr_mul(const NumRing& nr, const CVec& a, const CVec& b) {
  CVec out = nr.zero();
  for (size_t i = 0; i < nr.dim; ++i) {
    if (a[i] == 0.0) continue;
    for (size_t j = 0; j < nr.dim; ++j) {
      if (b[j] == 0.0) continue;
      Cplx f = a[i] * b[j];
      const CVec& m = nr.mult[i][j];
      for (size_t k = 0; k < nr.dim; ++k) out[k] += f * m[k];
    }
  }
  return out;
}

// a * (u + s): u a divisor class (no identity component), s the scalar part.
inline CVec nr_mul_linear(const NumRing& nr, const CVec& a, const CVec& u,
                          Cplx s) {
  return nr_add(nr_mul(nr, a, u), nr_scale(a, s));
}

// a / (u + s): geometric series in the nilpotent part; needs s != 0.
inline CVec nr_div_linear(const NumRing& nr, const CVec& a, const CVec& u,
                          Cplx s) {
  require(std::abs(s) > 0, Err::PoleFlag,
          "numeric division by a pure-nilpotent class");
  CVec term = nr_scale(a, 1.0 / s);
  CVec out = term;
  for (size_t k = 1; k <= nr.top; ++k) {
    term = nr_scale(nr_mul(nr, term, u), -1.0 / s);
    out = nr_add(out, term);
  }
  return out;
}

inline CVec nr_exp(const NumRing& nr, const CVec& a) {
  Cplx a0 = a[0];
  CVec nil = a;
  nil[0] = 0.0;
  CVec out = nr.one();
  CVec term = nr.one();
  for (size_t k = 1; k <= nr.top; ++k) {
    term = nr_scale(nr_mul(nr, term, nil), 1.0 / double(k));
    out = nr_add(out, term);
  }
  return nr_scale(out, std::exp(a0));
}

// Same factor conventions as the exact table: a positive pairing D divides by
// (u_j + a z) over a in (0, D] with frac(a) = frac(D); a nonpositive pairing
// multiplies over a in (D, 0]. Twist rows E append the Euler-twist numerator
// prod_{b=0}^{E . k} (v + b z), v = theta(E).
inline CVec num_coeff_at_key(const SideCtx& cx, const NumRing& nr,
                             const VecI& n, int sector, Cplx z,
                             const std::vector<VecI>& twists = {}) {
  const SectorRing& R = cx.ring(sector);
  VecQ k = cx.side.key_ambient(n);
  CVec acc = nr.one();
  for (size_t j = 0; j < cx.charges.size(); ++j) {
    Q D = dotq(to_vecq(cx.charges[j]), k);
    const CVec& uj = nr.ambient[j];
    if (D > 0) {
      for (Q a = (q_frac(D) == 0 ? Q(1) : q_frac(D)); a <= D; a += 1)
        acc = nr_div_linear(nr, acc, uj, q_dbl(a) * z);
    } else {
      for (Q a = (q_frac(D) == 0 ? Q(0) : q_frac(D) - 1); a > D; a -= 1)
        acc = nr_mul_linear(nr, acc, uj, q_dbl(a) * z);
    }
  }
  for (const VecI& E : twists) {
    Q Ekq = dotq(to_vecq(E), k);
    require(q_is_int(Ekq) && Ekq >= 0, Err::NonIntegralPairing,
            "twist pairing must be a nonnegative integer");
    CVec v = to_cvec(R.theta(to_vecq(E)));
    acc = nr_mul(nr, acc, v);
    for (long long b = 1; b <= q_int(Ekq); ++b)
      acc = nr_mul_linear(nr, acc, v, double(b) * z);
  }
  return acc;
}

struct EvalOptions {
  long long label_max = 18;  // transverse label cap per coordinate
  long long plus_cap = 240;  // hard cap on the convergent wall sum
  long long wall_max = 140;  // fixed truncation of the divergent wall sum
  double plus_tol = 1e-18;   // early-stop threshold relative to the partial sum
};

struct SideEvaluator {
  SideCtx cx;
  std::vector<NumRing> rings;
  std::vector<size_t> offset;  // sector start in the concatenated vector
  size_t dim_cr = 0;
  std::vector<std::vector<CVec>> theta_p;  // [sector][i]: theta(p_i)

  explicit SideEvaluator(const SideCtx& c) : cx(c) {
    for (const SectorRing& R : c.coh.sectors) {
      offset.push_back(dim_cr);
      dim_cr += R.dim;
      rings.push_back(make_num_ring(R));
      std::vector<CVec> th;
      for (const VecQ& p : c.side.pbasis) th.push_back(to_cvec(R.theta(p)));
      theta_p.push_back(std::move(th));
    }
  }
};

// Coefficients depend on the sample point only through z: cache them per key
// up to the requested label/wall caps and reuse across sample points.
struct NumTable {
  std::map<VecI, std::pair<int, CVec>> c;  // key -> (sector, coefficient)
  long long wall_cap = 0;
};

inline NumTable build_num_table(const SideEvaluator& ev, Cplx z,
                                long long label_max, long long wall_cap,
                                const std::vector<VecI>& twists = {}) {
  NumTable out;
  out.wall_cap = wall_cap;
  size_t r = ev.cx.side.pbasis.size();
  VecI n(r, 0);
  auto rec = [&](auto&& self, size_t i) -> void {
    if (i + 1 == r) {
      for (long long m = 0; m <= wall_cap; ++m) {
        n[r - 1] = m;
        auto sec = ev.cx.side.sector_of_key(n);
        if (!sec) continue;
        out.c[n] = {int(*sec), num_coeff_at_key(ev.cx, ev.rings[*sec], n,
                                                int(*sec), z, twists)};
      }
      n[r - 1] = 0;
      return;
    }
    for (long long e = 0; e <= label_max; ++e) {
      n[i] = e;
      self(self, i + 1);
    }
    n[i] = 0;
  };
  rec(rec, 0);
  return out;
}

enum class Chart { Convergent, Asymptotic };

struct BlockEval {
  std::map<VecI, CVec> block;    // transverse label -> concatenated value
  std::map<VecI, double> floor;  // asymptotic chart: first omitted magnitude
  CVec total;
};

inline BlockEval eval_blocks(const SideEvaluator& ev, const NumTable& table,
                             const std::vector<Cplx>& logt, Cplx z, Chart chart,
                             const EvalOptions& opt = {}) {
  size_t r = logt.size();
  // per-sector prefactor z exp(sum_i theta(p_i) log t_i / z)
  std::vector<CVec> pref;
  for (size_t s = 0; s < ev.rings.size(); ++s) {
    CVec arg = ev.rings[s].zero();
    for (size_t i = 0; i < r; ++i)
      arg = nr_add(arg, nr_scale(ev.theta_p[s][i], logt[i] / z));
    pref.push_back(nr_scale(nr_exp(ev.rings[s], arg), z));
  }
  double wall_abs = std::exp(logt[r - 1].real());

  // group terms by transverse label and sector, wall coordinate ascending
  std::map<VecI, std::map<int, std::vector<std::pair<long long, CVec>>>> terms;
  for (const auto& [n, sc] : table.c) {
    Cplx lmon = 0;
    for (size_t i = 0; i < r; ++i) lmon += double(n[i]) * logt[i];
    CVec t = nr_scale(nr_mul(ev.rings[size_t(sc.first)], pref[size_t(sc.first)],
                             sc.second),
                      std::exp(lmon));
    VecI label(n.begin(), n.end() - 1);
    terms[label][sc.first].emplace_back(n[r - 1], std::move(t));
  }

  BlockEval out;
  out.total = CVec(ev.dim_cr, Cplx(0));
  for (auto& [label, by_sector] : terms) {
    CVec blk(ev.dim_cr, Cplx(0));
    double flo = 0;
    for (auto& [s, seq] : by_sector) {
      CVec sum = ev.rings[size_t(s)].zero();
      if (chart == Chart::Convergent) {
        bool settled = false;
        for (auto& [m, t] : seq) {
          sum = nr_add(sum, t);
          if (double(m) > 3 * wall_abs + 10 &&
              cv_norm(t) < opt.plus_tol * std::max(1.0, cv_norm(sum))) {
            settled = true;
            break;
          }
        }
        require(settled, Err::NoConvergence,
                "convergent chart sum did not settle before the cap");
      } else {
        // optimal truncation: stop at the first growing term past the start
        size_t cut = seq.size();
        for (size_t i = 3; i < seq.size(); ++i)
          if (cv_norm(seq[i].second) > cv_norm(seq[i - 1].second)) {
            cut = i;
            break;
          }
        for (size_t i = 0; i < cut; ++i) sum = nr_add(sum, seq[i].second);
        if (!seq.empty())
          flo = std::max(
              flo, cv_norm(seq[std::min(cut, seq.size() - 1)].second));
      }
      for (size_t t = 0; t < ev.rings[size_t(s)].dim; ++t)
        blk[ev.offset[size_t(s)] + t] += sum[t];
    }
    if (chart == Chart::Asymptotic) out.floor[label] = flo;
    for (size_t i = 0; i < ev.dim_cr; ++i) out.total[i] += blk[i];
    out.block[label] = std::move(blk);
  }
  return out;
}

struct MatchedPoint {
  std::vector<Cplx> logy;   // convergent-chart logs
  std::vector<Cplx> logyt;  // asymptotic-chart logs
};

// Matched sample: ytilde_i = y_i y_r^{c_i} (i < r), ytilde_r = y_r^{-c},
// parameterized by the asymptotic-chart transverse values and the
// convergent-chart wall coordinate.
inline MatchedPoint matched_point(const WallData& w,
                                  const std::vector<Cplx>& log_transverse,
                                  Cplx log_wall) {
  size_t r = log_transverse.size() + 1;
  MatchedPoint p;
  p.logy.assign(r, Cplx(0));
  p.logyt.assign(r, Cplx(0));
  p.logy[r - 1] = log_wall;
  p.logyt[r - 1] = -q_dbl(w.c) * log_wall;
  for (size_t i = 0; i + 1 < r; ++i) {
    p.logyt[i] = log_transverse[i];
    p.logy[i] = log_transverse[i] - q_dbl(w.ci[i]) * log_wall;
  }
  return p;
}

// Action of the annihilator word prod_j prod_{a=0}^{M_j} (v_j + a z) on one
// sector slice of a transverse block: v_j = theta(E_j), and M_j = E_j . k is
// constant on the block because twist rows pair to zero with the wall
// direction.
inline CVec num_block_word(const SideEvaluator& ev, int sector,
                           const VecI& label, const CVec& b, Cplx z,
                           const std::vector<VecI>& twists) {
  const NumRing& nr = ev.rings[size_t(sector)];
  const SectorRing& R = ev.cx.ring(sector);
  VecI n(label);
  n.push_back(0);
  VecQ k = ev.cx.side.key_ambient(n);
  CVec out = b;
  for (const VecI& E : twists) {
    Q M = dotq(to_vecq(E), k);
    require(q_is_int(M) && M >= 0, Err::NonIntegralPairing,
            "twist pairing must be a nonnegative integer on the block");
    CVec v = to_cvec(R.theta(to_vecq(E)));
    for (long long a = 0; a <= q_int(M); ++a)
      out = nr_mul_linear(nr, out, v, double(a) * z);
  }
  return out;
}

}  // namespace wallx
