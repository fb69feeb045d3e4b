#pragma once
// Sector cohomology rings, built degree by degree with exact linear algebra:
// quotient of Q[u_j : j in I_f] by the charge-kernel linear relations and the
// minimal squarefree monomials whose removal from I_f kills every anticone.
// No Groebner machinery: each graded piece is one RREF.

#include <map>

#include "wallx/git_core.hpp"

namespace wallx {

// A class is a dense coefficient vector over the ring's graded basis.
using RingVec = VecQ;

struct SectorRing {
  std::vector<size_t> vars;          // ambient indices I_f
  std::vector<VecI> basis_mon;       // exponent vectors over vars, graded
  std::vector<size_t> basis_deg;
  size_t dim = 0;
  size_t top_degree = 0;
  std::vector<std::vector<RingVec>> mult;  // structure constants
  std::vector<RingVec> var_class;          // class of u_{vars[t]}
  std::vector<RingVec> ambient_class;      // theta_f(D_j) for every ambient j
  Mat dmat;                                // r x |I_f|: columns D_j, j in I_f

  RingVec zero() const { return RingVec(dim, Q(0)); }
  RingVec one() const {
    RingVec v = zero();
    v[0] = 1;
    return v;
  }
  bool is_zero(const RingVec& v) const { return wallx::is_zero(v); }

  RingVec add(RingVec a, const RingVec& b) const {
    for (size_t i = 0; i < dim; ++i) a[i] += b[i];
    return a;
  }
  RingVec sub(RingVec a, const RingVec& b) const {
    for (size_t i = 0; i < dim; ++i) a[i] -= b[i];
    return a;
  }
  RingVec scale(RingVec a, const Q& s) const {
    for (Q& x : a) x *= s;
    return a;
  }
  RingVec mul(const RingVec& a, const RingVec& b) const {
    RingVec out = zero();
    for (size_t i = 0; i < dim; ++i) {
      if (a[i] == 0) continue;
      for (size_t j = 0; j < dim; ++j) {
        if (b[j] == 0) continue;
        const RingVec& m = mult[i][j];
        Q f = a[i] * b[j];
        for (size_t k = 0; k < dim; ++k) out[k] += f * m[k];
      }
    }
    return out;
  }

  // Solve xi = sum_{j in I_f} a_j D_j and map to sum a_j u_j. Any solution
  // works: two solutions differ by a linear relation.
  RingVec theta(const VecQ& xi) const {
    auto a = solve(dmat, xi);
    require(a.has_value(), Err::SpanFailure,
            "theta: class not in the span of sector charges");
    RingVec out = zero();
    for (size_t t = 0; t < vars.size(); ++t)
      if ((*a)[t] != 0) out = add(out, scale(var_class[t], (*a)[t]));
    return out;
  }

  std::string mon_name(size_t b) const {
    if (basis_deg[b] == 0) return "1";
    std::string s;
    for (size_t t = 0; t < vars.size(); ++t) {
      long long e = basis_mon[b][t];
      if (!e) continue;
      if (!s.empty()) s += "*";
      s += "u" + std::to_string(vars[t] + 1);
      if (e > 1) s += "^" + std::to_string(e);
    }
    return s;
  }

  std::string class_str(const RingVec& v) const {
    std::string s;
    for (size_t b = 0; b < dim; ++b) {
      if (v[b] == 0) continue;
      if (!s.empty()) s += " + ";
      s += q_str(v[b]);
      if (basis_deg[b] > 0) s += "*" + mon_name(b);
    }
    return s.empty() ? "0" : s;
  }
};

namespace detail {

// Exponent vectors of total degree g over s variables, descending lex, so
// RREF pivots consume early variables and the surviving basis prefers the
// later ones.
inline std::vector<VecI> monomials_of_degree(size_t s, size_t g) {
  std::vector<VecI> out;
  if (s == 0) {
    if (g == 0) out.push_back({});
    return out;
  }
  VecI cur(s, 0);
  auto rec = [&](auto&& self, size_t pos, long long left) -> void {
    if (pos + 1 == s) {
      cur[pos] = left;
      out.push_back(cur);
      return;
    }
    for (long long e = left; e >= 0; --e) {
      cur[pos] = e;
      self(self, pos + 1, left - e);
    }
  };
  rec(rec, 0, static_cast<long long>(g));
  return out;
}

inline bool mon_divides(const VecI& a, const VecI& b) {
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i]) return false;
  return true;
}

}  // namespace detail

inline SectorRing build_sector_ring(
    const std::vector<VecI>& charges,
    const std::vector<std::vector<size_t>>& minimal_anticones,
    const BoxElement& box) {
  SectorRing ring;
  ring.vars = box.isect;
  size_t s = ring.vars.size();
  size_t r = charges.empty() ? 0 : charges[0].size();
  require(s < 20, Err::ConfigError, "sector has too many variables");

  ring.dmat.assign(r, VecQ(s, Q(0)));
  for (size_t t = 0; t < s; ++t)
    for (size_t k = 0; k < r; ++k) ring.dmat[k][t] = charges[ring.vars[t]][k];

  // Linear relations: kernel of Q^{I_f} -> Q^r, e_t -> D_{vars[t]}.
  std::vector<VecQ> linrel = nullspace(ring.dmat);

  // Squarefree monomial relations: minimal S subset I_f such that I_f \ S
  // contains no anticone (it is enough to test the minimal anticones).
  std::vector<VecI> sr;
  {
    auto keep_has_anticone = [&](uint32_t keepmask) {
      for (const auto& mi : minimal_anticones) {
        bool inside = true;
        for (size_t j : mi) {
          size_t t = 0;
          while (t < s && ring.vars[t] != j) ++t;
          if (t == s || !(keepmask & (1u << t))) {
            inside = false;
            break;
          }
        }
        if (inside) return true;
      }
      return false;
    };
    std::vector<uint32_t> hits;
    for (uint32_t smask = 1; smask < (1u << s); ++smask)
      if (!keep_has_anticone(((1u << s) - 1) & ~smask)) hits.push_back(smask);
    for (uint32_t a : hits) {
      bool minimal = true;
      for (uint32_t b : hits)
        if (b != a && (b & a) == b) {
          minimal = false;
          break;
        }
      if (minimal) {
        VecI mon(s, 0);
        for (size_t t = 0; t < s; ++t)
          if (a & (1u << t)) mon[t] = 1;
        sr.push_back(mon);
      }
    }
  }

  // Degree-by-degree quotient. Sparse normal forms over basis indices; the
  // basis only grows, so densification waits until the dimension is known.
  using Sparse = std::vector<std::pair<size_t, Q>>;
  std::map<VecI, Sparse> nfs;
  ring.basis_mon = {VecI(s, 0)};
  ring.basis_deg = {0};
  nfs[VecI(s, 0)] = {{0, Q(1)}};
  std::vector<VecI> prev_mons = {VecI(s, 0)};

  for (size_t g = 1;; ++g) {
    require(g <= 64, Err::SpanFailure, "sector ring not artinian within bound");
    auto mons = detail::monomials_of_degree(s, g);
    if (mons.empty()) break;  // no variables: point sector
    std::map<VecI, size_t> col;
    for (size_t i = 0; i < mons.size(); ++i) col[mons[i]] = i;
    Mat rows;
    for (const VecI& m : sr)
      for (const VecI& mon : mons)
        if (detail::mon_divides(m, mon)) {
          VecQ row(mons.size(), Q(0));
          row[col[mon]] = 1;
          rows.push_back(row);
        }
    for (const VecQ& c : linrel)
      for (const VecI& nu : prev_mons) {
        VecQ row(mons.size(), Q(0));
        for (size_t t = 0; t < s; ++t) {
          if (c[t] == 0) continue;
          VecI m = nu;
          m[t] += 1;
          row[col[m]] += c[t];
        }
        rows.push_back(row);
      }
    std::vector<size_t> pivots = rref(rows);
    if (mons.size() == pivots.size()) break;  // dim_g = 0, all higher vanish

    std::vector<bool> is_piv(mons.size(), false);
    for (size_t p : pivots) is_piv[p] = true;
    std::map<size_t, size_t> colbasis;
    for (size_t i = 0; i < mons.size(); ++i) {
      if (is_piv[i]) continue;
      colbasis[i] = ring.basis_mon.size();
      ring.basis_mon.push_back(mons[i]);
      ring.basis_deg.push_back(g);
      nfs[mons[i]] = {{colbasis[i], Q(1)}};
    }
    for (size_t rno = 0; rno < pivots.size(); ++rno) {
      Sparse expr;
      for (size_t i = 0; i < mons.size(); ++i)
        if (!is_piv[i] && rows[rno][i] != 0)
          expr.push_back({colbasis[i], -rows[rno][i]});
      nfs[mons[pivots[rno]]] = std::move(expr);
    }
    prev_mons = std::move(mons);
    ring.top_degree = g;
  }

  ring.dim = ring.basis_mon.size();
  auto dense = [&](const VecI& mon) {
    RingVec v = ring.zero();
    auto it = nfs.find(mon);
    if (it != nfs.end())
      for (auto& [b, c] : it->second) v[b] = c;
    return v;  // absent: degree beyond top, class is zero
  };

  ring.var_class.resize(s);
  for (size_t t = 0; t < s; ++t) {
    VecI e(s, 0);
    e[t] = 1;
    ring.var_class[t] = dense(e);
  }
  ring.mult.assign(ring.dim, std::vector<RingVec>(ring.dim));
  for (size_t i = 0; i < ring.dim; ++i)
    for (size_t j = 0; j < ring.dim; ++j) {
      VecI m = ring.basis_mon[i];
      for (size_t t = 0; t < s; ++t) m[t] += ring.basis_mon[j][t];
      ring.mult[i][j] = dense(m);
    }

  // Restriction of every ambient divisor class: for j in I_f this is u_j
  // itself; otherwise D_j still lies in the span of {D_i : i in I_f}.
  ring.ambient_class.resize(charges.size());
  for (size_t j = 0; j < charges.size(); ++j) {
    size_t t = 0;
    while (t < s && ring.vars[t] != j) ++t;
    if (t < s)
      ring.ambient_class[j] = ring.var_class[t];
    else
      ring.ambient_class[j] = ring.theta(to_vecq(charges[j]));
  }
  return ring;
}

// All sector rings of one side, indexed like side.boxes. The untwisted sector
// (f = 0) is index 0.
struct SideCohomology {
  std::vector<SectorRing> sectors;
  size_t total_dim = 0;
};

inline SideCohomology build_side_cohomology(const std::vector<VecI>& charges,
                                            const SideGeom& side) {
  SideCohomology out;
  for (const BoxElement& b : side.boxes) {
    out.sectors.push_back(build_sector_ring(charges, side.minimal_anticones, b));
    out.total_dim += out.sectors.back().dim;
  }
  return out;
}

}  // namespace wallx
