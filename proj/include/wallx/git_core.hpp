#pragma once
// Chamber/wall combinatorics for abelian GIT data: anticone families, box
// elements, the wall vector e with its orientation conventions, dual lattice
// bases adapted to the wall, and the Gale-dual properness check.

#include <optional>
#include <set>

#include "wallx/cone.hpp"

namespace wallx {

struct GitInput {
  std::string name;
  size_t r = 0;                    // rank of L (and of the character lattice)
  std::vector<VecI> charges;       // m rows D_j in Z^r
  VecQ omega_plus;
  std::optional<VecQ> omega_minus;
  std::optional<Mat> p_plus;       // optional user-supplied bases (rows p_i)
  std::optional<Mat> p_minus;
};

struct BoxElement {
  VecQ f;                       // representative in [0,1)^r
  std::vector<size_t> isect;    // I_f = { j : D_j . f integral }
  Q age;                        // sum_j <D_j . f>
};

// All data attached to one chamber.
struct SideGeom {
  VecQ omega;
  std::vector<std::vector<size_t>> anticones;          // every I with w in angle(I)
  std::vector<std::vector<size_t>> minimal_anticones;  // inclusion-minimal ones
  std::vector<BoxElement> boxes;                       // boxes[0].f == 0
  Mat ltilde;        // rows: lattice basis of Ltilde = Z^r + sum_f Z f
  Mat ldual;         // rows: lattice basis of Ltilde^dual
  Mat pbasis;        // rows p_i: Z-basis of Ltilde^dual inside closed chamber
  Mat qbasis;        // rows q_i: dual basis (p_i . q_j = delta_ij)
  Mat amat;          // m x r rationals: D_j = sum_i amat[j][i] p_i
  VecQ degw;         // degw[i] = <omega, q_i>; deg(n) = sum_i degw[i] n_i
  Mat chamber_ineq;  // rows h: closed chamber = { x : h . x >= 0 }, irredundant
  bool full_dimensional = false;
  bool extended_weak_fano = false;  // sum_j D_j inside the closed chamber
  bool proper = true;        // Gale-dual fan completeness (warn-only)
  std::string proper_note;

  Q deg_of(const VecI& n) const {
    Q d = 0;
    for (size_t i = 0; i < n.size(); ++i) d += degw[i] * n[i];
    return d;
  }
  // Ambient coordinates of the key k = sum_i n_i q_i.
  VecQ key_ambient(const VecI& n) const {
    VecQ k(qbasis[0].size(), Q(0));
    for (size_t i = 0; i < n.size(); ++i)
      for (size_t a = 0; a < k.size(); ++a) k[a] += Q(n[i]) * qbasis[i][a];
    return k;
  }
  // Box index of [-k], or nullopt if -k's fractional class is not a box.
  std::optional<size_t> sector_of_key(const VecI& n) const {
    VecQ k = key_ambient(n);
    VecQ f(k.size());
    for (size_t a = 0; a < k.size(); ++a) f[a] = q_frac(-k[a]);
    for (size_t b = 0; b < boxes.size(); ++b)
      if (boxes[b].f == f) return b;
    return std::nullopt;
  }
};

struct WallData {
  VecI e;              // primitive wall vector, omega_+ . e > 0
  VecQ omega0;         // crossing point of [omega_-, omega_+] on the wall
  std::vector<Q> ej;   // D_j . e
  Q esum;              // sum_j D_j . e  (> 0: discrepant wall)
  Q pe_plus, pe_minus; // p_r^{+-} . e
  Q c;                 // ytilde_r = y_r^{-c}
  VecQ ci;             // ytilde_i = y_i y_r^{c_i}, i < r
  Q lamcoef;           // lambda_k = lamcoef * (ntilde_r + theta(p_r^-)/z)
};

struct GitModel {
  GitInput in;
  Z delta = 1;         // lcm |nonzero r x r minors of the charge matrix|
  SideGeom plus;
  std::optional<SideGeom> minus;
  std::optional<WallData> wall;
};

namespace detail {

inline std::vector<VecQ> charge_gens(const std::vector<VecI>& charges,
                                     const std::vector<size_t>& idx) {
  std::vector<VecQ> g;
  for (size_t j : idx) g.push_back(to_vecq(charges[j]));
  return g;
}

// Every nonempty I (as sorted index list) with omega in the strict span.
inline std::vector<std::vector<size_t>> anticone_family(
    const std::vector<VecI>& charges, const VecQ& omega) {
  size_t m = charges.size();
  require(m < 20, Err::ConfigError, "too many charges for subset enumeration");
  std::vector<std::vector<size_t>> fam;
  for (uint32_t mask = 1; mask < (1u << m); ++mask) {
    std::vector<size_t> idx;
    for (size_t j = 0; j < m; ++j)
      if (mask & (1u << j)) idx.push_back(j);
    if (in_strict_cone(charge_gens(charges, idx), omega)) fam.push_back(idx);
  }
  std::sort(fam.begin(), fam.end());  // canonical lexicographic order
  return fam;
}

inline std::vector<std::vector<size_t>> minimal_members(
    const std::vector<std::vector<size_t>>& fam) {
  auto subset = [](const std::vector<size_t>& a, const std::vector<size_t>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
  };
  std::vector<std::vector<size_t>> mins;
  for (const auto& i : fam) {
    bool minimal = true;
    for (const auto& j : fam)
      if (j != i && subset(j, i)) { minimal = false; break; }
    if (minimal) mins.push_back(i);
  }
  return mins;
}

inline Z minor_lcm(const std::vector<VecI>& charges, size_t r) {
  Z l = 1;
  bool any = false;
  for (const auto& rows : subsets_of_size(charges.size(), r)) {
    Mat m;
    for (size_t j : rows) m.push_back(to_vecq(charges[j]));
    Q d = abs(det(m));
    if (d != 0) { l = lcm(l, numerator(d)); any = true; }
  }
  require(any, Err::ConfigError, "charge matrix has rank < r");
  return l;
}

// Closed-chamber membership: x in cl(angle(I)) for every minimal anticone.
inline bool in_closed_chamber(const std::vector<VecI>& charges,
                              const std::vector<std::vector<size_t>>& mins,
                              const VecQ& x) {
  for (const auto& i : mins)
    if (!in_cone(charge_gens(charges, i), x)) return false;
  return true;
}

// H-description of the closed chamber, the intersection over minimal
// anticones I of cone(D_i : i in I): collect each factor's facet normals
// (kernels of (r-1)-subsets of its generators, oriented inward), then drop
// normals implied by the rest (Farkas: h redundant iff h in cone(others)).
inline Mat chamber_hrep(const std::vector<VecI>& charges,
                        const std::vector<std::vector<size_t>>& mins,
                        size_t r) {
  std::vector<VecI> normals;
  auto push = [&](const VecQ& n) {
    VecI p = primitive(n);
    for (const VecI& q : normals)
      if (q == p) return;
    normals.push_back(p);
  };
  for (const auto& i : mins) {
    auto gens = charge_gens(charges, i);
    if (r == 1) {
      push(gens[0]);  // half-line x * g >= 0
      continue;
    }
    for (const auto& sub : subsets_of_size(gens.size(), r - 1)) {
      Mat m;
      for (size_t t : sub) m.push_back(gens[t]);
      if (mat_rank(m) + 1 != r) continue;
      auto ker = nullspace(m);
      require(ker.size() == 1, Err::InternalError, "facet normal not unique");
      for (int sgn : {1, -1}) {
        VecQ n = ker[0];
        for (Q& x : n) x *= sgn;
        bool inward = true;
        for (const VecQ& g : gens)
          if (dotq(n, g) < 0) { inward = false; break; }
        if (inward) { push(n); break; }
      }
    }
  }
  Mat h;
  for (const VecI& n : normals) h.push_back(to_vecq(n));
  for (size_t idx = 0; idx < h.size();) {
    Mat others;
    for (size_t j = 0; j < h.size(); ++j)
      if (j != idx) others.push_back(h[j]);
    if (in_cone(others, h[idx])) {
      h.erase(h.begin() + idx);
      idx = 0;  // restart: redundancy is relative to the surviving set
    } else {
      ++idx;
    }
  }
  return h;
}

inline std::vector<BoxElement> enumerate_boxes(
    const std::vector<VecI>& charges, const VecQ& omega, const Z& delta,
    size_t r) {
  long long d = static_cast<long long>(delta);
  {
    Z cells = 1;
    for (size_t i = 0; i < r; ++i) cells *= d;
    require(cells <= 1000000, Err::ConfigError,
            "box enumeration too large (delta^r > 1e6)");
  }
  std::vector<BoxElement> boxes;
  std::vector<long long> v(r, 0);
  for (;;) {
    VecQ f(r);
    for (size_t i = 0; i < r; ++i) f[i] = Q(v[i], d);
    BoxElement b;
    b.f = f;
    b.age = 0;
    for (size_t j = 0; j < charges.size(); ++j) {
      Q pair = dotq(f, charges[j]);
      if (q_is_int(pair)) b.isect.push_back(j);
      b.age += q_frac(pair);
    }
    if (!b.isect.empty() &&
        in_strict_cone(charge_gens(charges, b.isect), omega))
      boxes.push_back(std::move(b));
    // odometer over {0..delta-1}^r
    size_t i = 0;
    while (i < r && ++v[i] == d) v[i++] = 0;
    if (i == r) break;
  }
  // f = 0 first (I_0 = all j is always an anticone for valid omega), then lex.
  std::sort(boxes.begin(), boxes.end(),
            [](const BoxElement& a, const BoxElement& b) { return a.f < b.f; });
  require(!boxes.empty() && is_zero(boxes[0].f), Err::ConfigError,
          "omega is not in any anticone: empty chamber");
  return boxes;
}

// Lattice basis (rows) of the subgroup of Q^r generated by Z^r and the box
// representatives: row-reduce over Z by clearing denominators pairwise.
inline Mat lattice_basis_with_boxes(const std::vector<BoxElement>& boxes,
                                    size_t r) {
  // Work with the common denominator: the lattice is (1/s)M for an integer
  // lattice M containing s.Z^r.
  Z s = 1;
  for (const auto& b : boxes)
    for (const Q& x : b.f) s = lcm(s, denominator(x));
  // Generators of M in Z^r: s.e_i and s.f.
  std::vector<std::vector<Z>> gens;
  for (size_t i = 0; i < r; ++i) {
    std::vector<Z> e(r, Z(0));
    e[i] = s;
    gens.push_back(e);
  }
  for (const auto& b : boxes) {
    std::vector<Z> g(r);
    for (size_t i = 0; i < r; ++i)
      g[i] = numerator(b.f[i]) * (s / denominator(b.f[i]));
    gens.push_back(g);
  }
  // Integer row Hermite reduction (column-by-column gcd elimination).
  size_t row = 0;
  for (size_t col = 0; col < r && row < gens.size(); ++col) {
    // gcd-eliminate column entries below `row` into a single pivot
    for (;;) {
      size_t piv = gens.size();
      for (size_t i = row; i < gens.size(); ++i)
        if (gens[i][col] != 0 &&
            (piv == gens.size() ||
             abs(gens[i][col]) < abs(gens[piv][col])))
          piv = i;
      if (piv == gens.size()) break;  // column all zero
      std::swap(gens[row], gens[piv]);
      bool clean = true;
      for (size_t i = row + 1; i < gens.size(); ++i) {
        if (gens[i][col] == 0) continue;
        Z q = gens[i][col] / gens[row][col];
        for (size_t k = col; k < r; ++k) gens[i][k] -= q * gens[row][k];
        if (gens[i][col] != 0) clean = false;
      }
      if (clean) { ++row; break; }
    }
  }
  gens.resize(row);
  require(row == r, Err::InternalError, "box lattice rank defect");
  Mat basis(r, VecQ(r));
  for (size_t i = 0; i < r; ++i)
    for (size_t k = 0; k < r; ++k) basis[i][k] = Q(gens[i][k], s);
  return basis;
}

// Dual lattice basis: rows of (B^T)^{-1} for a row-basis B.
inline Mat dual_lattice_basis(const Mat& b) {
  auto inv = mat_inverse(mat_transpose(b));
  require(inv.has_value(), Err::InternalError, "lattice basis singular");
  return *inv;
}

// gcd of all k x k minors of an integer coordinate matrix == 1 iff the
// Z-span is saturated in the ambient lattice.
inline bool saturated(const std::vector<VecI>& coords) {
  if (coords.empty()) return true;
  size_t k = coords.size(), n = coords[0].size();
  Z g = 0;
  for (const auto& cols : subsets_of_size(n, k)) {
    Mat m(k, VecQ(k));
    for (size_t i = 0; i < k; ++i)
      for (size_t j = 0; j < k; ++j) m[i][j] = coords[i][cols[j]];
    Q d = abs(det(m));
    g = gcd(g, numerator(d));
    if (g == 1) return true;
  }
  return g == 1;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Basis search: canonical Z-basis of Ltilde^dual inside the closed chamber,
// wall-adapted when e is given (p_i . e = 0 for i < r, p_r . e != 0).
// Enumeration: integer coordinates w.r.t. the dual lattice basis with
// bounded sup-norm, ordered by (common denominator, sup|numerator|, lex).
// ---------------------------------------------------------------------------
inline Mat search_pbasis(const SideGeom& side, const std::vector<VecI>& charges,
                         const std::optional<VecI>& e, long long height = 8) {
  size_t r = side.ldual.size();
  std::vector<VecQ> cands;
  {
    std::vector<long long> c(r, -height);
    for (;;) {
      VecQ v(r, Q(0));
      bool zero = true;
      for (size_t i = 0; i < r; ++i) {
        if (c[i] != 0) zero = false;
        for (size_t a = 0; a < r; ++a) v[a] += Q(c[i]) * side.ldual[i][a];
      }
      if (!zero &&
          detail::in_closed_chamber(charges, side.minimal_anticones, v))
        cands.push_back(v);
      size_t i = 0;
      while (i < r && ++c[i] > height) c[i++] = -height;
      if (i == r) break;
    }
  }
  auto key = [](const VecQ& v) {
    Z den = 1;
    for (const Q& x : v) den = lcm(den, denominator(x));
    Z mx = 0;
    std::vector<Z> ints;
    for (const Q& x : v) {
      ints.push_back(numerator(x) * (den / denominator(x)));
      Z a = abs(ints.back());
      if (a > mx) mx = a;
    }
    return std::make_tuple(den, mx, ints);
  };
  std::sort(cands.begin(), cands.end(),
            [&](const VecQ& a, const VecQ& b) { return key(a) < key(b); });

  // Integer coordinates w.r.t. the dual lattice basis.
  Mat ldual_t = mat_transpose(side.ldual);
  auto coords = [&](const VecQ& v) {
    auto x = solve(ldual_t, v);
    require(x.has_value(), Err::InternalError, "dual coord solve");
    VecI c;
    for (const Q& q : *x) c.push_back(q_int(q));
    return c;
  };

  Mat chosen;
  std::vector<VecI> chosen_coords;
  // Wall-parallel vectors first (need r-1 of them forming a saturated span).
  if (e.has_value()) {
    for (const VecQ& v : cands) {
      if (chosen.size() + 1 == r) break;
      if (dotq(v, *e) != 0) continue;
      auto cc = coords(v);
      auto trial = chosen_coords;
      trial.push_back(cc);
      Mat rk;
      for (const auto& t : trial) rk.push_back(to_vecq(t));
      if (mat_rank(rk) != trial.size()) continue;
      if (!detail::saturated(trial)) continue;
      chosen.push_back(v);
      chosen_coords = trial;
    }
    require(chosen.size() + 1 == r, Err::SpanFailure,
            "wall-parallel basis search exhausted height bound");
  }
  // Fill up to a full unimodular basis of Ltilde^dual.
  for (const VecQ& v : cands) {
    if (chosen.size() == r) break;
    if (e.has_value() && chosen.size() + 1 == r && dotq(v, *e) == 0) continue;
    auto cc = coords(v);
    auto trial = chosen_coords;
    trial.push_back(cc);
    Mat rk;
    for (const auto& t : trial) rk.push_back(to_vecq(t));
    if (mat_rank(rk) != trial.size()) continue;
    if (trial.size() == r) {
      Q d = det(rk);
      if (abs(numerator(d)) != 1 || denominator(d) != 1) continue;
    } else if (!detail::saturated(trial)) {
      continue;
    }
    chosen.push_back(v);
    chosen_coords = trial;
  }
  require(chosen.size() == r, Err::SpanFailure,
          "basis search exhausted height bound");
  return chosen;
}

namespace detail {

// Gale-dual fan completeness (warn-only properness check).
inline void check_proper(SideGeom& side, const std::vector<VecI>& charges) {
  side.proper = true;
  side.proper_note.clear();
  size_t m = charges.size(), r = charges[0].size();
  if (m == r) { side.proper = false; side.proper_note = "fan is empty"; return; }
  size_t rb = m - r;
  auto ker = integer_kernel(charges);
  if (ker.size() != rb) {
    side.proper = false;
    side.proper_note = "charge kernel rank defect";
    return;
  }
  // nu_j = j-th column across kernel generators.
  std::vector<VecQ> nu(m, VecQ(rb));
  for (size_t j = 0; j < m; ++j)
    for (size_t s = 0; s < rb; ++s) nu[j][s] = ker[s][j];
  // Max cones: complements of minimal anticones.
  std::vector<std::vector<size_t>> cones;
  for (const auto& i : side.minimal_anticones) {
    std::vector<size_t> comp;
    for (size_t j = 0; j < m; ++j)
      if (!std::binary_search(i.begin(), i.end(), j)) comp.push_back(j);
    std::vector<VecQ> gens;
    for (size_t j : comp) gens.push_back(nu[j]);
    if (comp.size() != rb || cone_dim(gens) != rb) {
      side.proper = false;
      side.proper_note = "non-simplicial maximal cone";
      return;
    }
    cones.push_back(comp);
  }
  if (rb == 1) {  // fan on a line: complete iff both signs occur
    bool pos = false, neg = false;
    for (const auto& c : cones) {
      if (nu[c[0]][0] > 0) pos = true;
      if (nu[c[0]][0] < 0) neg = true;
    }
    if (!(pos && neg)) {
      side.proper = false;
      side.proper_note = "1-dim fan misses a direction";
    }
    return;
  }
  // Each ridge (facet of a max cone) must lie in exactly two max cones.
  for (const auto& cj : cones) {
    for (size_t drop = 0; drop < cj.size(); ++drop) {
      std::vector<VecQ> ridge;
      for (size_t t = 0; t < cj.size(); ++t)
        if (t != drop) ridge.push_back(nu[cj[t]]);
      size_t cnt = 0;
      for (const auto& ck : cones) {
        std::vector<VecQ> gens;
        for (size_t j : ck) gens.push_back(nu[j]);
        bool inside = true;
        for (const auto& g : ridge)
          if (!in_cone(gens, g)) { inside = false; break; }
        if (inside) ++cnt;
      }
      if (cnt != 2) {
        side.proper = false;
        side.proper_note = "ridge shared by " + std::to_string(cnt) +
                           " maximal cones";
        return;
      }
    }
  }
}

inline SideGeom build_side(const GitInput& in, const VecQ& omega,
                           const std::optional<Mat>& puser, const Z& delta,
                           const std::optional<VecI>& e) {
  SideGeom s;
  s.omega = omega;
  s.anticones = anticone_family(in.charges, omega);
  require(!s.anticones.empty(), Err::ConfigError,
          "omega lies in no anticone (unstable)");
  s.minimal_anticones = minimal_members(s.anticones);
  for (const auto& i : s.minimal_anticones)
    require(cone_dim(charge_gens(in.charges, i)) == in.r, Err::ConfigError,
            "omega lies on a wall (non-generic): anticone " +
                std::to_string(i.size()) + " of lower dimension");
  s.full_dimensional = true;  // guaranteed by the rank requirement above
  s.chamber_ineq = chamber_hrep(in.charges, s.minimal_anticones, in.r);
  {
    VecQ rho(in.r, Q(0));
    for (const VecI& dj : in.charges)
      for (size_t k = 0; k < in.r; ++k) rho[k] += dj[k];
    s.extended_weak_fano = in_closed_chamber(in.charges, s.minimal_anticones, rho);
  }
  s.boxes = enumerate_boxes(in.charges, omega, delta, in.r);
  s.ltilde = lattice_basis_with_boxes(s.boxes, in.r);
  s.ldual = dual_lattice_basis(s.ltilde);
  if (puser.has_value()) {
    s.pbasis = *puser;
    // Validate: p_i in Ltilde^dual, closed chamber, unimodular; wall-adapted.
    Mat ldual_t = mat_transpose(s.ldual);
    Mat coord_rows;
    for (size_t i = 0; i < in.r; ++i) {
      const VecQ& p = s.pbasis[i];
      require(in_closed_chamber(in.charges, s.minimal_anticones, p),
              Err::ConfigError, "supplied p_" + std::to_string(i + 1) +
                                    " is outside the closed chamber");
      auto x = solve(ldual_t, p);
      require(x.has_value(), Err::ConfigError, "supplied p not in span");
      for (const Q& c : *x)
        require(q_is_int(c), Err::ConfigError,
                "supplied p_" + std::to_string(i + 1) +
                    " is not in the dual key lattice");
      coord_rows.push_back(*x);
      if (e.has_value()) {
        Q pe = dotq(p, *e);
        require((i + 1 < in.r) == (pe == 0), Err::ConfigError,
                "supplied basis is not wall-adapted");
      }
    }
    Q d = det(coord_rows);
    require(abs(numerator(d)) == 1 && denominator(d) == 1, Err::ConfigError,
            "supplied p-basis is not unimodular for the dual key lattice");
  } else {
    s.pbasis = search_pbasis(s, in.charges, e);
  }
  auto pinv = mat_inverse(s.pbasis);
  require(pinv.has_value(), Err::InternalError, "p-basis singular");
  s.qbasis = mat_transpose(*pinv);  // rows q_i = columns of P^{-1}
  Mat pt = mat_transpose(s.pbasis);
  s.amat.clear();
  for (const VecI& dj : in.charges) {
    auto a = solve(pt, to_vecq(dj));
    require(a.has_value(), Err::InternalError, "charge not in p-span");
    s.amat.push_back(*a);
  }
  s.degw.clear();
  for (size_t i = 0; i < in.r; ++i) s.degw.push_back(dotq(omega, s.qbasis[i]));
  check_proper(s, in.charges);
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Wall detection between two labeled chambers.
// ---------------------------------------------------------------------------
namespace detail {

// sup { t in [0,1] : omega_- + t (omega_+ - omega_-) in closed minus chamber }
inline Q crossing_sup(const std::vector<VecI>& charges,
                      const std::vector<std::vector<size_t>>& mins,
                      const VecQ& from, const VecQ& to) {
  size_t r = from.size();
  // Variables: t, slack s (t + s = 1), then one coefficient block per cone.
  size_t nv = 2;
  for (const auto& i : mins) nv += i.size();
  Mat a;
  VecQ b;
  VecQ dir(r);
  for (size_t k = 0; k < r; ++k) dir[k] = to[k] - from[k];
  size_t off = 2;
  for (const auto& i : mins) {
    for (size_t k = 0; k < r; ++k) {
      VecQ row(nv, Q(0));
      row[0] = -dir[k];
      for (size_t idx = 0; idx < i.size(); ++idx)
        row[off + idx] = charges[i[idx]][k];
      a.push_back(row);
      b.push_back(from[k]);
    }
    off += i.size();
  }
  {
    VecQ row(nv, Q(0));
    row[0] = 1;
    row[1] = 1;
    a.push_back(row);
    b.push_back(Q(1));
  }
  VecQ c(nv, Q(0));
  c[0] = 1;
  LpResult res = lp_max(c, a, b);
  require(res.status == LpResult::Optimal, Err::InternalError,
          "crossing LP unexpectedly " +
              std::string(res.status == LpResult::Infeasible ? "infeasible"
                                                             : "unbounded"));
  return res.value;
}

}  // namespace detail

inline GitModel build_git(const GitInput& in) {
  require(in.r >= 1, Err::ConfigError, "rank must be >= 1");
  require(in.charges.size() > in.r, Err::ConfigError,
          "need more charges than the rank");
  for (const VecI& d : in.charges)
    require(d.size() == in.r, Err::ConfigError, "charge row length != rank");
  require(in.omega_plus.size() == in.r, Err::ConfigError, "omega size");

  GitModel g;
  g.in = in;
  g.delta = detail::minor_lcm(in.charges, in.r);

  std::optional<VecI> e;
  if (in.omega_minus.has_value()) {
    require(in.omega_minus->size() == in.r, Err::ConfigError, "omega size");
    // Preliminary side data (families only) to locate the wall.
    auto fam_p = detail::anticone_family(in.charges, in.omega_plus);
    auto fam_m = detail::anticone_family(in.charges, *in.omega_minus);
    require(fam_p != fam_m, Err::ConfigError,
            "omega_+ and omega_- lie in the same chamber: no wall");
    auto mins_p = detail::minimal_members(fam_p);
    auto mins_m = detail::minimal_members(fam_m);
    Q tstar = detail::crossing_sup(in.charges, mins_m, *in.omega_minus,
                                   in.omega_plus);
    Q tplus = detail::crossing_sup(in.charges, mins_p, in.omega_plus,
                                   *in.omega_minus);
    require(tstar < 1 && tplus < 1, Err::ConfigError,
            "stability parameters not separated by a wall");
    require(tstar + tplus == 1, Err::ConfigError,
            "chambers are not adjacent along the segment");
    VecQ omega0(in.r);
    for (size_t k = 0; k < in.r; ++k)
      omega0[k] = (*in.omega_minus)[k] +
                  tstar * (in.omega_plus[k] - (*in.omega_minus)[k]);
    // Wall span: omega0 together with charges on the common boundary.
    Mat span{omega0};
    for (const VecI& dj : in.charges) {
      VecQ d = to_vecq(dj);
      if (detail::in_closed_chamber(in.charges, mins_p, d) &&
          detail::in_closed_chamber(in.charges, mins_m, d))
        span.push_back(d);
    }
    require(mat_rank(span) == in.r - 1, Err::ConfigError,
            "wall span detection failed (expected codimension 1)");
    auto ker = nullspace(span);
    require(ker.size() == 1, Err::InternalError, "wall normal not unique");
    VecI ev = primitive(ker[0]);
    Q pairing = dotq(in.omega_plus, ev);
    require(pairing != 0, Err::InternalError, "omega_+ on the wall");
    if (pairing < 0)
      for (long long& x : ev) x = -x;
    // Orientation convention: the discrepancy sum must be positive.
    Q esum = 0;
    for (const VecI& dj : in.charges) esum += dotq(to_vecq(dj), ev);
    require(esum != 0, Err::CrepantWall,
            "sum_j D_j . e == 0: wall is not discrepant");
    require(esum > 0, Err::LabelingError,
            "sum_j D_j . e < 0 with omega_+ . e > 0: swap the side labels");

    WallData w;
    w.e = ev;
    w.omega0 = omega0;
    for (const VecI& dj : in.charges) w.ej.push_back(dotq(to_vecq(dj), ev));
    w.esum = esum;
    e = ev;
    g.wall = std::move(w);
  }

  g.plus = detail::build_side(in, in.omega_plus, in.p_plus, g.delta, e);
  if (in.omega_minus.has_value()) {
    g.minus = detail::build_side(in, *in.omega_minus, in.p_minus, g.delta, e);
    WallData& w = *g.wall;
    w.pe_plus = dotq(g.plus.pbasis[in.r - 1], w.e);
    w.pe_minus = dotq(g.minus->pbasis[in.r - 1], w.e);
    // p_r^{+-} lie in their closed chambers, which sit on opposite sides of
    // the wall, so these signs are forced for any valid basis.
    require(w.pe_plus > 0, Err::InternalError, "p_r^+ . e <= 0");
    require(w.pe_minus < 0, Err::InternalError, "p_r^- . e >= 0");
    w.c = -w.pe_plus / w.pe_minus;
    // p_r^+ + c p_r^- in the wall span: coordinates in p^-_{i<r}.
    VecQ target(in.r);
    for (size_t k = 0; k < in.r; ++k)
      target[k] = g.plus.pbasis[in.r - 1][k] +
                  w.c * g.minus->pbasis[in.r - 1][k];
    Mat wallrows;
    for (size_t i = 0; i + 1 < in.r; ++i)
      wallrows.push_back(g.minus->pbasis[i]);
    auto ci = solve(mat_transpose(wallrows), target);
    require(ci.has_value(), Err::InternalError, "c_i solve failed");
    w.ci = *ci;
    w.lamcoef = -w.esum / w.pe_minus;
  }
  return g;
}

}  // namespace wallx
