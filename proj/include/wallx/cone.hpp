#pragma once
// Polyhedral-cone membership predicates via exact LP. Cones are given by
// generator lists; no H-representation is ever materialized.

#include "wallx/simplex.hpp"

namespace wallx {

namespace detail {
// Columns = generators, giving the constraint matrix of  sum_i a_i g_i = x.
inline Mat gen_matrix(const std::vector<VecQ>& gens, size_t dim) {
  Mat a(dim, VecQ(gens.size(), Q(0)));
  for (size_t j = 0; j < gens.size(); ++j) {
    require(gens[j].size() == dim, Err::InternalError, "generator dim");
    for (size_t i = 0; i < dim; ++i) a[i][j] = gens[j][i];
  }
  return a;
}
}  // namespace detail

// x in { sum a_i g_i : a_i >= 0 } ?
inline bool in_cone(const std::vector<VecQ>& gens, const VecQ& x) {
  if (gens.empty()) return is_zero(x);
  return lp_feasible(detail::gen_matrix(gens, x.size()), x, gens.size());
}

// x in the strictly positive span { sum a_i g_i : a_i > 0 } ?
// The feasible set {a >= 0 : sum a_i g_i = x} is convex, so a point with all
// coordinates positive exists iff each coordinate can individually be made
// positive (average witnesses).
inline bool in_strict_cone(const std::vector<VecQ>& gens, const VecQ& x) {
  if (gens.empty()) return is_zero(x);
  Mat a = detail::gen_matrix(gens, x.size());
  for (size_t i = 0; i < gens.size(); ++i) {
    VecQ c(gens.size(), Q(0));
    c[i] = 1;
    LpResult r = lp_max(c, a, x);
    if (r.status == LpResult::Infeasible) return false;
    if (r.status == LpResult::Optimal && r.value <= 0) return false;
  }
  return true;
}

inline size_t cone_dim(const std::vector<VecQ>& gens) {
  Mat m;
  for (const VecQ& g : gens) m.push_back(g);
  return mat_rank(m);
}

}  // namespace wallx
