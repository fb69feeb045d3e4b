// Chamber/wall combinatorics against hand-frozen data for the three shipped
// geometries: projective plane (single chamber), blowup model A, weighted
// model B.
#include <catch2/catch_amalgamated.hpp>

#include "test_models.hpp"
#include "wallx/git_core.hpp"

using namespace wallx;
using testmodels::model_a_input;
using testmodels::model_b_input;
using testmodels::p2_input;

namespace {
using Fam = std::vector<std::vector<size_t>>;
}  // namespace

TEST_CASE("projective plane: single chamber") {
  GitModel g = build_git(p2_input());
  CHECK(g.delta == 1);
  CHECK(g.plus.anticones.size() == 7);  // every nonempty subset
  CHECK(g.plus.minimal_anticones == Fam{{0}, {1}, {2}});
  REQUIRE(g.plus.boxes.size() == 1);
  CHECK(is_zero(g.plus.boxes[0].f));
  CHECK(g.plus.pbasis == Mat{{Q(1)}});
  CHECK(g.plus.degw == VecQ{Q(1)});
  CHECK(g.plus.proper);
  CHECK(!g.minus.has_value());
  CHECK(!g.wall.has_value());
}

TEST_CASE("model A: anticone families, wall, bases") {
  GitModel g = build_git(model_a_input());
  CHECK(g.delta == 1);
  CHECK(g.plus.minimal_anticones == Fam{{0, 2}, {0, 3}, {1, 2}, {1, 3}});
  REQUIRE(g.minus.has_value());
  CHECK(g.minus->minimal_anticones == Fam{{0, 3}, {1, 3}, {2, 3}});
  CHECK(g.plus.boxes.size() == 1);
  CHECK(g.minus->boxes.size() == 1);

  REQUIRE(g.wall.has_value());
  const WallData& w = *g.wall;
  CHECK(w.e == VecI{0, 1});
  CHECK(w.omega0 == VecQ{Q(2), Q(0)});
  CHECK(w.ej == std::vector<Q>{Q(1), Q(1), Q(0), Q(-1)});
  CHECK(w.esum == 1);

  CHECK(g.plus.pbasis == Mat{{Q(1), Q(0)}, {Q(1), Q(1)}});
  CHECK(g.minus->pbasis == Mat{{Q(1), Q(0)}, {Q(0), Q(-1)}});
  CHECK(g.plus.degw == VecQ{Q(1), Q(1)});
  CHECK(g.minus->degw == VecQ{Q(2), Q(1)});

  CHECK(w.pe_plus == 1);
  CHECK(w.pe_minus == -1);
  CHECK(w.c == 1);
  CHECK(w.ci == VecQ{Q(1)});
  CHECK(w.lamcoef == 1);

  CHECK(g.plus.proper);
  CHECK(g.minus->proper);

  // a-matrix: D_j = sum_i a_ji p_i on the plus side.
  // D_0 = (1,1) = 0*p_1 + 1*p_2, D_2 = (1,0) = p_1, D_3 = (0,-1) = p_1 - p_2.
  CHECK(g.plus.amat[0] == VecQ{Q(0), Q(1)});
  CHECK(g.plus.amat[2] == VecQ{Q(1), Q(0)});
  CHECK(g.plus.amat[3] == VecQ{Q(1), Q(-1)});
}

TEST_CASE("model B: fractional boxes, wall constants") {
  GitModel g = build_git(model_b_input());
  CHECK(g.delta == 3);
  CHECK(g.plus.minimal_anticones == Fam{{0, 3}, {1, 3}, {2, 3}});
  REQUIRE(g.minus.has_value());
  CHECK(g.minus->minimal_anticones == Fam{{0, 2}, {0, 3}, {1, 2}, {1, 3}});

  // Plus side carries two nontrivial sectors with ages 2/3 and 4/3.
  REQUIRE(g.plus.boxes.size() == 3);
  CHECK(g.plus.boxes[0].f == VecQ{Q(0), Q(0)});
  CHECK(g.plus.boxes[1].f == VecQ{Q(1, 3), Q(0)});
  CHECK(g.plus.boxes[2].f == VecQ{Q(2, 3), Q(0)});
  CHECK(g.plus.boxes[1].isect == std::vector<size_t>{2, 3});
  CHECK(g.plus.boxes[1].age == Q(2, 3));
  CHECK(g.plus.boxes[2].age == Q(4, 3));
  CHECK(g.minus->boxes.size() == 1);

  REQUIRE(g.wall.has_value());
  const WallData& w = *g.wall;
  CHECK(w.e == VecI{-1, 3});
  CHECK(w.omega0 == VecQ{Q(3), Q(1)});
  CHECK(w.ej == std::vector<Q>{Q(-1), Q(-1), Q(0), Q(3)});
  CHECK(w.esum == 1);

  CHECK(g.plus.pbasis == Mat{{Q(3), Q(1)}, {Q(0), Q(1)}});
  CHECK(g.minus->pbasis == Mat{{Q(3), Q(1)}, {Q(1), Q(0)}});
  CHECK(g.plus.degw == VecQ{Q(1, 3), Q(2, 3)});
  CHECK(g.minus->degw == VecQ{Q(1), Q(1)});

  CHECK(w.pe_plus == 3);
  CHECK(w.pe_minus == -1);
  CHECK(w.c == 3);
  CHECK(w.ci == VecQ{Q(1)});
  CHECK(w.lamcoef == 1);

  // Key lattice on the plus side contains (1/3, 0).
  CHECK(g.plus.ltilde == Mat{{Q(1, 3), Q(0)}, {Q(0), Q(1)}});

  // Sector lookup: fractional class of -k.
  CHECK(g.plus.sector_of_key({1, 0}) == 2);
  CHECK(g.plus.sector_of_key({0, 1}) == 1);
  CHECK(g.plus.sector_of_key({1, 1}) == 0);
  CHECK(g.plus.sector_of_key({2, 0}) == 1);
  CHECK(g.minus->sector_of_key({5, 2}) == 0);
}

TEST_CASE("degree functional equals pairing with omega") {
  GitModel g = build_git(model_b_input());
  // deg(n) = <omega, sum n_i q_i> checked against direct ambient pairing.
  for (long long n1 = 0; n1 <= 3; ++n1)
    for (long long n2 = 0; n2 <= 3; ++n2) {
      VecI n{n1, n2};
      CHECK(g.plus.deg_of(n) == dotq(g.plus.omega, g.plus.key_ambient(n)));
      CHECK(g.minus->deg_of(n) ==
            dotq(g.minus->omega, g.minus->key_ambient(n)));
    }
  CHECK(g.plus.deg_of({1, 0}) == Q(1, 3));
  CHECK(g.plus.deg_of({1, 1}) == 1);
  CHECK(g.minus->deg_of({2, 1}) == 3);
}

TEST_CASE("labeling and crepancy guards") {
  // Swapping the labels of model B flips e and the discrepancy sign.
  GitInput swapped = model_b_input();
  std::swap(swapped.omega_plus, *swapped.omega_minus);
  CHECK_THROWS_MATCHES(build_git(swapped), Error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("LabelingError")));

  // Crepant wall in rank 1: charges (1,1,-1,-1).
  GitInput crep;
  crep.r = 1;
  crep.charges = {{1}, {1}, {-1}, {-1}};
  crep.omega_plus = {Q(1)};
  crep.omega_minus = VecQ{Q(-1)};
  CHECK_THROWS_MATCHES(build_git(crep), Error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("CrepantWall")));

  // Same chamber on both labels: no wall.
  GitInput same = model_a_input();
  same.omega_minus = VecQ{Q(3), Q(1)};
  CHECK_THROWS_AS(build_git(same), Error);

  // omega on a wall is rejected as non-generic.
  GitInput ongwall = model_a_input();
  ongwall.omega_plus = {Q(2), Q(0)};
  ongwall.omega_minus.reset();
  CHECK_THROWS_AS(build_git(ongwall), Error);
}

TEST_CASE("supplied basis validation") {
  GitInput in = model_a_input();
  in.p_plus = Mat{{Q(1), Q(0)}, {Q(2), Q(1)}};  // valid alternative basis
  GitModel g = build_git(in);
  CHECK(g.plus.pbasis == *in.p_plus);

  in.p_plus = Mat{{Q(1), Q(0)}, {Q(2), Q(2)}};  // index-2 sublattice
  CHECK_THROWS_AS(build_git(in), Error);

  in.p_plus = Mat{{Q(1), Q(0)}, {Q(0), Q(-1)}};  // p_2 outside closed chamber
  CHECK_THROWS_AS(build_git(in), Error);

  in.p_plus = Mat{{Q(1), Q(1)}, {Q(1), Q(0)}};  // p_1 not on the wall
  CHECK_THROWS_AS(build_git(in), Error);
}

TEST_CASE("properness flag is warn-only") {
  // Local model (resolved conifold fiberwise): fan is not complete.
  GitInput in;
  in.r = 1;
  in.charges = {{1}, {1}, {-1}, {-1}};
  in.omega_plus = {Q(1)};
  GitModel g = build_git(in);
  CHECK(!g.plus.proper);
  CHECK(!g.plus.proper_note.empty());

  CHECK(build_git(p2_input()).plus.proper);
}

namespace {
wallx::Mat sorted_rows(wallx::Mat m) {
  std::sort(m.begin(), m.end());
  return m;
}
}  // namespace

TEST_CASE("chamber inequality description") {
  GitModel p2 = build_git(p2_input());
  CHECK(p2.plus.full_dimensional);
  CHECK(p2.plus.chamber_ineq == Mat{{Q(1)}});

  GitModel a = build_git(model_a_input());
  CHECK(sorted_rows(a.plus.chamber_ineq) ==
        sorted_rows(Mat{{Q(1), Q(-1)}, {Q(0), Q(1)}}));
  CHECK(sorted_rows(a.minus->chamber_ineq) ==
        sorted_rows(Mat{{Q(1), Q(0)}, {Q(0), Q(-1)}}));

  GitModel b = build_git(model_b_input());
  CHECK(sorted_rows(b.plus.chamber_ineq) ==
        sorted_rows(Mat{{Q(-1), Q(3)}, {Q(1), Q(0)}}));
  CHECK(sorted_rows(b.minus->chamber_ineq) ==
        sorted_rows(Mat{{Q(1), Q(-3)}, {Q(0), Q(1)}}));

  // The inequality description and the anticone-membership test must agree
  // on a sweep of rational points (boundary, interior, and exterior ones).
  auto sweep = [](const GitInput& in, const SideGeom& s) {
    for (long long x = -4; x <= 4; ++x)
      for (long long y = -4; y <= 4; ++y) {
        VecQ v{Q(x), Q(y, 3)};
        bool by_ineq = true;
        for (const VecQ& h : s.chamber_ineq)
          if (dotq(h, v) < 0) by_ineq = false;
        bool by_cones =
            wallx::detail::in_closed_chamber(in.charges, s.minimal_anticones, v);
        REQUIRE(by_ineq == by_cones);
      }
  };
  sweep(model_a_input(), a.plus);
  sweep(model_a_input(), *a.minus);
  sweep(model_b_input(), b.plus);
  sweep(model_b_input(), *b.minus);
}

TEST_CASE("extended weak Fano flag") {
  // sum_j D_j lies in the closed chamber exactly on the plus sides here
  // (and for the projective plane).
  CHECK(build_git(p2_input()).plus.extended_weak_fano);
  GitModel a = build_git(model_a_input());
  CHECK(a.plus.extended_weak_fano);
  CHECK(!a.minus->extended_weak_fano);
  GitModel b = build_git(model_b_input());
  CHECK(b.plus.extended_weak_fano);
  CHECK(!b.minus->extended_weak_fano);
}
