// Annihilation of the series by the box operators, checked by honest
// derivations on the log expansion and by the equivalent coefficient
// recursion, plus the prefactor identity tying the two routes together and
// the blockwise Euler-word identity for twisted tables.
#include <catch2/catch_amalgamated.hpp>

#include "test_models.hpp"
#include "wallx/gkz.hpp"

using namespace wallx;
using testmodels::model_a_input;
using testmodels::model_b_input;
using testmodels::p2_input;

namespace {

struct Owned {
  GitModel g;
  SideCohomology cp, cm;
  explicit Owned(const GitInput& in) : g(build_git(in)) {
    cp = build_side_cohomology(g.in.charges, g.plus);
    if (g.minus) cm = build_side_cohomology(g.in.charges, *g.minus);
  }
  SideCtx plus() const { return SideCtx{g.in.charges, g.plus, cp}; }
  SideCtx minus() const { return SideCtx{g.in.charges, *g.minus, cm}; }
};

void expect_annihilation(const SideCtx& cx, const CoeffTable& t, const VecI& d) {
  GkzCheck a = gkz_operator_check(cx, t, d);
  INFO("direction " << vec_str(to_vecq(d)) << ": " << a.first_failure);
  CHECK(a.ok);
  CHECK(a.keys_checked > 0);
  GkzCheck b = gkz_recursion_check(cx, t, d);
  INFO("recursion at " << vec_str(to_vecq(d)) << ": " << b.first_failure);
  CHECK(b.ok);
}

}  // namespace

TEST_CASE("projective plane series is annihilated") {
  Owned P(p2_input());
  SideCtx cx = P.plus();
  CoeffTable t = build_coeff_table(cx, Q(5));
  for (const VecI& d : {VecI{1}, VecI{-1}, VecI{2}}) expect_annihilation(cx, t, d);
}

TEST_CASE("blowup model series is annihilated on both sides") {
  Owned A(model_a_input());
  VecI e = A.g.wall->e;
  for (bool plus : {true, false}) {
    SideCtx cx = plus ? A.plus() : A.minus();
    CoeffTable t = build_coeff_table(cx, Q(4));
    VecI me = e;
    for (long long& x : me) x = -x;
    for (const VecI& d :
         {VecI{1, 0}, VecI{0, 1}, VecI{1, 1}, VecI{0, -1}, e, me})
      expect_annihilation(cx, t, d);
  }
}

TEST_CASE("weighted model series is annihilated on both sides") {
  Owned B(model_b_input());
  VecI e = B.g.wall->e;  // (-1, 3)
  VecI me = e;
  for (long long& x : me) x = -x;
  {
    SideCtx cx = B.plus();
    CoeffTable t = build_coeff_table(cx, Q(3));
    for (const VecI& d : {VecI{1, 0}, VecI{0, 1}, e, me})
      expect_annihilation(cx, t, d);
  }
  {
    SideCtx cx = B.minus();
    CoeffTable t = build_coeff_table(cx, Q(3));
    for (const VecI& d : {VecI{1, 0}, VecI{0, 1}, e, me})
      expect_annihilation(cx, t, d);
  }
}

TEST_CASE("coefficient recursion at deterministic random directions") {
  DetRng rng;
  for (const GitInput& in : {model_a_input(), model_b_input()}) {
    Owned m(in);
    for (bool plus : {true, false}) {
      SideCtx cx = plus ? m.plus() : m.minus();
      CoeffTable t = build_coeff_table(cx, Q(4));
      size_t ran = 0;
      for (int trial = 0; trial < 6; ++trial) {
        VecI d(2);
        do {
          d[0] = rng.range(-2, 2);
          d[1] = rng.range(-2, 2);
        } while (d[0] == 0 && d[1] == 0);
        try {
          GkzCheck b = gkz_recursion_check(cx, t, d);
          INFO("direction " << vec_str(to_vecq(d)) << ": " << b.first_failure);
          CHECK(b.ok);
          ++ran;
        } catch (const Error& e) {
          // a steep direction can leave no determined slot at this order
          CHECK(e.code() == Err::WindowExceeded);
        }
      }
      CHECK(ran >= 3);
    }
  }
}

TEST_CASE("prefactor identity links derivations to multiplication") {
  for (const GitInput& in : {p2_input(), model_a_input(), model_b_input()}) {
    Owned m(in);
    std::vector<SideCtx> sides = {m.plus()};
    if (m.g.minus) sides.push_back(m.minus());
    for (const SideCtx& cx : sides) {
      CoeffTable t = build_coeff_table(cx, Q(2));
      for (size_t j = 0; j < m.g.in.charges.size(); ++j)
        CHECK(prefactor_identity_check(cx, t, j));
    }
  }
}

TEST_CASE("euler word reproduces the twist, block by block") {
  Owned A(model_a_input());
  {
    SideCtx cx = A.plus();
    CoeffTable t = build_coeff_table(cx, Q(4));
    GkzCheck c1 = lefschetz_block_check(cx, t, {{1, 0}}, A.g.wall->pe_plus);
    INFO(c1.first_failure);
    CHECK(c1.ok);
    CHECK(c1.keys_checked == t.c.size());
    CoeffTable t3 = build_coeff_table(cx, Q(3));
    GkzCheck c2 =
        lefschetz_block_check(cx, t3, {{1, 0}, {2, 0}}, A.g.wall->pe_plus);
    INFO(c2.first_failure);
    CHECK(c2.ok);
  }
  {
    SideCtx cx = A.minus();
    CoeffTable t = build_coeff_table(cx, Q(4));
    GkzCheck c1 = lefschetz_block_check(cx, t, {{1, 0}}, A.g.wall->pe_minus);
    INFO(c1.first_failure);
    CHECK(c1.ok);
    GkzCheck c2 =
        lefschetz_block_check(cx, t, {{1, 0}, {2, 0}}, A.g.wall->pe_minus);
    INFO(c2.first_failure);
    CHECK(c2.ok);
  }
}

TEST_CASE("window guard") {
  Owned P(p2_input());
  SideCtx cx = P.plus();
  CoeffTable t = build_coeff_table(cx, Q(0));
  try {
    gkz_operator_check(cx, t, {-1});
    FAIL("expected WindowExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == Err::WindowExceeded);
  }
}
