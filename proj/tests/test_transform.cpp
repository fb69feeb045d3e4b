// Numeric mirror of the coefficient tables, matched-point block sums on the
// two chart expansions, the least-squares fit of the connection matrix, its
// Laurent structure across z samples, and the Euler-twist block identities
// (exact form and numeric commutation with the fitted matrix).
#include <catch2/catch_amalgamated.hpp>

#include "test_models.hpp"
#include "wallx/resummation.hpp"
#include "wallx/transform.hpp"

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
  const WallData& wall() const { return *g.wall; }
};

double rel_gap(const CVec& a, const CVec& b) {
  double num = 0, den = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / std::max(den, 1e-300);
}

// Every table coefficient, evaluated at a fixed z, must agree with the
// floating-point product built by the numeric kernel.
void check_numeric_oracle(const SideCtx& cx, const Q& order, Cplx z0,
                          const std::vector<VecI>& twists) {
  SideEvaluator ev(cx);
  CoeffTable table = build_coeff_table(cx, order);
  if (!twists.empty()) table = twist_table(cx, table, twists);
  size_t checked = 0;
  for (auto& [n, val] : table.c) {
    const SectorRing& R = cx.ring(val.sector);
    CVec exact = zc_eval_z(R, val, z0);
    CVec num = num_coeff_at_key(cx, ev.rings[size_t(val.sector)], n,
                                val.sector, z0, twists);
    REQUIRE(rel_gap(num, exact) <= 1e-12);
    ++checked;
  }
  CHECK(checked > 10);
}

}  // namespace

TEST_CASE("numeric coefficient kernel matches the exact table") {
  Cplx z0(1.3, 0.4);
  SECTION("two-wall flop model, both sides") {
    Owned A(model_a_input());
    check_numeric_oracle(A.plus(), Q(6), z0, {});
    check_numeric_oracle(A.minus(), Q(6), z0, {});
    check_numeric_oracle(A.plus(), Q(6), Cplx(0, 1), {});
  }
  SECTION("orbifold-side model with box sectors") {
    Owned B(model_b_input());
    check_numeric_oracle(B.plus(), Q(4), z0, {});
    check_numeric_oracle(B.minus(), Q(4), z0, {});
  }
  SECTION("Euler-twisted coefficients") {
    Owned A(model_a_input());
    check_numeric_oracle(A.plus(), Q(6), z0, {{1, 0}});
    check_numeric_oracle(A.minus(), Q(6), z0, {{1, 0}, {2, 0}});
  }
}

TEST_CASE("projective-space sum reproduces the scalar series") {
  Owned P(p2_input());
  SideCtx cx = P.plus();
  SideEvaluator ev(cx);
  double y = 0.3;
  for (Cplx z : {Cplx(1, 0), Cplx(0, 2)}) {
    NumTable t = build_num_table(ev, z, 0, 60);
    BlockEval be = eval_blocks(ev, t, {std::log(y)}, z, Chart::Convergent);
    Cplx expect = 0;
    for (int n = 25; n >= 0; --n) {
      Cplx c = 1;
      for (int a = 1; a <= n; ++a) c /= double(a) * z;
      expect += std::pow(y, n) * c * c * c;
    }
    expect *= z;
    // identity component of the product: the prefactor exponential has unit
    // scalar part, so only the scalar parts meet in degree zero
    CHECK(std::abs(be.total[0] - expect) <= 1e-13 * std::abs(expect));
    REQUIRE(be.block.size() == 1);
    CHECK(rel_gap(be.block.begin()->second, be.total) == 0.0);
  }
}

TEST_CASE("matched points relate the two charts") {
  Owned A(model_a_input());
  const WallData& w = A.wall();
  std::vector<Cplx> lt = {Cplx(std::log(0.1), 0)};
  Cplx lw(std::log(20.0), 0.05);
  MatchedPoint p = matched_point(w, lt, lw);
  // ytilde_r = y_r^{-c} and ytilde_i = y_i y_r^{c_i}
  CHECK(std::abs(p.logyt[1] + q_dbl(w.c) * p.logy[1]) < 1e-15);
  CHECK(std::abs(p.logyt[0] - (p.logy[0] + q_dbl(w.ci[0]) * p.logy[1])) <
        1e-15);
}

TEST_CASE("twist word applied blockwise reproduces the twisted expansion") {
  Owned A(model_a_input());
  for (bool plus_side : {true, false}) {
    SideCtx cx = plus_side ? A.plus() : A.minus();
    CoeffTable table = build_coeff_table(cx, Q(6));

    CiIdentityReport one = ci_block_identity(cx, table, {{1, 0}});
    CHECK(one.ok);
    CHECK(one.blocks > 3);
    CHECK(one.keys > 10);

    CiIdentityReport two = ci_block_identity(cx, table, {{1, 0}, {2, 0}});
    CHECK(two.ok);

    CiIdentityReport none = ci_block_identity(cx, table, {});
    CHECK(none.ok);

    // the shift must lower the ladder: raising it breaks the identity
    CiIdentityReport flipped = ci_block_identity(cx, table, {{1, 0}}, +1);
    CHECK_FALSE(flipped.ok);
    CHECK(flipped.first_failure.find("key") != std::string::npos);
  }
  std::vector<VecI> twists = {{1, 0}, {2, 0}};
  validate_twists(A.g, twists);  // integral pairings, chamber, wall-stable
}

TEST_CASE("self-crossing fit recovers the identity matrix") {
  Owned A(model_a_input());
  SideCtx cx = A.plus();
  SideEvaluator ev(cx);
  Cplx z(1, 0);
  NumTable t = build_num_table(ev, z, 8, 120);
  std::vector<VecI> labels = shared_labels(t, t, 5);

  BlockSamples bs;
  for (double tv : {0.05, 0.2, 0.6}) {
    for (double R : {1.5, 2.5, 4.0, 6.0}) {
      MatchedPoint p =
          matched_point(A.wall(), {Cplx(std::log(tv), 0)},
                        Cplx(std::log(R), 0.05));
      BlockEval be = eval_blocks(ev, t, p.logy, z, Chart::Convergent);
      bs.src.push_back(be.block);
      bs.dst.push_back(be.block);
      bs.dst_floor.emplace_back();
      bs.src_total.push_back(be.total);
      bs.dst_total.push_back(be.total);
    }
  }
  FitDiag d = fit_one_z(z, bs, labels, ev.dim_cr, ev.dim_cr, 1e-10, 0.0);
  REQUIRE(d.design_rank == ev.dim_cr);
  REQUIRE(d.rank == ev.dim_cr);
  for (size_t a = 0; a < ev.dim_cr; ++a)
    for (size_t b = 0; b < ev.dim_cr; ++b) {
      Cplx want = a == b ? Cplx(1) : Cplx(0);
      CHECK(std::abs(d.L(Eigen::Index(a), Eigen::Index(b)) - want) <= 1e-8);
    }
  CHECK(d.residual <= 1e-10);
  CHECK(d.leakage <= 1e-8);
  CHECK(d.split_half <= 1e-8);
}

TEST_CASE("laurent models of fitted entries across z samples") {
  auto mk = [](const std::vector<Cplx>& zs,
               const std::function<Cplx(Cplx)>& f) {
    std::vector<FitDiag> per_z;
    for (Cplx z : zs) {
      FitDiag d;
      d.z = z;
      d.L = Eigen::MatrixXcd::Zero(1, 1);
      d.L(0, 0) = f(z);
      per_z.push_back(d);
    }
    return per_z;
  };
  std::vector<Cplx> zs3 = {Cplx(1, 0), Cplx(0, 2), Cplx(-1, 1)};
  FitConfig cfg;

  std::vector<Cplx> zs8;
  for (int i = 0; i < 8; ++i)
    zs8.push_back(std::polar(1.0 + 0.2 * i, 0.4 * i + 0.3));

  SECTION("pure monomial is recognized with its exponent") {
    auto per_z = mk(zs3, [](Cplx z) { return 3.0 * z * z; });
    std::vector<LaurentEntry> ents;
    bool graded = true;
    size_t amb = 0;
    fit_laurent_entries(per_z, {2}, {0}, cfg, ents, graded, amb);
    REQUIRE(ents.size() == 1);
    REQUIRE(ents[0].poly.size() == 1);
    CHECK(ents[0].poly.count(2) == 1);
    CHECK(std::abs(ents[0].poly.at(2) - Cplx(3)) < 1e-12);
    CHECK(ents[0].spread < 1e-12);
    CHECK(graded);  // exponent 2 == deg 2 - deg 0
    CHECK(amb == 0);
  }
  SECTION("monomial off the degree difference clears the graded flag") {
    auto per_z = mk(zs3, [](Cplx z) { return z; });
    std::vector<LaurentEntry> ents;
    bool graded = true;
    size_t amb = 0;
    fit_laurent_entries(per_z, {0}, {0}, cfg, ents, graded, amb);
    REQUIRE(ents.size() == 1);
    CHECK_FALSE(graded);
  }
  SECTION("binomial entry needs the dense window fit") {
    auto per_z = mk(zs8, [](Cplx z) { return 2.0 * z + 0.5; });
    std::vector<LaurentEntry> ents;
    bool graded = true;
    size_t amb = 0;
    fit_laurent_entries(per_z, {1}, {0}, cfg, ents, graded, amb);
    REQUIRE(ents.size() == 1);
    CHECK(ents[0].poly.size() == 2);
    CHECK(std::abs(ents[0].poly.at(1) - Cplx(2)) < 1e-9);
    CHECK(std::abs(ents[0].poly.at(0) - Cplx(0.5)) < 1e-9);
    CHECK_FALSE(graded);
    CHECK(amb == 0);
  }
  SECTION("underdetermined off-model entry is reported, not an error") {
    // three z samples cannot overdetermine the window, so a value that no
    // window monomial explains is kept with its spread and counted
    auto per_z = mk(zs3, [](Cplx z) { return std::pow(z, -4.0); });
    std::vector<LaurentEntry> ents;
    bool graded = true;
    size_t amb = 0;
    fit_laurent_entries(per_z, {0}, {0}, cfg, ents, graded, amb);
    REQUIRE(ents.size() == 1);
    CHECK(ents[0].spread > cfg.monomial_tol);
    CHECK(amb == 1);
    CHECK(graded);  // an unmodeled entry does not vote on the grading
  }
  SECTION("monomial outside the window cannot be modeled") {
    auto per_z = mk(zs8, [](Cplx z) { return std::pow(z, -4.0); });
    std::vector<LaurentEntry> ents;
    bool graded = true;
    size_t amb = 0;
    try {
      fit_laurent_entries(per_z, {0}, {0}, cfg, ents, graded, amb);
      FAIL("expected the window to be exceeded");
    } catch (const Error& e) {
      CHECK(e.code() == Err::WindowExceeded);
    }
  }
}

TEST_CASE("connection matrix fit across the flop wall") {
  Owned A(model_a_input());
  FitConfig cfg;
  cfg.zs = {Cplx(1, 0), Cplx(0, 2), Cplx(-1, 1)};
  cfg.ray_arg = 0.05;
  for (int k = 0; k < 8; ++k) cfg.mags.push_back(16.0 + 1.5 * k);
  cfg.transverse = {{0.05}, {0.2}};
  cfg.threads = 2;

  ConnectionFit fit = solve_L_fit(A.g, A.cp, A.cm, cfg);

  REQUIRE(fit.dim_plus == 4);
  REQUIRE(fit.dim_minus == 3);
  REQUIRE(fit.labels.size() == 5);
  CHECK_FALSE(fit.ewf_warning);  // this side satisfies the fan condition
  REQUIRE(fit.per_z.size() == 3);

  for (const FitDiag& d : fit.per_z) {
    INFO("z = " << d.z);
    CHECK(d.rank == 3);  // numeric rank of L = dimension of the target
    CHECK(d.residual <= 1e-3);
    CHECK(d.leakage <= 1e-3);
    CHECK(d.split_half <= 1e-3);  // stable under dropping half the samples
    REQUIRE(d.design_sv.size() == 4);
    CHECK(d.design_rank >= 3);
  }
  // Near phase zero the fourth source direction decays below every kept
  // term of the asymptotic chart and is left to the minimal-norm choice;
  // rotating z makes the targets demand it and the rank adapts.
  CHECK(fit.per_z[0].design_rank == 3);
  CHECK(fit.per_z[0].design_sv[3] <= 1e-4 * fit.per_z[0].design_sv[0]);
  CHECK(fit.per_z[1].design_rank == 4);
  CHECK(fit.per_z[2].design_rank == 4);

  // Entries the samples pin down are single monomials sitting at the graded
  // exponent; the rest move with the phase of z (the exponentially small
  // matching ambiguity) and are reported through their spread.
  CHECK(fit.graded_exponents);
  CHECK(fit.entries.size() >= 6);
  CHECK(fit.ambiguous_entries >= 2);
  auto entry = [&](size_t a, size_t b) -> const LaurentEntry* {
    for (const LaurentEntry& e : fit.entries)
      if (e.row == a && e.col == b) return &e;
    return nullptr;
  };
  const LaurentEntry* e11 = entry(1, 1);
  REQUIRE(e11 != nullptr);
  REQUIRE(e11->poly.count(0) == 1);
  CHECK(std::abs(e11->poly.at(0) - Cplx(1)) <= 1e-6);
  CHECK(e11->spread <= 1e-6);
  const LaurentEntry* e23 = entry(2, 3);
  REQUIRE(e23 != nullptr);
  REQUIRE(e23->poly.count(0) == 1);
  CHECK(std::abs(e23->poly.at(0) - Cplx(-1)) <= 1e-3);
  CHECK(e23->spread <= 1e-3);
  for (const LaurentEntry& e : fit.entries)
    if (e.spread <= 1e-3) {
      REQUIRE(e.poly.size() == 1);
      CHECK(e.poly.begin()->first ==
            int(fit.deg_plus[e.col]) - int(fit.deg_minus[e.row]));
    }

  BlockMapReport bm = verify_G_block_mapping(fit, 0);
  CHECK(bm.samples == 16);
  CHECK(bm.max_leakage <= 1e-3);
  CHECK(bm.partition_gap <= 1e-13);
  CHECK(bm.per_label.size() >= 5);

  // the twist word commutes with the fitted matrix block by block; use the
  // z sample where the design resolves every direction
  CiTransformReport ct = ci_transform_check(A.g, A.cp, A.cm, fit.per_z[2].L,
                                            cfg.zs[2], {{1, 0}}, cfg);
  CHECK(ct.labels_checked == 5);
  CHECK(ct.samples == 16);
  CHECK(ct.word_same_conv <= 1e-10);
  CHECK(ct.word_same_asym <= 1e-3);
  CHECK(ct.max_mismatch <= 1e-3);
}

TEST_CASE("fit configuration is validated") {
  Owned A(model_a_input());
  FitConfig good;
  good.zs = {Cplx(1, 0)};
  good.mags = {16.0, 17.5, 19.0, 20.5};
  good.transverse = {{0.05}};

  auto expect_config_error = [&](FitConfig cfg) {
    try {
      solve_L_fit(A.g, A.cp, A.cm, cfg);
      FAIL("expected a configuration error");
    } catch (const Error& e) {
      CHECK(e.code() == Err::ConfigError);
    }
  };

  FitConfig c = good;
  c.ray_arg = 0.0;
  expect_config_error(c);  // the ray must leave the positive axis
  c = good;
  c.ray_arg = 0.31;
  expect_config_error(c);  // and stay within the sector of validity
  c = good;
  c.zs = {Cplx(0, 0)};
  expect_config_error(c);
  c = good;
  c.mags = {16.0};
  expect_config_error(c);  // fewer samples than matrix columns
  c = good;
  c.mags = {0.5, 16.0, 17.0, 18.0};
  expect_config_error(c);
  c = good;
  c.transverse = {{0.05, 0.2}};
  expect_config_error(c);  // rank mismatch in the transverse tuple
}

TEST_CASE("degenerate sampling is reported as ill conditioned") {
  Owned A(model_a_input());
  FitConfig cfg;
  cfg.zs = {Cplx(1, 0)};
  cfg.mags = {16.0, 16.0, 16.0, 16.0};  // one geometric point, repeated
  cfg.transverse = {{0.05}};
  cfg.check_blocks = 1;
  cfg.eval.label_max = 4;
  cfg.eval.plus_cap = 140;
  cfg.eval.wall_max = 60;
  try {
    solve_L_fit(A.g, A.cp, A.cm, cfg);
    FAIL("expected an ill-conditioned fit");
  } catch (const Error& e) {
    CHECK(e.code() == Err::IllConditioned);
  }
}
