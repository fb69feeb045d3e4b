// Scalar numeric layer: Lanczos gamma against closed forms and the
// reflection identity, polygammas, the nilpotent Gamma expansion against
// finite differences and the shift identity, the E1 continued fraction
// against frozen references, adaptive quadrature, and the Watson-lemma
// demonstration with its optimal-truncation floor.
#include <catch2/catch_amalgamated.hpp>

#include "wallx/numerics.hpp"

using namespace wallx;
using Catch::Approx;

TEST_CASE("complex gamma") {
  CHECK(gamma_c(Cplx(5)).real() == Approx(24.0).epsilon(1e-12));
  CHECK(gamma_c(Cplx(0.5)).real() == Approx(std::sqrt(M_PI)).epsilon(1e-12));
  CHECK(gamma_c(Cplx(7.5)).real() ==
        Approx(1871.2543057977881).epsilon(1e-12));
  CHECK(std::norm(gamma_c(Cplx(1, 1))) ==
        Approx(M_PI / std::sinh(M_PI)).epsilon(1e-12));
  SECTION("reflection") {
    for (Cplx z : {Cplx(0.3, 1.7), Cplx(-1.2, 0.4), Cplx(0.1, -0.9)}) {
      Cplx resid = gamma_c(z) * gamma_c(1.0 - z) - M_PI / std::sin(M_PI * z);
      CHECK(std::abs(resid) < 1e-12);
    }
  }
  SECTION("shift") {
    Cplx z(0.8, 2.3);
    CHECK(std::abs(gamma_c(z + 1.0) - z * gamma_c(z)) <
          1e-12 * std::abs(gamma_c(z + 1.0)));
  }
}

TEST_CASE("polygammas") {
  const double euler = 0.57721566490153286;
  CHECK(digamma(Cplx(1)).real() == Approx(-euler).margin(5e-11));
  CHECK(digamma(Cplx(0.5)).real() ==
        Approx(-euler - 2 * std::log(2.0)).margin(5e-11));
  CHECK(trigamma(Cplx(1)).real() == Approx(M_PI * M_PI / 6).margin(5e-11));
  CHECK(psi2(Cplx(1)).real() == Approx(-2.4041138063191886).margin(5e-10));
  SECTION("recurrence at a complex point") {
    Cplx z(0.7, 0.3);
    CHECK(std::abs(digamma(z + 1.0) - digamma(z) - 1.0 / z) < 1e-11);
    CHECK(std::abs(trigamma(z + 1.0) - trigamma(z) + 1.0 / (z * z)) < 1e-11);
    CHECK(std::abs(psi2(z + 1.0) - psi2(z) - 2.0 / (z * z * z)) < 1e-10);
  }
}

TEST_CASE("nilpotent gamma expansion") {
  Cplx a(1.75, 0.4);
  auto k = gamma_nilpotent_series(a);
  SECTION("against finite differences") {
    double h = 1e-3;
    Cplx d1 = (gamma_c(a + h) - gamma_c(a - h)) / (2 * h);
    Cplx d2 = (gamma_c(a + h) - 2.0 * gamma_c(a) + gamma_c(a - h)) / (h * h);
    Cplx d3 = (gamma_c(a + 2 * h) - 2.0 * gamma_c(a + h) +
               2.0 * gamma_c(a - h) - gamma_c(a - 2 * h)) /
              (2 * h * h * h);
    CHECK(std::abs(k[0] - gamma_c(a)) < 1e-12);
    CHECK(std::abs(k[1] - d1) < 1e-5);
    CHECK(std::abs(k[2] - d2 / 2.0) < 1e-5);
    CHECK(std::abs(k[3] - d3 / 6.0) < 1e-4);
  }
  SECTION("reciprocal expansion convolves to one") {
    auto r = gamma_nilpotent_series(a, -1);
    CHECK(std::abs(k[0] * r[0] - 1.0) < 1e-13);
    CHECK(std::abs(k[0] * r[1] + k[1] * r[0]) < 1e-13);
    CHECK(std::abs(k[0] * r[2] + k[1] * r[1] + k[2] * r[0]) < 1e-13);
    CHECK(std::abs(k[0] * r[3] + k[1] * r[2] + k[2] * r[1] + k[3] * r[0]) <
          1e-13);
  }
  SECTION("shift identity Gamma(a+1+eps) = (a+eps) Gamma(a+eps)") {
    auto k1 = gamma_nilpotent_series(a + 1.0);
    CHECK(std::abs(k1[0] - a * k[0]) < 1e-10);
    for (int j = 1; j < 4; ++j)
      CHECK(std::abs(k1[j] - (a * k[j] + k[j - 1])) < 1e-10);
  }
}

TEST_CASE("exponential integral") {
  // references computed independently at 30 digits
  CHECK(expint_e1(Cplx(1)).real() ==
        Approx(0.219383934395520274).epsilon(1e-13));
  CHECK(expint_e1(Cplx(10)).real() ==
        Approx(4.15696892968532427740285981028e-6).epsilon(1e-13));
  CHECK(expint_e1(Cplx(20)).real() ==
        Approx(9.8355252906498816903969871089e-11).epsilon(1e-13));
  CHECK(expint_e1(Cplx(40)).real() ==
        Approx(1.03677326145165697215064188915e-19).epsilon(1e-13));
  SECTION("derivative identity d/du E1 = -e^-u / u") {
    double u = 3.0, h = 1e-4;
    double fd =
        (expint_e1(Cplx(u + h)).real() - expint_e1(Cplx(u - h)).real()) /
        (2 * h);
    CHECK(fd == Approx(-std::exp(-u) / u).epsilon(1e-6));
  }
}

TEST_CASE("adaptive quadrature") {
  SECTION("finite interval") {
    QuadResult q = integrate_adaptive(
        [](double t) { return Cplx(std::sin(3 * t)); }, 0, 2, 1e-12);
    CHECK(q.value.real() == Approx((1 - std::cos(6.0)) / 3).margin(1e-12));
    CHECK(q.err < 1e-10);
  }
  SECTION("exponential ray") {
    QuadResult q = integrate_exp_ray(
        [](double t) { return Cplx(std::cos(t)); }, 2.0, 1e-12);
    CHECK(q.value.real() == Approx(0.4).margin(1e-10));  // Re 1/(2 - i)
  }
  SECTION("budget exhaustion is flagged") {
    try {
      integrate_adaptive([](double t) { return Cplx(std::sin(200 / (t + 1e-3))); },
                         0, 1, 1e-14, 200);
      FAIL("expected failure");
    } catch (const Error& e) {
      CHECK(e.code() == Err::QuadratureFailure);
    }
  }
}

TEST_CASE("Watson demonstration") {
  SECTION("u = 10: the optimal-truncation floor sits near 2e-4") {
    WatsonReport w = watson_validate(10);
    CHECK(w.truth == Approx(0.91563333939788127).epsilon(1e-14));
    CHECK(w.quad_vs_truth < 1e-9);
    CHECK(w.n_star == 10);
    CHECK(w.best_err == Approx(1.9333000477840783e-4).epsilon(1e-9));
    // no truncation does better than the superasymptotic scale allows
    CHECK(w.best_err > 1e-6);
    CHECK(w.best_err > w.gauss_scale / 3);
    CHECK(w.best_err < w.gauss_scale * 3);
    CHECK(w.dip_then_rise);
    CHECK(w.err[5] > w.err[10]);  // still improving on the way in
  }
  SECTION("u = 20: floor near 1.2e-8") {
    WatsonReport w = watson_validate(20);
    CHECK(w.quad_vs_truth < 1e-9);
    CHECK(w.n_star == 20);
    CHECK(w.best_err == Approx(1.2005605566062672e-8).epsilon(1e-6));
    CHECK(w.best_err < 1e-6);
    CHECK(w.best_err > w.gauss_scale / 3);
    CHECK(w.best_err < w.gauss_scale * 3);
    CHECK(w.dip_then_rise);
  }
  SECTION("u = 40: floor below double resolution") {
    WatsonReport w = watson_validate(40);
    CHECK(w.quad_vs_truth < 1e-9);
    CHECK(w.best_err < 3e-15);  // theory: ~1.1e-16, unresolvable in doubles
    CHECK(w.best_err < 1e-6);
    CHECK(w.dip_then_rise);
  }
}

TEST_CASE("ray rotation leaves the decay integral unchanged") {
  // int_0^inf e^{-ut}/(1+t) dt = e^u E1(u) is unchanged when the contour is
  // rotated to t = s e^{i phi} (the pole at t = -1 stays on the far side for
  // |phi| < pi/2), so the quadrature value must be path independent.
  double u = 20.0;
  Cplx ref = std::exp(u) * expint_e1(Cplx(u, 0.0));
  QuadResult base = integrate_exp_ray(
      [](double t) { return Cplx(1.0) / (1.0 + t); }, u, 1e-12);
  CHECK(std::abs(base.value - ref) <= 1e-10 * std::abs(ref));
  for (double phi : {0.3, -0.3, 0.6}) {
    Cplx dir = std::exp(Cplx(0.0, phi));
    double T = 42.0 / (u * std::cos(phi));
    QuadResult rot = integrate_adaptive(
        [&](double s) {
          Cplx t = s * dir;
          return std::exp(-u * t) / (Cplx(1.0) + t) * dir;
        },
        0.0, T, 1e-13);
    CHECK(std::abs(rot.value - ref) <= 1e-10 * std::abs(ref));
  }
}
