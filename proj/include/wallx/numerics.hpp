#pragma once
// Scalar numeric layer: complex log-gamma (Lanczos), polygammas, the
// exponential integral by continued fraction, adaptive Gauss-Kronrod
// quadrature on exponential rays, the nilpotent Gamma expansion, and the
// Watson-lemma demonstration on u e^u E1(u).

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "wallx/common.hpp"

namespace wallx {

using Cplx = std::complex<double>;

// Lanczos approximation, g = 7, nine coefficients; reflection below
// Re z = 1/2. Accurate to ~1e-13 relative over the range used here.
inline Cplx log_gamma(Cplx z) {
  static const double g = 7.0;
  static const std::array<double, 9> c = {
      0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
      771.32342877765313,       -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};
  if (z.real() < 0.5) {
    // log Gamma(z) = log(pi / sin(pi z)) - log Gamma(1 - z)
    return std::log(M_PI / std::sin(M_PI * z)) - log_gamma(1.0 - z);
  }
  z -= 1.0;
  Cplx x = c[0];
  for (size_t i = 1; i < c.size(); ++i) x += c[i] / (z + double(i));
  Cplx t = z + g + 0.5;
  return (z + 0.5) * std::log(t) - t + 0.5 * std::log(2.0 * M_PI) +
         std::log(x);
}

inline Cplx gamma_c(Cplx z) { return std::exp(log_gamma(z)); }

// Polygammas by recurrence into the asymptotic region. Arguments stay right
// of the imaginary axis in all uses (bases are 1 + positive rationals).
inline Cplx digamma(Cplx z) {
  require(z.real() > -0.5 || std::abs(z.imag()) > 0.5, Err::ConfigError,
          "polygamma argument too far left");
  Cplx acc = 0;
  while (z.real() < 8.0) {
    acc -= 1.0 / z;
    z += 1.0;
  }
  Cplx r = 1.0 / z, r2 = r * r;
  return acc + std::log(z) - 0.5 * r -
         r2 * (1.0 / 12 - r2 * (1.0 / 120 - r2 * (1.0 / 252 - r2 / 240.0)));
}

inline Cplx trigamma(Cplx z) {
  require(z.real() > -0.5 || std::abs(z.imag()) > 0.5, Err::ConfigError,
          "polygamma argument too far left");
  Cplx acc = 0;
  while (z.real() < 8.0) {
    acc += 1.0 / (z * z);
    z += 1.0;
  }
  Cplx r = 1.0 / z, r2 = r * r;
  return acc + r + 0.5 * r2 +
         r * r2 * (1.0 / 6 - r2 * (1.0 / 30 - r2 * (1.0 / 42 - r2 / 30.0)));
}

inline Cplx psi2(Cplx z) {
  require(z.real() > -0.5 || std::abs(z.imag()) > 0.5, Err::ConfigError,
          "polygamma argument too far left");
  Cplx acc = 0;
  while (z.real() < 8.0) {
    acc -= 2.0 / (z * z * z);
    z += 1.0;
  }
  Cplx r = 1.0 / z, r2 = r * r;
  return acc - r2 - r * r2 -
         r2 * r2 * (0.5 - r2 * (1.0 / 6 - r2 * (1.0 / 6 - 0.3 * r2)));
}

// Gamma(a + eps) = Gamma(a) (1 + k1 eps + k2 eps^2 + k3 eps^3 + ...) for a
// nilpotent eps with eps^4 = 0; sign = -1 gives the reciprocal expansion.
inline std::array<Cplx, 4> gamma_nilpotent_series(Cplx a, int sign = +1) {
  Cplx p = digamma(a), p1 = trigamma(a), p2 = psi2(a);
  if (sign < 0) {
    p = -p;
    p2 = -p2;
    p1 = -p1;
  }
  std::array<Cplx, 4> k;
  k[0] = 1.0;
  k[1] = p;
  k[2] = 0.5 * (p * p + p1);
  k[3] = (p * p * p + 3.0 * p * p1 + p2) / 6.0;
  Cplx g = sign > 0 ? gamma_c(a) : 1.0 / gamma_c(a);
  for (auto& x : k) x *= g;
  return k;
}

// E1(u) by the standard continued fraction (modified Lentz); valid away from
// the negative real axis, rapidly convergent for |u| >= 1.
inline Cplx expint_e1(Cplx u) {
  require(std::abs(u) > 1e-12, Err::ConfigError, "E1 argument too small");
  const double tiny = 1e-300;
  Cplx b = u + 1.0;
  Cplx c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 400; ++i) {
    Cplx a = -double(i) * double(i);
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    Cplx del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) return h * std::exp(-u);
  }
  fail(Err::NoConvergence, "continued fraction for E1 did not settle");
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod 7/15 quadrature.

namespace detail {
inline const std::array<double, 8> gk_x = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
inline const std::array<double, 8> gk_wk = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline const std::array<double, 4> gk_wg = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

inline void gk15(const std::function<Cplx(double)>& f, double a, double b,
                 Cplx& kron, double& err, size_t& evals) {
  double h = 0.5 * (b - a), m = 0.5 * (a + b);
  Cplx K = gk_wk[7] * f(m), G = gk_wg[3] * f(m);
  for (int i = 0; i < 7; ++i) {
    Cplx lo = f(m - h * gk_x[i]), hi = f(m + h * gk_x[i]);
    K += gk_wk[i] * (lo + hi);
    if (i % 2 == 1) G += gk_wg[i / 2] * (lo + hi);
  }
  evals += 15;
  kron = K * h;
  err = std::abs(K - G) * std::abs(h);
}
}  // namespace detail

struct QuadResult {
  Cplx value = 0;
  double err = 0;      // accumulated local error estimates plus tail bound
  size_t evals = 0;
};

inline QuadResult integrate_adaptive(const std::function<Cplx(double)>& f,
                                     double a, double b, double tol,
                                     size_t max_evals = 200000) {
  QuadResult out;
  struct Seg {
    double a, b;
  };
  std::vector<Seg> stack{{a, b}};
  while (!stack.empty()) {
    Seg s = stack.back();
    stack.pop_back();
    Cplx k;
    double e;
    detail::gk15(f, s.a, s.b, k, e, out.evals);
    require(out.evals < max_evals, Err::QuadratureFailure,
            "quadrature budget exhausted");
    if (e < tol * (s.b - s.a) / (b - a) || s.b - s.a < 1e-13 * (b - a)) {
      out.value += k;
      out.err += e;
    } else {
      double m = 0.5 * (s.a + s.b);
      stack.push_back({s.a, m});
      stack.push_back({m, s.b});
    }
  }
  return out;
}

// integral_0^inf e^{-ut} g(t) dt for |g| <= bound: truncate where the tail
// bound drops below the tolerance, then integrate adaptively.
inline QuadResult integrate_exp_ray(const std::function<Cplx(double)>& g,
                                    double u, double tol, double bound = 1.0) {
  require(u > 0, Err::ConfigError, "decay rate must be positive");
  double T = std::max(1.0, std::log(10.0 * bound / (tol * u)) / u);
  QuadResult out = integrate_adaptive(
      [&](double t) { return std::exp(-u * t) * g(t); }, 0.0, T, tol * 0.1);
  out.err += bound * std::exp(-u * T) / u;  // tail
  return out;
}

// ---------------------------------------------------------------------------
// Watson-lemma demonstration on F(u) = u e^u E1(u) = u L[1/(1+t)](u):
// the asymptotic series sum_n (-1)^n n! u^{-n} is divergent; its partial sums
// first improve, bottom out near N ~ u at the exponentially small floor
// ~ sqrt(2 pi u) e^{-u}, then blow up.

struct WatsonReport {
  double u = 0;
  double truth = 0;        // continued-fraction evaluation
  double quad = 0;         // adaptive-quadrature evaluation
  double quad_vs_truth = 0;
  std::vector<double> err; // err[N] = relative error of the first N terms
  size_t n_star = 0;       // best truncation (number of terms)
  double best_err = 0;
  double gauss_scale = 0;  // sqrt(2 pi u) e^{-u}
  bool dip_then_rise = false;
};

inline WatsonReport watson_validate(double u, size_t nmax = 0) {
  require(u >= 1.0, Err::ConfigError, "demonstration needs u >= 1");
  if (nmax == 0) nmax = static_cast<size_t>(2 * u) + 10;
  WatsonReport rep;
  rep.u = u;
  rep.truth = (u * std::exp(u) * expint_e1(Cplx(u))).real();
  QuadResult q = integrate_exp_ray([](double t) { return Cplx(1.0 / (1 + t)); },
                                   u, 1e-13);
  rep.quad = u * q.value.real();
  double scale = std::abs(rep.truth);
  rep.quad_vs_truth = std::abs(rep.quad - rep.truth) / scale;
  rep.gauss_scale = std::sqrt(2.0 * M_PI * u) * std::exp(-u);

  double sum = 0, term = 1;  // term_n = (-1)^n n! / u^n
  rep.err.push_back(std::abs(sum - rep.truth) / scale);
  for (size_t n = 0; n < nmax; ++n) {
    sum += term;
    term *= -double(n + 1) / u;
    rep.err.push_back(std::abs(sum - rep.truth) / scale);
  }
  rep.n_star = 0;
  for (size_t N = 1; N < rep.err.size(); ++N)
    if (rep.err[N] < rep.err[rep.n_star]) rep.n_star = N;
  rep.best_err = rep.err[rep.n_star];
  rep.dip_then_rise = rep.n_star > 0 && rep.n_star + 1 < rep.err.size() &&
                      rep.best_err < rep.err[1] &&
                      rep.err.back() > 100.0 * rep.best_err;
  return rep;
}

}  // namespace wallx
