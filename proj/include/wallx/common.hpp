#pragma once
// Shared foundations: exact rationals, error taxonomy, deterministic RNG,
// small vector helpers used by every module.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace wallx {

using Z = boost::multiprecision::cpp_int;
using Q = boost::multiprecision::cpp_rational;

using VecQ = std::vector<Q>;
using VecI = std::vector<long long>;

// ---------------------------------------------------------------------------
// Error taxonomy. Numeric-check *failures* are reported values, not errors;
// these are raised for structurally invalid inputs or broken internal
// invariants. CLI maps ConfigError -> exit 2, everything else -> exit 3.
// ---------------------------------------------------------------------------
enum class Err {
  LabelingError,        // omega_+ / omega_- on wrong sides of the wall
  CrepantWall,          // sum_j D_j . e == 0: discrepant setup required
  SpanFailure,          // ring/degree saturation or span detection failed
  NonIntegralPairing,   // twist pairing not integral on the key lattice
  PoleFlag,             // gamma-symbol ratio hit a pole / pure-nilpotent div
  GammaMismatch,        // produced gamma symbol does not cancel stored one
  TagMismatch,          // arithmetic across different sectors/sides
  WindowExceeded,       // operation needs keys beyond the truncation window
  NoConvergence,        // numeric series evaluation failed to settle
  QuadratureFailure,    // adaptive quadrature did not reach tolerance
  IllConditioned,       // sample geometry inadequate for the requested fit
  ConfigError,          // bad config / unusable request
  InternalError,
};

inline const char* err_name(Err e) {
  switch (e) {
    case Err::LabelingError: return "LabelingError";
    case Err::CrepantWall: return "CrepantWall";
    case Err::SpanFailure: return "SpanFailure";
    case Err::NonIntegralPairing: return "NonIntegralPairing";
    case Err::PoleFlag: return "PoleFlag";
    case Err::GammaMismatch: return "GammaMismatch";
    case Err::TagMismatch: return "TagMismatch";
    case Err::WindowExceeded: return "WindowExceeded";
    case Err::NoConvergence: return "NoConvergence";
    case Err::QuadratureFailure: return "QuadratureFailure";
    case Err::IllConditioned: return "IllConditioned";
    case Err::ConfigError: return "ConfigError";
    case Err::InternalError: return "InternalError";
  }
  return "InternalError";
}

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& msg)
      : std::runtime_error(std::string(err_name(code)) + ": " + msg),
        code_(code) {}
  Err code() const { return code_; }

 private:
  Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& msg) {
  throw Error(code, msg);
}

inline void require(bool ok, Err code, const std::string& msg) {
  if (!ok) fail(code, msg);
}

// ---------------------------------------------------------------------------
// Rational helpers.
// ---------------------------------------------------------------------------
inline Q parse_q(const std::string& s) {
  auto bad = [&] { fail(Err::ConfigError, "bad rational literal '" + s + "'"); };
  if (s.empty()) bad();
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Q(Z(s));
    Z num(s.substr(0, slash));
    Z den(s.substr(slash + 1));
    if (den == 0) bad();
    return Q(num, den);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    bad();
  }
  fail(Err::InternalError, "unreachable");
}

inline std::string q_str(const Q& q) {
  std::string s = numerator(q).str();
  if (denominator(q) != 1) s += "/" + denominator(q).str();
  return s;
}

inline bool q_is_int(const Q& q) { return denominator(q) == 1; }

inline long long q_int(const Q& q) {
  require(q_is_int(q), Err::InternalError, "expected integer, got " + q_str(q));
  return static_cast<long long>(numerator(q));
}

// Floor and fractional part <q> in [0,1).
inline Z q_floor(const Q& q) {
  Z n = numerator(q), d = denominator(q);
  Z f = n / d;
  if (n < 0 && f * d != n) --f;
  return f;
}
inline Q q_frac(const Q& q) { return q - Q(q_floor(q)); }

inline double q_dbl(const Q& q) { return q.convert_to<double>(); }

// ---------------------------------------------------------------------------
// Small vector utilities (exact).
// ---------------------------------------------------------------------------
inline Q dotq(const VecQ& a, const VecQ& b) {
  require(a.size() == b.size(), Err::InternalError, "dot size mismatch");
  Q s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline VecQ to_vecq(const VecI& v) {
  VecQ r(v.size());
  for (size_t i = 0; i < v.size(); ++i) r[i] = v[i];
  return r;
}

inline Q dotq(const VecQ& a, const VecI& b) { return dotq(a, to_vecq(b)); }

inline bool is_zero(const VecQ& v) {
  return std::all_of(v.begin(), v.end(), [](const Q& x) { return x == 0; });
}

// Scale a nonzero rational vector to a primitive integer vector (gcd 1),
// preserving direction.
inline VecI primitive(const VecQ& v) {
  require(!is_zero(v), Err::InternalError, "primitive of zero vector");
  Z l = 1;
  for (const Q& x : v) l = lcm(l, denominator(x));
  std::vector<Z> w;
  Z g = 0;
  for (const Q& x : v) {
    w.push_back(numerator(x) * (l / denominator(x)));
    g = gcd(g, w.back());
  }
  VecI r;
  for (const Z& x : w) r.push_back(static_cast<long long>(x / g));
  return r;
}

inline std::string vec_str(const VecI& v) {
  std::string s = "(";
  for (size_t i = 0; i < v.size(); ++i)
    s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

inline std::string vec_str(const VecQ& v) {
  std::string s = "(";
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + q_str(v[i]);
  return s + ")";
}

// ---------------------------------------------------------------------------
// Deterministic RNG. mt19937_64's output sequence is standard-mandated; we
// avoid std::uniform_int_distribution (implementation-defined) so that seeded
// draws are identical everywhere.
// ---------------------------------------------------------------------------
struct DetRng {
  std::mt19937_64 gen;
  explicit DetRng(uint64_t seed = 0x77a11c5eedULL) : gen(seed) {}
  uint64_t below(uint64_t n) {
    // Rejection sampling keeps the draw unbiased and deterministic.
    uint64_t lim = std::numeric_limits<uint64_t>::max() / n * n;
    uint64_t x;
    do { x = gen(); } while (x >= lim);
    return x % n;
  }
  long long range(long long lo, long long hi) {  // inclusive
    return lo + static_cast<long long>(below(static_cast<uint64_t>(hi - lo + 1)));
  }
};

// %.16e formatting: stable, locale-independent float text for reports.
inline std::string fmt_g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

// Work-stealing loop over [0, n); the first exception wins and is rethrown
// on the calling thread. threads <= 1 runs inline.
inline void parallel_for(size_t n, size_t threads,
                         const std::function<void(size_t)>& f) {
  if (threads <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  auto worker = [&] {
    for (size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!first) first = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace wallx
