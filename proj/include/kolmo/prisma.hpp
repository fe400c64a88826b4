#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kolmo/error.hpp"
#include "kolmo/rational.hpp"

namespace kolmo {

/// A point (t, s, x) of the prisma t > s > 0, optionally carrying the
/// accumulated sum α of the parametric variant.
template <class T>
struct PrismaState {
  T t;
  T s;
  T x;
  std::optional<T> alpha;
};

/// Constants of the quadratic map (t,s,x) ↦ (s, s-λ(t-s), x^d/(R s^k (t-s)^l)).
/// With T = Rational, k and l must be integers so every image stays exact.
template <class T>
struct IterConfig {
  T R;
  T k;
  T l;
  T lambda;
  int d = 2;
};

namespace prisma_detail {

inline Rational power(const Rational& base, const Rational& e) {
  if (!is_integer(e) || !e.get_num().fits_slong_p())
    throw Error(Errc::domain, "exact prisma arithmetic needs integer exponents, got " +
                                  to_fraction_string(e));
  return pow_int(base, e.get_num().get_si());
}
inline double power(double base, double e) { return std::pow(base, e); }
inline Rational power(const Rational& base, long e) { return pow_int(base, e); }
inline double power(double base, long e) { return std::pow(base, static_cast<double>(e)); }

inline double as_double(const Rational& q) { return to_double(q); }
inline double as_double(double x) { return x; }

inline double log_of(const Rational& q) { return log_abs(q); }
inline double log_of(double x) { return std::log(std::fabs(x)); }

template <class T>
T magnitude(const T& x) {
  return x < 0 ? T(-x) : x;
}

}  // namespace prisma_detail

/// (t, s) ↦ (s, s - λ(t - s)); requires t > s > λt.
template <class T>
std::pair<T, T> base_step(const T& t, const T& s, const T& lambda) {
  if (!(s < t) || !(s > lambda * t))
    throw Error(Errc::leaves_domain, "base step needs t > s > lambda*t");
  return {s, T(s - lambda * (t - s))};
}

/// Limit of the base iteration: (s0 - λt0)/(1 - λ).
template <class T>
T t_infinity(const T& t0, const T& s0, const T& lambda) {
  if (!(s0 > lambda * t0))
    throw Error(Errc::nonpositive_limit, "base iteration limit needs s0 > lambda*t0");
  return T((s0 - lambda * t0) / (1 - lambda));
}

/// Growth factor s'/s = 1 + λ - λt/s of the inner radius.
template <class T>
T rho(const T& t, const T& s, const T& lambda) {
  return T(1 + lambda - lambda * t / s);
}

template <class T>
PrismaState<T> step(const PrismaState<T>& st, const IterConfig<T>& cfg) {
  using prisma_detail::power;
  if (!(st.s > 0) || !(st.s < st.t)) throw Error(Errc::leaves_domain, "state is outside the prisma");
  T gap = st.t - st.s;
  T x_next = power(st.x, static_cast<long>(cfg.d)) /
             (cfg.R * power(st.s, cfg.k) * power(gap, cfg.l));
  return {st.s, T(st.s - cfg.lambda * gap), x_next, st.alpha};
}

/// Parametric map: as step(), and α accumulates the current x.
template <class T>
PrismaState<T> param_step(const PrismaState<T>& st, const IterConfig<T>& cfg) {
  PrismaState<T> next = step(st, cfg);
  next.alpha = T(st.alpha.value_or(T(0)) + st.x);
  return next;
}

/// |x| < R ρ(t,s)^k s^k λ^l (t-s)^l together with t > s > λt.
template <class T>
bool in_invariant_set(const PrismaState<T>& st, const IterConfig<T>& cfg) {
  using prisma_detail::power;
  if (!(st.s > cfg.lambda * st.t) || !(st.s < st.t)) return false;
  T bound = cfg.R * power(rho(st.t, st.s, cfg.lambda), cfg.k) * power(st.s, cfg.k) *
            power(cfg.lambda, cfg.l) * power(T(st.t - st.s), cfg.l);
  return prisma_detail::magnitude(st.x) < bound;
}

template <class T>
std::vector<PrismaState<T>> trajectory(const PrismaState<T>& st0, const IterConfig<T>& cfg,
                                       std::size_t steps, bool parametric = false) {
  std::vector<PrismaState<T>> out{st0};
  if (parametric && !out[0].alpha) out[0].alpha = T(0);
  for (std::size_t i = 0; i < steps; ++i)
    out.push_back(parametric ? param_step(out.back(), cfg) : step(out.back(), cfg));
  return out;
}

/// Exact n-th iterate of x for d = 2, without iterating x:
///   x_n = (R s0^k λ^l (t0-s0)^l)^{1-2^n} λ^{ln} x0^{2^n} Π_{i=1}^{n-1} p_i^{-k 2^{n-1-i}},
/// where p_i = Π_{j<i} ρ(t_j, s_j) = s_i/s0. Only the base coordinates are
/// iterated. For T = double the product is evaluated through logarithms.
template <class T>
T closed_form_xn(std::size_t n, const PrismaState<T>& st0, const IterConfig<T>& cfg) {
  using prisma_detail::power;
  if (cfg.d != 2) throw Error(Errc::domain, "closed form is only available for d = 2");
  if (n == 0) return st0.x;
  if (n > 60) throw Error(Errc::domain, "closed form index too large");
  const long two_n = 1L << n;

  std::vector<T> p(n, T(1));
  T t = st0.t, s = st0.s;
  for (std::size_t i = 1; i < n; ++i) {
    p[i] = p[i - 1] * rho(t, s, cfg.lambda);
    std::tie(t, s) = base_step(t, s, cfg.lambda);
  }
  T K = cfg.R * power(st0.s, cfg.k) * power(cfg.lambda, cfg.l) * power(T(st0.t - st0.s), cfg.l);

  if constexpr (std::is_same_v<T, double>) {
    if (st0.x == 0.0) return 0.0;
    double log_x = (1.0 - static_cast<double>(two_n)) * std::log(K) +
                   cfg.l * static_cast<double>(n) * std::log(cfg.lambda) +
                   static_cast<double>(two_n) * std::log(std::fabs(st0.x));
    for (std::size_t i = 1; i < n; ++i)
      log_x -= cfg.k * std::ldexp(std::log(p[i]), static_cast<int>(n - 1 - i));
    return std::exp(log_x);
  } else {
    T x = power(K, 1 - two_n) * power(power(cfg.lambda, cfg.l), static_cast<long>(n)) *
          power(st0.x, two_n);
    for (std::size_t i = 1; i < n; ++i)
      x /= power(power(p[i], cfg.k), 1L << (n - 1 - i));
    return x;
  }
}

/// Upper bound x_n <= K0^{1-2^n} ρ0^{kn} λ^{ln} x0^{2^n} with
/// K0 = R ρ0^k s0^k λ^l (t0-s0)^l, valid on the invariant set. Returned as a
/// natural logarithm since it underflows quickly.
template <class T>
double log_xn_upper_bound(std::size_t n, const PrismaState<T>& st0, const IterConfig<T>& cfg) {
  using prisma_detail::as_double;
  using prisma_detail::log_of;
  double lam = as_double(cfg.lambda), k = as_double(cfg.k), l = as_double(cfg.l);
  double rho0 = as_double(rho(st0.t, st0.s, cfg.lambda));
  double logK0 = std::log(as_double(cfg.R)) + k * std::log(rho0) + k * log_of(st0.s) +
                 l * std::log(lam) + l * log_of(T(st0.t - st0.s));
  double two_n = std::ldexp(1.0, static_cast<int>(n));
  return (1.0 - two_n) * logK0 + k * n * std::log(rho0) + l * n * std::log(lam) +
         two_n * log_of(st0.x);
}

/// Σ_{n>=0} of the upper bounds above: the side condition that keeps the
/// accumulated α of the parametric map below r. Terms are summed until they
/// fall below 1e-300 relative to the sum.
template <class T>
double parametric_sum_bound(const PrismaState<T>& st0, const IterConfig<T>& cfg) {
  if (prisma_detail::as_double(st0.x) == 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t n = 0; n < 60; ++n) {
    double term = std::exp(log_xn_upper_bound(n, st0, cfg));
    if (!std::isfinite(term)) return term;
    sum += term;
    if (n > 0 && term <= 1e-300 * sum) break;
  }
  return sum;
}

/// Invariant-set membership plus the summability side condition for α.
template <class T>
bool in_parametric_set(const PrismaState<T>& st, const IterConfig<T>& cfg, double r) {
  if (!in_invariant_set(st, cfg)) return false;
  double alpha = prisma_detail::as_double(st.alpha.value_or(T(0)));
  return alpha + parametric_sum_bound(st, cfg) <= r;
}

struct RapidConvergence {
  bool holds;
  double C;
  double rho;
};

/// Searches witnesses 0 < C < 1 and ρ in [1.25, 4] with |x_n| <= C^{ρ^n}
/// for every n. With four or more nonzero entries ρ comes from the least
/// squares fit log|x_n| ≈ Aρ^n + B + Dn, which sees the doubling of a
/// quadratic recursion through its polynomial prefactors; the check fails
/// unless A < 0 carries at least 1% of the decay. Shorter inputs use the slope
/// of log(-log|x_n|). When the chosen ρ leaves C >= 1 it is lowered by
/// bisection. Zero entries impose nothing.
RapidConvergence rapid_convergence_check(const std::vector<double>& xs);
/// Same, from natural logarithms of |x_n| (use -inf for zeros), for
/// sequences that underflow doubles.
RapidConvergence rapid_convergence_check_log(const std::vector<double>& log_abs_xs);

}  // namespace kolmo
