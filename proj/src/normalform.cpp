#include "kolmo/normalform.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "kolmo/disc_norms.hpp"
#include "kolmo/error.hpp"
#include "kolmo/prisma.hpp"

namespace kolmo {

std::size_t default_truncation(std::size_t steps) {
  if (steps > 24) throw Error(Errc::domain, "too many steps for a default truncation");
  return (std::size_t{1} << (steps + 1)) + 4;
}

MorseInstance morse_instance(const Rational& beta, std::size_t n, std::size_t trunc) {
  if (n < 3) throw Error(Errc::domain, "perturbation exponent must be at least 3");
  return {TruncSeries::monomial(Rational(1, 2), 2, trunc), TruncSeries::monomial(beta, n, trunc)};
}

LieTrace lie_iterate_formal(const TruncSeries& a, const TruncSeries& b0, std::size_t steps) {
  if (!(a == TruncSeries::monomial(Rational(1, 2), 2, a.trunc_order())) || a.trunc_order() < 2)
    throw Error(Errc::domain, "normal form must be z^2/2, got " + a.to_string());
  if (b0.order() < 3)
    throw Error(Errc::domain, "perturbation must vanish to order 3, got " + b0.to_string());

  std::size_t N = std::min(a.trunc_order(), b0.trunc_order());
  TruncSeries a_n = a.truncated(N);
  TruncSeries f = add(a_n, b0);
  TruncSeries z = TruncSeries::identity(N);

  LieTrace trace{a_n, {}, f};
  for (std::size_t round = 0; round < steps; ++round) {
    TruncSeries b = sub(f, a_n);
    Derivation v = j_map(b);
    TruncSeries sigma = lie_exp(v, z, -1);
    TruncSeries next = lie_exp(v, f, -1);
    trace.rounds.push_back({std::move(b), std::move(v), f, std::move(sigma)});
    f = std::move(next);
  }
  trace.final_f = f;
  return trace;
}

TruncSeries normalizer_series(const LieTrace& trace) {
  TruncSeries psi = TruncSeries::identity(trace.final_f.trunc_order());
  for (const auto& round : trace.rounds) psi = compose(psi, round.substitution);
  return psi;
}

namespace {

void require_open_unit(double x, const char* name) {
  if (!(x > 0.0 && x < 1.0))
    throw Error(Errc::domain, std::string(name) + " must lie in (0, 1)");
}

struct ConditionSides {
  double rhs_i, rhs_ii, rho0;
};

ConditionSides condition_sides(double lambda, double mu, double r, int n) {
  double rho0 = 1.0 + lambda - lambda / mu;
  double rhs_i = r * (1.0 - mu) / std::pow(mu, n - 1);
  double rhs_ii = 2.0 * (1.0 - r) * (1.0 - r) * rho0 * lambda * lambda * (1.0 - mu) * (1.0 - mu) /
                  std::pow(mu, n - 2);
  return {rhs_i, rhs_ii, rho0};
}

void validate(double lambda, double mu, double r, double beta, int n) {
  require_open_unit(lambda, "lambda");
  require_open_unit(mu, "mu");
  require_open_unit(r, "r");
  if (!(beta >= 0.0)) throw Error(Errc::domain, "beta must be nonnegative");
  if (n < 3) throw Error(Errc::domain, "perturbation exponent n must be at least 3");
}

}  // namespace

Certificate certify(double t0, double lambda, double mu, double r, double beta, int n,
                    std::optional<double> R_override) {
  validate(lambda, mu, r, beta, n);
  if (!(t0 > 0.0)) throw Error(Errc::domain, "t0 must be positive");
  if (R_override && !(*R_override > 0.0)) throw Error(Errc::domain, "R must be positive");

  Certificate c{};
  c.t0 = t0;
  c.lambda = lambda;
  c.mu = mu;
  c.r = r;
  c.beta = beta;
  c.n = n;
  c.s0 = mu * t0;
  auto sides = condition_sides(lambda, mu, r, n);
  c.rho0 = sides.rho0;
  c.C = R_override ? 1.0 / *R_override : t0 * t0 / (2.0 * (1.0 - r) * (1.0 - r));
  c.R = R_override ? *R_override : 1.0 / c.C;
  c.t_inf = (mu - lambda) / (1.0 - lambda) * t0;

  double lhs = std::numbers::e * beta * std::pow(t0, n - 2);
  c.i = {lhs <= sides.rhs_i, lhs, sides.rhs_i, sides.rhs_i - lhs};
  c.ii = {lhs < sides.rhs_ii, lhs, sides.rhs_ii, sides.rhs_ii - lhs};
  c.iii = {lambda < mu, lambda, mu, mu - lambda};
  return c;
}

double threshold_T0(double lambda, double mu, double r, double beta, int n) {
  validate(lambda, mu, r, beta, n);
  if (!(beta > 0.0)) throw Error(Errc::domain, "threshold needs beta > 0");
  auto sides = condition_sides(lambda, mu, r, n);
  double rhs = std::min(sides.rhs_i, sides.rhs_ii);
  if (!(rhs > 0.0)) throw Error(Errc::domain, "no admissible t0: condition ii has rhs <= 0");
  return std::pow(rhs / (std::numbers::e * beta), 1.0 / (n - 2));
}

std::vector<CertifiedStep> lie_iterate_certified(const Certificate& cert, std::size_t steps) {
  IterConfig<double> cfg{cert.R, 1.0, 2.0, cert.lambda, 2};
  PrismaState<double> st{cert.t0, cert.s0,
                         std::numbers::e * cert.beta * std::pow(cert.s0, cert.n - 1) * kUpwardSlack,
                         std::nullopt};
  std::vector<CertifiedStep> out;
  for (std::size_t m = 0;; ++m) {
    bool in_tetrahedron = st.x <= cert.r * (st.t - st.s);
    if (!in_tetrahedron || !in_invariant_set(st, cfg))
      throw Error(Errc::certificate_breach,
                  "bound leaves the invariant region at step " + std::to_string(m) +
                      (in_tetrahedron ? " (quadratic set)" : " (x <= r(t-s))"));
    out.push_back({m, st.t, st.s, st.x});
    if (m == steps) break;
    st = step(st, cfg);
    st.x *= kUpwardSlack;
  }
  return out;
}

double compose_exponentials_bound(const std::vector<double>& nus) {
  double sigma = 0.0;
  for (double nu : nus) {
    if (!(nu >= 0.0 && nu < 1.0)) throw Error(Errc::domain, "each ratio must lie in [0, 1)");
    sigma += nu;
  }
  if (sigma >= 1.0)
    throw Error(Errc::divergence, "ratios sum to " + std::to_string(sigma) + " >= 1");
  return 1.0 / (1.0 - sigma) * kUpwardSlack;
}

}  // namespace kolmo
