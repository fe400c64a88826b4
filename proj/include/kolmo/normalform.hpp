#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "kolmo/power_series.hpp"

namespace kolmo {

/// One round of the Lie iteration f_{n+1} = e^{-v_n} f_n with v_n = j(f_n - a).
struct LieRound {
  TruncSeries b;             ///< remainder b_n = f_n - a
  Derivation v;              ///< v_n = j(b_n)
  TruncSeries f;             ///< f_n
  TruncSeries substitution;  ///< σ_n = e^{-v_n}(z), so that f_{n+1} = f_n∘σ_n
};

struct LieTrace {
  TruncSeries a;
  std::vector<LieRound> rounds;
  TruncSeries final_f;  ///< f_steps

  TruncSeries final_remainder() const { return sub(final_f, a); }
  Derivation final_derivation() const { return j_map(final_remainder()); }
};

/// Coefficients needed so that `steps` rounds of the quadratic iteration keep
/// every coefficient that is still moving: 2^{steps+1} + 4.
std::size_t default_truncation(std::size_t steps);

/// a = z²/2 and b0 = β z^n, both known modulo z^{trunc+1}.
struct MorseInstance {
  TruncSeries a;
  TruncSeries b0;
};
MorseInstance morse_instance(const Rational& beta, std::size_t n, std::size_t trunc);

/// Runs `steps` rounds exactly. The normal form must be a = z²/2 (j is a right
/// inverse of v ↦ v(a) only there) and b0 must vanish to order 3.
LieTrace lie_iterate_formal(const TruncSeries& a, const TruncSeries& b0, std::size_t steps);

/// ψ = σ_0∘σ_1∘…∘σ_{steps-1}, the coordinate change with f_0∘ψ = f_steps.
TruncSeries normalizer_series(const LieTrace& trace);

/// Inequality lhs <= rhs (or < for strict conditions) with its margin rhs - lhs.
struct Condition {
  bool holds;
  double lhs;
  double rhs;
  double margin;
};

/// Convergence certificate for f = z²/2 + βz^n on the disc of radius t0,
/// with base pairs (t, s) contracting at ratio λ from s0 = μ t0.
struct Certificate {
  double t0, lambda, mu, r, beta;
  int n;
  double s0;
  double rho0;   ///< 1 + λ - λ/μ
  double C;      ///< t0²/(2(1-r)²) unless R was overridden
  double R;      ///< 1/C
  double t_inf;  ///< (μ - λ)/(1 - λ) · t0
  Condition i;   ///< eβ t0^{n-2} <= r(1-μ)/μ^{n-1}
  Condition ii;  ///< eβ t0^{n-2} < 2(1-r)²ρ0 λ²(1-μ)²/μ^{n-2}
  Condition iii; ///< λ < μ

  bool passes() const { return i.holds && ii.holds && iii.holds; }
};

/// Evaluates the three conditions. Parameters must satisfy λ, μ, r in (0,1),
/// t0 > 0, β >= 0 and n >= 3; λ >= μ is reported through condition iii.
Certificate certify(double t0, double lambda, double mu, double r, double beta, int n,
                    std::optional<double> R_override = std::nullopt);

/// Largest t0 passing conditions i and ii: (min(rhs_i, rhs_ii)/(eβ))^{1/(n-2)}.
double threshold_T0(double lambda, double mu, double r, double beta, int n);

struct CertifiedStep {
  std::size_t n;
  double t;
  double s;
  double bound;  ///< certified upper bound for the n-th remainder on the disc of radius t
};

/// Bound chain of the certified iteration: x0 = eβ s0^{n-1} and
/// x_{m+1} = x_m²/(R s_m (t_m - s_m)²) along the base pairs. Every point must
/// lie in both x <= r(t - s) and the invariant set with (k, l) = (1, 2);
/// otherwise a certificate_breach error names the step.
std::vector<CertifiedStep> lie_iterate_certified(const Certificate& cert, std::size_t steps);

/// 1/(1 - Σν_i), the norm bound of an infinite composition of exponentials.
double compose_exponentials_bound(const std::vector<double>& nus);

}  // namespace kolmo
