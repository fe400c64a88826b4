#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "kolmo/rational.hpp"

namespace kolmo {

/// e·t∞ when only the quadratic-set condition constrains t0 (r = 1/2, n = 3):
/// (1+λ-λ/μ)·λ²(1-μ)²/(2μ) · (μ-λ)/(1-λ). Requires 0 < λ < μ < 1.
double F_basic(double lambda, double mu);

/// Root in (0,1) of r/(1-r)² = ν, for ν > 0.
double solve_r(double nu);

/// The r that makes both certificate conditions bind at once:
/// solve_r(2ρλ²μ(1-μ)) with ρ = 1+λ-λ/μ.
double equalized_r(double lambda, double mu);

/// e·t∞ at n = 3, β = 1 with r = equalized_r: r(1-μ)/μ² · (μ-λ)/(1-λ).
double F_equalized(double lambda, double mu);

/// Certified limit radius for f = z²/2 + βz^n with equalized r:
/// (r(1-μ)/(eβμ^{n-1}))^{1/(n-2)} · (μ-λ)/(1-λ).
double t_inf_equalized(unsigned n, double lambda, double mu, double beta = 1.0);

/// Convergence radius of the exact normalizing coordinate change:
/// (1/(nβ))^{1/(n-2)} √(1 - 2/n).
double true_radius(unsigned n, double beta);

/// true_radius / certified t∞; independent of β.
double q_value(unsigned n, double lambda, double mu);

enum class Objective { basic, equalized };

struct OptResult {
  double lambda;
  double mu;
  std::optional<double> r;  ///< set for the equalized objective
  double value;             ///< e·t∞ (the objective itself)
  double t_inf;             ///< value/e for basic; t∞ at β = 1 for equalized
  std::size_t iterations;   ///< simplex iterations plus Newton steps
  double grad_norm;         ///< |∇ objective| at the returned point
};

/// Deterministic maximization over 0 < λ < μ < 1: a 200×200 grid, then a
/// Nelder-Mead simplex, then Newton steps with an exact Hessian.
OptResult maximize_basic();
/// For n = 3 this maximizes F_equalized; for larger n, t_inf_equalized(n, ·).
OptResult maximize_equalized(unsigned n = 3);

/// Same refinement from a caller-chosen start (no grid).
OptResult maximize_from(Objective objective, unsigned n, double lambda0, double mu0);

struct QRow {
  unsigned n;
  double lambda;
  double mu;
  double Q;
  double true_radius;
  double t_inf;  ///< certified t∞ at β = 1
};

/// Per-n optimum of q_value; rows are computed concurrently and returned in
/// the order of ns.
std::vector<QRow> q_table(const std::vector<unsigned>& ns);

struct GridPoint {
  double lambda;
  double mu;
  std::optional<double> value;  ///< empty outside 0 < λ < μ < 1
};

/// resolution² points λ, μ ∈ {1, …, resolution}/(resolution + 1).
std::vector<GridPoint> plot_grid(Objective objective, unsigned resolution);

/// Radius of convergence of ψ = inverse of z√(1 + 2βz^{n-2}), estimated from
/// `terms` exact coefficients by fitting -log|a_m| = A·m + B·log m + D over
/// the upper half of the nonzero coefficients; the radius is e^A.
double radius_oracle_series(unsigned n, const Rational& beta, std::size_t terms);

}  // namespace kolmo
