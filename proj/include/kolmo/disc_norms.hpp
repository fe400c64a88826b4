#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "kolmo/power_series.hpp"

namespace kolmo {

/// Factor applied to floating-point quantities reported as upper bounds.
inline constexpr double kUpwardSlack = 1.0 + 0x1p-40;

/// lhs <= rhs, accepting a relative excess of 2^-38 so that inequalities
/// which are equalities in exact arithmetic survive rounding.
bool leq_within_slack(double lhs, double rhs) noexcept;

struct MajorantValue {
  double value;
  double radius;
};

/// Σ|a_n| t^n over the stored coefficients, rounded upward.
MajorantValue majorant_norm(const TruncSeries& f, double t);

/// |f^(k)|_s <= k!/(t-s)^k · |f|_t, both sides as majorant norms.
bool nagumo_check(const TruncSeries& f, unsigned k, double t, double s);

/// sup_{0<s<=t} s^{-k}|f|_s. When the leading order m of f is at least k,
/// every term s^{n-k}|a_n| grows with s and the sup is attained at s = t;
/// when m < k the quantity is unbounded near 0.
double order_filtration_norm(const TruncSeries& f, double k, double t);

/// |u_{st}| <= C / (s^k (t-s)^l).
struct LocalOpBound {
  double C;
  double k;
  double l;
};

/// Bound for u∘v given bounds for u (outer) and v (inner). The split point of
/// the intermediate radius is optimized, which yields l^l/(l1^l1 l2^l2).
LocalOpBound compose_local_bounds(const LocalOpBound& outer, const LocalOpBound& inner);

/// (e/l)^l · C, with the l = 0 factor read as 1.
double calibrate(const LocalOpBound& b);

/// n-fold self-composition, n >= 1.
LocalOpBound power_bound(const LocalOpBound& b, unsigned n);

/// d/dz, from the Cauchy-Nagumo inequality with k = 1.
inline LocalOpBound derivative_bound() { return {1.0, 0.0, 1.0}; }
/// f ↦ (f - f(0))/z: |.|_s <= |f|_s / s.
inline LocalOpBound division_by_z_bound() { return {1.0, 1.0, 0.0}; }
/// Point evaluation from the Hilbert-weighted space on the n-polydisc into
/// bounded functions: constant 1/√(π^n), pole order n along the diagonal.
LocalOpBound hilbert_evaluation_bound(unsigned dim);

/// A series with nonnegative coefficients used as a majorant in the Borel
/// estimate |Bf(u)| <= |f|(‖u‖/(t-s)). The rational shapes have closed forms
/// valid for 0 <= x < 1; polynomials are evaluated directly.
class BorelMajorant {
 public:
  enum class Shape { geometric, linear_rational, quadratic_rational, polynomial };

  /// 1/(1-x): the exponential.
  static BorelMajorant geometric() { return BorelMajorant(Shape::geometric); }
  /// x/(1-x): majorant of z/(1+z) and of the exponential minus 1.
  static BorelMajorant linear_rational() { return BorelMajorant(Shape::linear_rational); }
  /// x²/(1-x)²: majorant of z²/(1+z)².
  static BorelMajorant quadratic_rational() { return BorelMajorant(Shape::quadratic_rational); }
  /// Coefficients must be nonnegative.
  static BorelMajorant polynomial(TruncSeries coeffs);

  Shape shape() const noexcept { return shape_; }

 private:
  explicit BorelMajorant(Shape s) : shape_(s) {}

  Shape shape_;
  std::optional<TruncSeries> poly_;

  friend double borel_bound(const BorelMajorant&, double);
};

double borel_bound(const BorelMajorant& f, double x);
/// Shorthand for a polynomial majorant.
double borel_bound(const TruncSeries& fmaj, double x);

/// Weights λ_i(s) = c_i s^{e_i} with c_i > 0 and e_i >= 0, so each is
/// nondecreasing in s.
class WeightSequence {
 public:
  enum class Kind { geometric, hilbert, tabulated };

  /// λ_i(s) = c0·ratio^i·s^{e0 + step·i}.
  static WeightSequence geometric(double c0, double ratio, double e0, double step);
  /// λ_i(s) = s^i.
  static WeightSequence powers() { return geometric(1.0, 1.0, 0.0, 1.0); }
  /// One-variable Hilbert weights √(π/(i+1)) s^{i+1}.
  static WeightSequence hilbert();
  /// Finitely many (c_i, e_i) pairs; indices past the end are absent.
  static WeightSequence tabulated(std::vector<std::pair<double, double>> coeff_exponent);

  Kind kind() const noexcept { return kind_; }
  /// Number of stored weights for tabulated sequences.
  std::optional<std::size_t> length() const;

  double coefficient(std::size_t i) const;
  double exponent(std::size_t i) const;
  double operator()(std::size_t i, double s) const;

  /// For i >= K: c_{i+1}/c_i lies in [ratio_lo, ratio_hi] and
  /// e_{i+1} - e_i == exponent_step. Not available for tabulated weights.
  struct Tail {
    double ratio_lo;
    double ratio_hi;
    double exponent_step;
  };
  Tail tail_from(std::size_t K) const;

 private:
  WeightSequence() = default;

  Kind kind_ = Kind::geometric;
  double c0_ = 1, ratio_ = 1, e0_ = 0, step_ = 1;
  std::vector<std::pair<double, double>> table_;
};

struct LambdaPReport {
  bool holds;
  /// Set when a tabulated sequence limited the sum to this many indices.
  std::optional<std::size_t> truncated_at;
  /// max over the grid of Σ / (C/(t-s)^α); +inf when some sum diverges.
  double worst_ratio;
};

/// Checks Σ_i (μ_i(s)/λ_i(t))^p <= C/(t-s)^α at each (s,t) of the grid.
/// Geometric pairs are summed in closed form; other pairs are summed
/// explicitly and the tail is bounded by a geometric series.
LambdaPReport lambda_p_check(const WeightSequence& lam, const WeightSequence& mu, double p,
                             double alpha, double C,
                             const std::vector<std::pair<double, double>>& grid);

/// √(Π_k π/(i_k+1)) · s^{n+|I|}, n = I.size().
double hilbert_weight(const std::vector<unsigned>& I, double s, unsigned dim);

/// |q|_t <= t^{-d} |f|_t for f = z^d q + p.
double division_bound(unsigned d, double t);

}  // namespace kolmo
