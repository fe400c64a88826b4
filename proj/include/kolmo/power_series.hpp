#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "kolmo/rational.hpp"

namespace kolmo {

/// Order of the zero series.
inline constexpr std::size_t kInfiniteOrder = std::numeric_limits<std::size_t>::max();

/// A univariate power series known modulo z^{N+1}, with exact rational
/// coefficients. Values are immutable once built; all arithmetic is free
/// functions returning new series.
///
/// Every operation reports the tightest truncation it can certify from the
/// truncations of its inputs, so a product of two series known to z^4 with
/// vanishing constant terms is known to z^5, while a derivative loses one
/// order.
class TruncSeries {
 public:
  /// The zero series known modulo z^{trunc_order+1}.
  explicit TruncSeries(std::size_t trunc_order);
  /// Truncation order is coeffs.size() - 1; coeffs must not be empty.
  explicit TruncSeries(std::vector<Rational> coeffs);
  /// Pads with zeros (or drops trailing entries) to reach trunc_order.
  TruncSeries(std::vector<Rational> coeffs, std::size_t trunc_order);

  static TruncSeries constant(const Rational& c, std::size_t trunc_order);
  static TruncSeries monomial(const Rational& c, std::size_t power, std::size_t trunc_order);
  /// The coordinate z.
  static TruncSeries identity(std::size_t trunc_order);
  /// 1 + z + z^2 + ...
  static TruncSeries geometric(std::size_t trunc_order);

  std::size_t trunc_order() const noexcept { return coeffs_.size() - 1; }
  std::span<const Rational> coeffs() const noexcept { return coeffs_; }
  /// Coefficient of z^k; k must not exceed the truncation order.
  const Rational& operator[](std::size_t k) const;

  /// Index of the first nonzero stored coefficient, or kInfiniteOrder.
  std::size_t order() const noexcept;
  bool is_zero() const noexcept { return order() == kInfiniteOrder; }

  /// Same series, forgetting everything above z^n (n <= trunc_order).
  TruncSeries truncated(std::size_t n) const;

  /// Human-readable form such as "1/2*z^2 - 3*z^4 + O(z^5)".
  std::string to_string() const;

 private:
  std::vector<Rational> coeffs_;
};

/// Coefficientwise on the common truncation.
bool operator==(const TruncSeries& f, const TruncSeries& g);

/// A derivation v(z)∂_z, stored through its coefficient series v.
class Derivation {
 public:
  explicit Derivation(TruncSeries coefficient) : v_(std::move(coefficient)) {}

  const TruncSeries& coefficient() const noexcept { return v_; }
  std::size_t order() const noexcept { return v_.order(); }

 private:
  TruncSeries v_;
};

TruncSeries add(const TruncSeries& f, const TruncSeries& g);
TruncSeries sub(const TruncSeries& f, const TruncSeries& g);
TruncSeries negate(const TruncSeries& f);
TruncSeries scale(const TruncSeries& f, const Rational& c);
TruncSeries mul(const TruncSeries& f, const TruncSeries& g);

inline TruncSeries operator+(const TruncSeries& f, const TruncSeries& g) { return add(f, g); }
inline TruncSeries operator-(const TruncSeries& f, const TruncSeries& g) { return sub(f, g); }
inline TruncSeries operator*(const TruncSeries& f, const TruncSeries& g) { return mul(f, g); }

/// f∘g. Requires g(0) = 0.
TruncSeries compose(const TruncSeries& f, const TruncSeries& g);

/// Compositional inverse of f, with f(0) = 0 and f'(0) != 0.
TruncSeries invert(const TruncSeries& f);

/// f^e for f(0) = 1 and rational e.
TruncSeries binomial_pow(const TruncSeries& f, const Rational& e);

/// Σ_k binom(e, k) z^k.
TruncSeries binomial_series(const Rational& e, std::size_t trunc_order);

TruncSeries derivative(const TruncSeries& f);

/// v(f) = v(z)·f'(z).
TruncSeries apply_derivation(const Derivation& v, const TruncSeries& f);

/// Σ_k sign^k v^k(f)/k!, the action of e^{±v} on f. The sum is finite at any
/// truncation because each application of v raises the order; this needs
/// order(v) >= 2 unless v vanishes.
TruncSeries lie_exp(const Derivation& v, const TruncSeries& f, int sign);

/// Right inverse of v ↦ v(z²/2) = z·v on the maximal ideal:
/// b ↦ ((b - b(0))/z)∂_z.
Derivation j_map(const TruncSeries& b);

/// Coefficientwise product.
TruncSeries hadamard(const TruncSeries& f, const TruncSeries& g);

/// z·f'(z).
TruncSeries nabla(const TruncSeries& f);

struct MonomialDivision {
  TruncSeries quotient;
  TruncSeries remainder;
};

/// f = z^d·q + p with deg p < d.
MonomialDivision weierstrass_div_monomial(const TruncSeries& f, std::size_t d);

}  // namespace kolmo
