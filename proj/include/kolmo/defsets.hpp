#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "kolmo/rational.hpp"

namespace kolmo {

/// A nondecreasing function t ↦ f(t) on t > 0, kept as an expression tree with
/// exact rational parameters so that set identities can be checked
/// symbolically.
class BoundaryFn {
 public:
  enum class Op { linear, power, compose, min };

  /// t ↦ a·t + c, a >= 0.
  static BoundaryFn linear(const Rational& a, const Rational& c);
  /// t ↦ γ·t^k, γ > 0, k > 0.
  static BoundaryFn power(const Rational& gamma, const Rational& k);
  /// t ↦ outer(inner(t)); an inner value <= 0 makes the result 0.
  static BoundaryFn compose(const BoundaryFn& outer, const BoundaryFn& inner);
  static BoundaryFn min(const BoundaryFn& f, const BoundaryFn& g);
  static BoundaryFn identity() { return linear(1, 0); }

  Op op() const noexcept;
  /// (a, c) for linear nodes, (γ, k) for power nodes.
  std::pair<Rational, Rational> params() const;
  /// (outer, inner) for compose nodes, (f, g) for min nodes.
  std::pair<BoundaryFn, BoundaryFn> children() const;

  double operator()(double t) const;

  /// Canonical form: folds linear∘linear, power∘power and scalings into
  /// single nodes whenever the result stays exact.
  BoundaryFn simplified() const;

  std::string to_string() const;

 private:
  struct Node;
  explicit BoundaryFn(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

/// Structural equality of the trees (simplify first for semantic checks).
bool operator==(const BoundaryFn& f, const BoundaryFn& g);

/// A definition set inside {0 < s, t <= S}: either the strict region
/// s < f(t) under a boundary function, the closed diagonal s <= t, or an
/// arbitrary predicate that only supports membership.
class DefSet {
 public:
  enum class Kind { boundary, closed_diagonal, extensional };

  static DefSet from_boundary(BoundaryFn f, const Rational& S = 1);
  /// Δ = {s < t}.
  static DefSet open_diagonal(const Rational& S = 1);
  /// Δ̄ = {s <= t}.
  static DefSet closed_diagonal(const Rational& S = 1);
  /// A = {s < t/α}, the cone of the scaling by α.
  static DefSet cone(const Rational& alpha, const Rational& S = 1);
  static DefSet extensional(std::function<bool(double, double)> member, const Rational& S = 1);

  Kind kind() const noexcept { return kind_; }
  const Rational& S() const noexcept { return S_; }
  /// Throws unsupported_shape unless kind() == boundary.
  const BoundaryFn& boundary() const;

  /// Membership of (t, s); requires s > 0 and 0 < t <= S.
  bool contains(double t, double s) const;

  std::string to_string() const;

 private:
  DefSet(Kind kind, const Rational& S) : kind_(kind), S_(S) {}

  Kind kind_;
  Rational S_;
  std::shared_ptr<const BoundaryFn> boundary_;
  std::function<bool(double, double)> member_;
};

bool operator==(const DefSet& A, const DefSet& B);

/// A⋆B: pairs (t,s) joined through some (t,u) ∈ A, (u,s) ∈ B. For boundary
/// sets {s < f(t)} and {s < g(t)} this is {s < g(f(t))}; Δ̄ is a two-sided
/// unit for boundary sets.
DefSet convolve(const DefSet& A, const DefSet& B);

/// Membership of A and A⋆A agree at every (t, s) of the grid.
bool is_idempotent_on_grid(const DefSet& A, const std::vector<std::pair<double, double>>& grid);

/// Domain of e^u when ‖u‖(t) = slope·t + intercept: s < (1 - slope)t - intercept.
DefSet defset_of_exponential(const Rational& slope, const Rational& intercept,
                             const Rational& S = 1);

/// Domain of an infinite product of exponentials with ‖u_i‖(t) = α_i t.
DefSet defset_of_product(const std::vector<Rational>& alphas, const Rational& S = 1);

/// Δ̄⋆A⋆Δ̄.
DefSet downset_hull(const DefSet& A);

}  // namespace kolmo
