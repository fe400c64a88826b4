#include "kolmo/defsets.hpp"

#include <cmath>
#include <sstream>
#include <variant>

#include "kolmo/error.hpp"

namespace kolmo {

struct BoundaryFn::Node {
  struct Linear {
    Rational a, c;
  };
  struct Power {
    Rational gamma, k;
  };
  struct Compose {
    BoundaryFn outer, inner;
  };
  struct Min {
    BoundaryFn f, g;
  };
  std::variant<Linear, Power, Compose, Min> v;
};

BoundaryFn BoundaryFn::linear(const Rational& a, const Rational& c) {
  if (sgn(a) < 0) throw Error(Errc::domain, "linear boundary needs a >= 0");
  return BoundaryFn(std::make_shared<const Node>(Node{Node::Linear{a, c}}));
}

BoundaryFn BoundaryFn::power(const Rational& gamma, const Rational& k) {
  if (sgn(gamma) <= 0 || sgn(k) <= 0)
    throw Error(Errc::domain, "power boundary needs gamma > 0 and k > 0");
  return BoundaryFn(std::make_shared<const Node>(Node{Node::Power{gamma, k}}));
}

BoundaryFn BoundaryFn::compose(const BoundaryFn& outer, const BoundaryFn& inner) {
  return BoundaryFn(std::make_shared<const Node>(Node{Node::Compose{outer, inner}}));
}

BoundaryFn BoundaryFn::min(const BoundaryFn& f, const BoundaryFn& g) {
  return BoundaryFn(std::make_shared<const Node>(Node{Node::Min{f, g}}));
}

BoundaryFn::Op BoundaryFn::op() const noexcept { return static_cast<Op>(node_->v.index()); }

std::pair<Rational, Rational> BoundaryFn::params() const {
  if (auto* l = std::get_if<Node::Linear>(&node_->v)) return {l->a, l->c};
  if (auto* p = std::get_if<Node::Power>(&node_->v)) return {p->gamma, p->k};
  throw Error(Errc::unsupported_shape, "node has no scalar parameters");
}

std::pair<BoundaryFn, BoundaryFn> BoundaryFn::children() const {
  if (auto* c = std::get_if<Node::Compose>(&node_->v)) return {c->outer, c->inner};
  if (auto* m = std::get_if<Node::Min>(&node_->v)) return {m->f, m->g};
  throw Error(Errc::unsupported_shape, "leaf node has no children");
}

double BoundaryFn::operator()(double t) const {
  return std::visit(
      [t](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Node::Linear>) {
          return to_double(n.a) * t + to_double(n.c);
        } else if constexpr (std::is_same_v<T, Node::Power>) {
          if (t <= 0.0) return 0.0;
          return to_double(n.gamma) * std::pow(t, to_double(n.k));
        } else if constexpr (std::is_same_v<T, Node::Compose>) {
          double u = n.inner(t);
          return u <= 0.0 ? 0.0 : n.outer(u);
        } else {
          return std::min(n.f(t), n.g(t));
        }
      },
      node_->v);
}

namespace {

// Exact r^k for rational k, when it exists in the cases we can see cheaply.
bool exact_rational_power(const Rational& r, const Rational& k, Rational& out) {
  if (r == 1) {
    out = 1;
    return true;
  }
  if (!is_integer(k) || !k.get_num().fits_slong_p()) return false;
  out = pow_int(r, k.get_num().get_si());
  return true;
}

}  // namespace

BoundaryFn BoundaryFn::simplified() const {
  switch (op()) {
    case Op::linear: {
      auto [a, c] = params();
      return linear(a, c);
    }
    case Op::power: {
      auto [g, k] = params();
      if (k == 1) return linear(g, 0);
      return power(g, k);
    }
    case Op::min: {
      auto [f, g] = children();
      BoundaryFn fs = f.simplified(), gs = g.simplified();
      if (fs == gs) return fs;
      return min(fs, gs);
    }
    case Op::compose: break;
  }

  auto [outer_raw, inner_raw] = children();
  BoundaryFn outer = outer_raw.simplified();
  BoundaryFn inner = inner_raw.simplified();

  auto is_identity = [](const BoundaryFn& f) {
    if (f.op() != Op::linear) return false;
    auto [a, c] = f.params();
    return a == 1 && c == 0;
  };
  // Clipping at 0 only changes nonpositive values, which never admit a
  // point s > 0, so dropping an identity on either side is harmless.
  if (is_identity(inner)) return outer;
  if (is_identity(outer)) return inner;

  if (outer.op() == Op::linear && inner.op() == Op::linear) {
    auto [a, c] = outer.params();
    auto [a2, c2] = inner.params();
    // With c <= 0 the folded line is <= 0 exactly where the inner one is, so
    // clipping agrees.
    if (sgn(c) <= 0) return linear(a * a2, a * c2 + c);
  }
  if (outer.op() == Op::linear && inner.op() == Op::power) {
    auto [a, c] = outer.params();
    auto [g, k] = inner.params();
    if (c == 0 && sgn(a) > 0) return power(a * g, k).simplified();
  }
  if (outer.op() == Op::power && inner.op() == Op::linear) {
    auto [g, k] = outer.params();
    auto [a, c] = inner.params();
    Rational ak;
    if (c == 0 && sgn(a) > 0 && exact_rational_power(a, k, ak))
      return power(g * ak, k).simplified();
  }
  if (outer.op() == Op::power && inner.op() == Op::power) {
    auto [g, k] = outer.params();
    auto [g2, k2] = inner.params();
    Rational gk;
    if (exact_rational_power(g2, k, gk)) return power(g * gk, k * k2).simplified();
  }
  return compose(outer, inner);
}

std::string BoundaryFn::to_string() const {
  std::ostringstream os;
  std::visit(
      [&os](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Node::Linear>) {
          os << "linear(" << to_fraction_string(n.a) << ", " << to_fraction_string(n.c) << ")";
        } else if constexpr (std::is_same_v<T, Node::Power>) {
          os << "power(" << to_fraction_string(n.gamma) << ", " << to_fraction_string(n.k) << ")";
        } else if constexpr (std::is_same_v<T, Node::Compose>) {
          os << "compose(" << n.outer.to_string() << ", " << n.inner.to_string() << ")";
        } else {
          os << "min(" << n.f.to_string() << ", " << n.g.to_string() << ")";
        }
      },
      node_->v);
  return os.str();
}

bool operator==(const BoundaryFn& f, const BoundaryFn& g) {
  if (f.op() != g.op()) return false;
  switch (f.op()) {
    case BoundaryFn::Op::linear:
    case BoundaryFn::Op::power: return f.params() == g.params();
    case BoundaryFn::Op::compose:
    case BoundaryFn::Op::min: {
      auto [f1, f2] = f.children();
      auto [g1, g2] = g.children();
      return f1 == g1 && f2 == g2;
    }
  }
  return false;
}

DefSet DefSet::from_boundary(BoundaryFn f, const Rational& S) {
  if (sgn(S) <= 0) throw Error(Errc::domain, "domain cap S must be positive");
  DefSet d(Kind::boundary, S);
  d.boundary_ = std::make_shared<const BoundaryFn>(f.simplified());
  return d;
}

DefSet DefSet::open_diagonal(const Rational& S) { return from_boundary(BoundaryFn::identity(), S); }

DefSet DefSet::closed_diagonal(const Rational& S) {
  if (sgn(S) <= 0) throw Error(Errc::domain, "domain cap S must be positive");
  return DefSet(Kind::closed_diagonal, S);
}

DefSet DefSet::cone(const Rational& alpha, const Rational& S) {
  if (sgn(alpha) <= 0) throw Error(Errc::domain, "cone parameter must be positive");
  return from_boundary(BoundaryFn::linear(1 / alpha, 0), S);
}

DefSet DefSet::extensional(std::function<bool(double, double)> member, const Rational& S) {
  if (sgn(S) <= 0) throw Error(Errc::domain, "domain cap S must be positive");
  DefSet d(Kind::extensional, S);
  d.member_ = std::move(member);
  return d;
}

const BoundaryFn& DefSet::boundary() const {
  if (kind_ != Kind::boundary)
    throw Error(Errc::unsupported_shape, "set is not described by a boundary function");
  return *boundary_;
}

bool DefSet::contains(double t, double s) const {
  if (!(s > 0.0) || !(t > 0.0) || t > to_double(S_))
    throw Error(Errc::domain, "membership needs s > 0 and 0 < t <= S");
  switch (kind_) {
    case Kind::boundary: return s < (*boundary_)(t);
    case Kind::closed_diagonal: return s <= t;
    case Kind::extensional: return member_(t, s);
  }
  return false;
}

std::string DefSet::to_string() const {
  switch (kind_) {
    case Kind::boundary: return "{s < " + boundary_->to_string() + "}";
    case Kind::closed_diagonal: return "{s <= t}";
    case Kind::extensional: return "{extensional}";
  }
  return "";
}

bool operator==(const DefSet& A, const DefSet& B) {
  if (A.kind() != B.kind() || A.S() != B.S()) return false;
  switch (A.kind()) {
    case DefSet::Kind::boundary: return A.boundary() == B.boundary();
    case DefSet::Kind::closed_diagonal: return true;
    case DefSet::Kind::extensional: return false;
  }
  return false;
}

DefSet convolve(const DefSet& A, const DefSet& B) {
  using Kind = DefSet::Kind;
  if (A.kind() == Kind::extensional || B.kind() == Kind::extensional)
    throw Error(Errc::unsupported_shape, "convolution needs boundary-function sets");
  Rational S = std::min(A.S(), B.S());
  if (A.kind() == Kind::closed_diagonal && B.kind() == Kind::closed_diagonal)
    return DefSet::closed_diagonal(S);
  if (A.kind() == Kind::closed_diagonal) return DefSet::from_boundary(B.boundary(), S);
  if (B.kind() == Kind::closed_diagonal) return DefSet::from_boundary(A.boundary(), S);
  return DefSet::from_boundary(BoundaryFn::compose(B.boundary(), A.boundary()), S);
}

bool is_idempotent_on_grid(const DefSet& A, const std::vector<std::pair<double, double>>& grid) {
  DefSet AA = convolve(A, A);
  for (const auto& [t, s] : grid)
    if (A.contains(t, s) != AA.contains(t, s)) return false;
  return true;
}

DefSet defset_of_exponential(const Rational& slope, const Rational& intercept,
                             const Rational& S) {
  if (sgn(slope) < 0 || sgn(intercept) < 0)
    throw Error(Errc::domain, "operator norm must be nonnegative");
  if (slope >= 1)
    throw Error(Errc::degenerate_set, "norm slope " + to_fraction_string(slope) +
                                          " leaves no room below the diagonal");
  return DefSet::from_boundary(BoundaryFn::linear(1 - slope, -intercept), S);
}

DefSet defset_of_product(const std::vector<Rational>& alphas, const Rational& S) {
  Rational factor = 1;
  for (const auto& a : alphas) {
    if (sgn(a) < 0) throw Error(Errc::domain, "norm slopes must be nonnegative");
    if (a >= 1)
      throw Error(Errc::degenerate_set,
                  "factor with slope " + to_fraction_string(a) + " empties the set");
    factor *= 1 - a;
  }
  return DefSet::from_boundary(BoundaryFn::linear(factor, 0), S);
}

DefSet downset_hull(const DefSet& A) {
  if (A.kind() == DefSet::Kind::extensional)
    throw Error(Errc::unsupported_shape, "downset hull of an extensional set is not representable");
  return convolve(DefSet::closed_diagonal(A.S()), convolve(A, DefSet::closed_diagonal(A.S())));
}

}  // namespace kolmo
