#include <doctest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "kolmo/defsets.hpp"
#include "kolmo/error.hpp"

using namespace kolmo;
using kolmo::testing::Gen;

namespace {

Rational q(long p, long d = 1) {
  Rational r(p, d);
  r.canonicalize();
  return r;
}

std::vector<std::pair<double, double>> ts_grid(int m) {
  std::vector<std::pair<double, double>> g;
  for (int i = 1; i <= m; ++i)
    for (int j = 1; j <= m; ++j) g.emplace_back(static_cast<double>(i) / m, static_cast<double>(j) / m);
  return g;
}

// Brute-force convolution: (t,s) ∈ A⋆B iff some intermediate u has
// (t,u) ∈ A and (u,s) ∈ B, with u anywhere in (0, S].
bool convolution_by_scan(const DefSet& A, const DefSet& B, double t, double s) {
  double S = to_double(std::min(A.S(), B.S()));
  for (int i = 4000; i >= 1; --i) {
    double u = S * i / 4000.0;
    if (A.contains(t, u) && B.contains(u, s)) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("defsets") {
  TEST_CASE("membership examples") {
    DefSet A2 = DefSet::cone(2);
    CHECK(A2.contains(1, 0.4));
    CHECK_FALSE(A2.contains(1, 0.6));
    CHECK_FALSE(A2.contains(1, 0.5));

    DefSet sq = DefSet::from_boundary(BoundaryFn::power(1, q(1, 2)));
    CHECK(sq.contains(0.25, 0.4));
    CHECK_FALSE(sq.contains(0.25, 0.5));

    DefSet tr = defset_of_exponential(0, q(3, 10));
    CHECK_FALSE(tr.contains(1, 0.8));
    CHECK(tr.contains(1, 0.6));
    CHECK_FALSE(tr.contains(0.2, 0.01));

    DefSet cd = DefSet::closed_diagonal();
    CHECK(cd.contains(0.5, 0.5));
    CHECK_FALSE(DefSet::open_diagonal().contains(0.5, 0.5));

    CHECK_THROWS_AS(A2.contains(1, 0), Error);
    CHECK_THROWS_AS(A2.contains(1.5, 0.1), Error);
    CHECK_THROWS_AS(A2.contains(0, 0.1), Error);
    CHECK(DefSet::cone(2, 4).contains(3, 1));
  }

  TEST_CASE("extensional sets") {
    DefSet e = DefSet::extensional([](double t, double s) { return s * s < t; });
    CHECK(e.contains(0.25, 0.4));
    CHECK_THROWS_AS(e.boundary(), Error);
    CHECK_THROWS_AS(convolve(e, e), Error);
    CHECK_THROWS_AS(downset_hull(e), Error);
    CHECK(e.to_string() == "{extensional}");
  }

  TEST_CASE("boundary construction and evaluation") {
    CHECK_THROWS_AS(BoundaryFn::linear(-1, 0), Error);
    CHECK_THROWS_AS(BoundaryFn::power(0, 1), Error);
    CHECK_THROWS_AS(BoundaryFn::power(1, 0), Error);
    BoundaryFn f = BoundaryFn::compose(BoundaryFn::power(2, 2), BoundaryFn::linear(1, q(-1, 2)));
    CHECK(f(1.0) == doctest::Approx(0.5));
    CHECK(f(0.25) == 0.0);
    BoundaryFn m = BoundaryFn::min(BoundaryFn::identity(), BoundaryFn::power(1, q(1, 2)));
    CHECK(m(0.25) == doctest::Approx(0.25));
    CHECK(m(4.0) == doctest::Approx(2.0));
    CHECK(f.to_string() == "compose(power(2, 2), linear(1, -1/2))");
    CHECK_THROWS_AS(BoundaryFn::identity().children(), Error);
    CHECK_THROWS_AS(m.params(), Error);
  }

  TEST_CASE("simplifier") {
    auto lin = [](Rational a, Rational c) { return BoundaryFn::linear(a, c); };
    auto pw = [](Rational g, Rational k) { return BoundaryFn::power(g, k); };
    CHECK(BoundaryFn::compose(lin(2, 0), lin(3, 0)).simplified() == lin(6, 0));
    CHECK(BoundaryFn::compose(lin(2, -1), lin(3, 1)).simplified() == lin(6, 1));
    // A positive outer intercept would survive the inner clip at 0, so no fold.
    CHECK(BoundaryFn::compose(lin(2, 1), lin(3, -1)).simplified().op() == BoundaryFn::Op::compose);
    CHECK(BoundaryFn::compose(pw(1, q(1, 2)), pw(1, q(1, 2))).simplified() == pw(1, q(1, 4)));
    CHECK(BoundaryFn::compose(pw(1, 2), lin(3, 0)).simplified() == pw(9, 2));
    CHECK(BoundaryFn::compose(lin(3, 0), pw(2, q(1, 3))).simplified() == pw(6, q(1, 3)));
    CHECK(BoundaryFn::compose(pw(1, q(1, 2)), lin(2, 0)).simplified().op() == BoundaryFn::Op::compose);
    CHECK(pw(5, 1).simplified() == lin(5, 0));
    CHECK(BoundaryFn::min(pw(1, 2), pw(1, 2)).simplified() == pw(1, 2));
    CHECK(BoundaryFn::compose(BoundaryFn::identity(), pw(2, 3)).simplified() == pw(2, 3));
    CHECK(BoundaryFn::compose(pw(2, 3), BoundaryFn::identity()).simplified() == pw(2, 3));
  }

  TEST_CASE("simplification preserves values") {
    Gen gen(401);
    for (int trial = 0; trial < 200; ++trial) {
      auto leaf = [&]() {
        if (gen.coin()) return BoundaryFn::linear(gen.positive_rational(5, 4), gen.rational(2, 4));
        return BoundaryFn::power(gen.positive_rational(5, 4), gen.positive_rational(4, 3));
      };
      BoundaryFn f = leaf();
      for (int depth = gen.integer(1, 3); depth > 0; --depth) {
        BoundaryFn g = leaf();
        f = gen.integer(0, 3) == 0 ? BoundaryFn::min(f, g)
            : gen.coin()           ? BoundaryFn::compose(f, g)
                                   : BoundaryFn::compose(g, f);
      }
      BoundaryFn s = f.simplified();
      for (double t : {0.01, 0.2, 0.5, 0.9, 1.0, 2.5}) {
        // Nonpositive values all describe an empty fiber.
        double a = std::max(f(t), 0.0), b = std::max(s(t), 0.0);
        CHECK(a == doctest::Approx(b).epsilon(1e-12).scale(1.0));
      }
    }
  }

  TEST_CASE("convolution examples") {
    CHECK(convolve(DefSet::cone(2), DefSet::cone(3)) == DefSet::cone(6));
    CHECK(convolve(DefSet::cone(q(3, 2)), DefSet::cone(q(5, 7))) == DefSet::cone(q(15, 14)));

    DefSet A = DefSet::cone(3);
    CHECK(convolve(A, DefSet::closed_diagonal()) == A);
    CHECK(convolve(DefSet::closed_diagonal(), A) == A);
    CHECK(convolve(DefSet::closed_diagonal(), DefSet::closed_diagonal()) == DefSet::closed_diagonal());

    DefSet sq = DefSet::from_boundary(BoundaryFn::power(1, q(1, 2)));
    CHECK(convolve(sq, sq).boundary() == BoundaryFn::power(1, q(1, 4)));

    // Boundaries t/α and αt compose to the diagonal.
    DefSet up = DefSet::from_boundary(BoundaryFn::linear(5, 0), 1);
    CHECK(convolve(DefSet::cone(5), up) == DefSet::open_diagonal());
    CHECK(convolve(up, DefSet::cone(5)) == DefSet::open_diagonal());

    CHECK(convolve(DefSet::cone(2, 3), DefSet::cone(2, 1)).S() == 1);
  }

  TEST_CASE("convolution agrees with the brute-force definition") {
    DefSet A = DefSet::cone(2), B = DefSet::from_boundary(BoundaryFn::power(1, q(1, 2)));
    DefSet C = defset_of_exponential(q(1, 4), q(1, 20));
    for (const auto& [X, Y] : {std::pair{A, B}, std::pair{B, A}, std::pair{A, C}, std::pair{C, B}}) {
      DefSet XY = convolve(X, Y);
      for (const auto& [t, s] : ts_grid(23)) {
        // Skip points within the scan resolution of the boundary.
        if (XY.kind() == DefSet::Kind::boundary && std::fabs(s - XY.boundary()(t)) < 1e-3) continue;
        CHECK(XY.contains(t, s) == convolution_by_scan(X, Y, t, s));
      }
    }
  }

  TEST_CASE("idempotents") {
    auto grid = ts_grid(50);
    CHECK(is_idempotent_on_grid(DefSet::open_diagonal(), grid));
    CHECK(is_idempotent_on_grid(DefSet::closed_diagonal(), grid));
    CHECK_FALSE(is_idempotent_on_grid(DefSet::cone(2), grid));
    CHECK(is_idempotent_on_grid(DefSet::cone(1), grid));
  }

  TEST_CASE("exponential and product sets") {
    CHECK(defset_of_exponential(q(1, 3), 0) == DefSet::from_boundary(BoundaryFn::linear(q(2, 3), 0)));
    CHECK(defset_of_exponential(0, 0) == DefSet::open_diagonal());
    double el = std::numbers::e * 0.1;
    DefSet tr = defset_of_exponential(0, rational_from_double(el));
    CHECK(tr.boundary()(1.0) == doctest::Approx(1.0 - el));
    try {
      defset_of_exponential(1, 0);
      FAIL("expected degenerate set");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::degenerate_set);
    }
    CHECK_THROWS_AS(defset_of_exponential(q(-1, 2), 0), Error);

    CHECK(defset_of_product({q(1, 2), q(1, 2)}) == DefSet::from_boundary(BoundaryFn::linear(q(1, 4), 0)));
    CHECK(defset_of_product({q(1, 5)}) == defset_of_exponential(q(1, 5), 0));
    CHECK(defset_of_product({}) == DefSet::open_diagonal());
    CHECK_THROWS_AS(defset_of_product({q(1, 2), 1}), Error);
  }

  TEST_CASE("downset hull") {
    CHECK(downset_hull(DefSet::cone(3)) == DefSet::cone(3));
    CHECK(downset_hull(DefSet::open_diagonal()) == DefSet::open_diagonal());
    CHECK(downset_hull(DefSet::closed_diagonal()) == DefSet::closed_diagonal());
  }

  TEST_CASE("to_string") {
    CHECK(DefSet::cone(2).to_string() == "{s < linear(1/2, 0)}");
    CHECK(DefSet::closed_diagonal().to_string() == "{s <= t}");
  }
}

TEST_SUITE("defsets_properties") {
  TEST_CASE("cone convolution is multiplicative, symbolically and on a grid") {
    Gen gen(411);
    auto grid = ts_grid(100);
    for (int trial = 0; trial < 20; ++trial) {
      Rational a = 1 + gen.positive_rational(6, 5), b = 1 + gen.positive_rational(6, 5);
      DefSet AB = convolve(DefSet::cone(a), DefSet::cone(b));
      DefSet target = DefSet::cone(a * b);
      CHECK(AB == target);
      std::size_t mismatches = 0;
      for (const auto& [t, s] : grid) mismatches += AB.contains(t, s) != target.contains(t, s);
      CHECK(mismatches == 0);
    }
  }

  TEST_CASE("convolution is associative") {
    Gen gen(412);
    auto grid = ts_grid(40);
    for (int trial = 0; trial < 30; ++trial) {
      auto any = [&]() {
        switch (gen.integer(0, 3)) {
          case 0: return DefSet::cone(gen.positive_rational(4, 3));
          case 1: return DefSet::from_boundary(BoundaryFn::power(1, gen.positive_rational(3, 3)));
          case 2: return defset_of_exponential(gen.positive_rational(1, 4) / 2, gen.positive_rational(1, 20));
          default: return DefSet::closed_diagonal();
        }
      };
      DefSet A = any(), B = any(), C = any();
      DefSet left = convolve(convolve(A, B), C), right = convolve(A, convolve(B, C));
      for (const auto& [t, s] : grid) CHECK(left.contains(t, s) == right.contains(t, s));
    }
  }

  TEST_CASE("sets with an idempotent boundary are idempotent") {
    auto grid = ts_grid(40);
    for (const BoundaryFn& f :
         {BoundaryFn::identity(), BoundaryFn::min(BoundaryFn::identity(), BoundaryFn::linear(0, q(1, 2)))}) {
      bool fixed = true;
      for (int i = 1; i <= 40; ++i) fixed = fixed && std::fabs(f(f(i / 40.0)) - f(i / 40.0)) < 1e-15;
      REQUIRE(fixed);
      CHECK(is_idempotent_on_grid(DefSet::from_boundary(f), grid));
    }
  }

  TEST_CASE("tangent slopes multiply under convolution") {
    Gen gen(413);
    for (int trial = 0; trial < 50; ++trial) {
      Rational alpha = gen.positive_rational(9, 10), beta = gen.positive_rational(9, 10);
      // Nonlinear boundaries that are αt and βt near the origin only.
      BoundaryFn f = BoundaryFn::min(BoundaryFn::linear(alpha, 0), BoundaryFn::power(1, q(1, 2)));
      BoundaryFn g = BoundaryFn::min(BoundaryFn::linear(beta, 0), BoundaryFn::power(2, q(1, 3)));
      DefSet AB = convolve(DefSet::from_boundary(f, 4), DefSet::from_boundary(g, 4));
      REQUIRE(AB.boundary().op() == BoundaryFn::Op::compose);
      double h = 1e-7;
      double slope = (AB.boundary()(2 * h) - AB.boundary()(h)) / h;
      CHECK(std::fabs(slope - to_double(alpha * beta)) < 1e-6);
    }
  }
}
