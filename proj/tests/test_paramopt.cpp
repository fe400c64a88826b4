#include <doctest.h>

#include <chrono>
#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "kolmo/error.hpp"
#include "kolmo/normalform.hpp"
#include "kolmo/paramopt.hpp"

using namespace kolmo;
using kolmo::testing::Gen;

namespace {

// Root of 8μ³ - 4μ² - 7μ + 4 in (1/2, 3/4) by plain bisection in long double.
long double cubic_root() {
  auto p = [](long double m) { return ((8 * m - 4) * m - 7) * m + 4; };
  long double lo = 0.5L, hi = 0.75L;
  REQUIRE(p(lo) * p(hi) < 0);
  for (int i = 0; i < 200; ++i) {
    long double mid = (lo + hi) / 2;
    (p(lo) * p(mid) <= 0 ? hi : lo) = mid;
  }
  return (lo + hi) / 2;
}

double cubic_residual(double mu) { return 8 * mu * mu * mu - 4 * mu * mu - 7 * mu + 4; }

// Central-difference gradient of the objective, used only as a cross-check.
double fd_grad_norm(double (*F)(double, double), double l, double m) {
  double h = 1e-6;
  double gl = (F(l + h, m) - F(l - h, m)) / (2 * h);
  double gm = (F(l, m + h) - F(l, m - h)) / (2 * h);
  return std::hypot(gl, gm);
}

}  // namespace

TEST_SUITE("paramopt") {
  TEST_CASE("F_basic") {
    CHECK(F_basic(0.25, 0.5) == doctest::Approx(1.0 / 256).epsilon(1e-14));
    CHECK(F_basic(0.3, 0.3 + 1e-12) < 1e-12);
    CHECK(F_basic(0.448612476, 0.6311094891) ==
          doctest::Approx(std::numbers::e * 0.001949102953).epsilon(1e-8));
    CHECK_THROWS_AS(F_basic(0.5, 0.5), Error);
    CHECK_THROWS_AS(F_basic(0.0, 0.5), Error);
    CHECK_THROWS_AS(F_basic(0.2, 1.0), Error);
  }

  TEST_CASE("solve_r") {
    CHECK(solve_r(2.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(solve_r(1e-12) == doctest::Approx(1e-12).epsilon(1e-9));
    CHECK(solve_r(1e-300) > 0.0);
    Gen gen(601);
    for (int i = 0; i < 200; ++i) {
      double nu = std::exp(gen.uniform(-20, 10));
      double r = solve_r(nu);
      CHECK(r > 0.0);
      CHECK(r < 1.0);
      CHECK(std::fabs(r / ((1 - r) * (1 - r)) - nu) < 1e-12 * std::max(1.0, nu));
    }
    CHECK_THROWS_AS(solve_r(0.0), Error);
    CHECK_THROWS_AS(solve_r(-1.0), Error);
  }

  TEST_CASE("true_radius and q_value") {
    CHECK(std::fabs(true_radius(3, 1) - std::sqrt(3.0) / 9) < 1e-12);
    CHECK(true_radius(4, 1) == doctest::Approx(1 / (2 * std::sqrt(2.0))).epsilon(1e-14));
    CHECK(true_radius(3, 2) == doctest::Approx(true_radius(3, 1) / 2).epsilon(1e-14));
    CHECK_THROWS_AS(true_radius(2, 1), Error);
    CHECK_THROWS_AS(true_radius(3, 0), Error);
    CHECK(q_value(3, 0.4145716992, 0.6054472202) == doctest::Approx(27.7754).epsilon(0.001 / 27.7754));
    CHECK(q_value(5, 0.3, 0.6) ==
          doctest::Approx(true_radius(5, 1) / t_inf_equalized(5, 0.3, 0.6)).epsilon(1e-12));
  }

  TEST_CASE("q_value is independent of beta") {
    for (double beta : {0.25, 1.0, 3.0})
      for (unsigned n : {3u, 6u}) {
        double ratio = true_radius(n, beta) / t_inf_equalized(n, 0.35, 0.62, beta);
        CHECK(ratio == doctest::Approx(q_value(n, 0.35, 0.62)).epsilon(1e-12));
      }
  }

  TEST_CASE("basic optimum") {
    OptResult r = maximize_basic();
    long double mu_star = cubic_root();
    long double lam_star = 8 * mu_star * mu_star + 2 * mu_star - 4;
    CHECK(std::fabs(r.mu - static_cast<double>(mu_star)) < 1e-9);
    CHECK(std::fabs(r.lambda - static_cast<double>(lam_star)) < 1e-9);
    CHECK(std::fabs(cubic_residual(r.mu)) < 1e-9);
    CHECK(std::fabs(r.lambda - (8 * r.mu * r.mu + 2 * r.mu - 4)) < 1e-9);
    CHECK(std::fabs(r.lambda - 0.448612476) < 1e-6);
    CHECK(std::fabs(r.mu - 0.6311094891) < 1e-6);
    CHECK(std::fabs(r.t_inf - 0.001949102953) < 1e-8);
    CHECK(r.value == doctest::Approx(F_basic(r.lambda, r.mu)).epsilon(1e-12));
    CHECK_FALSE(r.r.has_value());
    CHECK(r.grad_norm < 1e-8);
    CHECK(fd_grad_norm(F_basic, r.lambda, r.mu) < 1e-7);
  }

  TEST_CASE("equalized optimum") {
    auto start = std::chrono::steady_clock::now();
    OptResult r = maximize_equalized();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(secs < 5.0);
    CHECK(std::fabs(r.value - 0.01883436563) < 1e-8);
    CHECK(std::fabs(r.t_inf - 0.006928775903) < 1e-8);
    CHECK(std::fabs(r.lambda - 0.4145716992) < 1e-6);
    CHECK(std::fabs(r.mu - 0.6054472202) < 1e-6);
    REQUIRE(r.r.has_value());
    CHECK(*r.r == doctest::Approx(equalized_r(r.lambda, r.mu)).epsilon(1e-14));
    CHECK(r.grad_norm < 1e-8);
    CHECK(fd_grad_norm(F_equalized, r.lambda, r.mu) < 1e-7);
    CHECK(r.t_inf * std::numbers::e == doctest::Approx(r.value).epsilon(1e-12));
  }

  TEST_CASE("equalized objective agrees with the certificate threshold") {
    Gen gen(602);
    for (int i = 0; i < 200; ++i) {
      double mu = gen.uniform(0.05, 0.95);
      double lambda = gen.uniform(0.01, mu - 0.01);
      double r = equalized_r(lambda, mu);
      double T0 = threshold_T0(lambda, mu, r, 1.0, 3);
      double via_cert = std::numbers::e * T0 * (mu - lambda) / (1 - lambda);
      CHECK(via_cert == doctest::Approx(F_equalized(lambda, mu)).epsilon(1e-12));
      // Both certificate conditions bind at T0 when r is equalized.
      Certificate c = certify(T0, lambda, mu, r, 1.0, 3);
      CHECK(c.i.lhs == doctest::Approx(c.i.rhs).epsilon(1e-12));
      CHECK(c.ii.lhs == doctest::Approx(c.ii.rhs).epsilon(1e-12));
    }
  }

  TEST_CASE("plot_grid") {
    auto grid = plot_grid(Objective::basic, 9);
    CHECK(grid.size() == 81);
    CHECK(grid.front().lambda == doctest::Approx(0.1));
    std::size_t inside = 0;
    for (const auto& p : grid) {
      bool feasible = p.lambda < p.mu;
      CHECK(p.value.has_value() == feasible);
      if (p.value) {
        ++inside;
        CHECK(*p.value == doctest::Approx(F_basic(p.lambda, p.mu)));
      }
    }
    CHECK(inside == 36);
  }

  TEST_CASE("radius oracle preconditions") {
    try {
      radius_oracle_series(3, 1, 49);
      FAIL("expected inconclusive");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::inconclusive);
    }
    CHECK_THROWS_AS(radius_oracle_series(2, 1, 100), Error);
    CHECK_THROWS_AS(radius_oracle_series(3, 0, 100), Error);
  }
}

TEST_SUITE("paramopt_properties") {
  TEST_CASE("optima do not depend on the starting point") {
    OptResult basic = maximize_basic(), eq = maximize_equalized();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double mu0 = 0.3 + 0.15 * j;
        double lambda0 = mu0 * (0.2 + 0.2 * i);
        OptResult b = maximize_from(Objective::basic, 3, lambda0, mu0);
        OptResult e = maximize_from(Objective::equalized, 3, lambda0, mu0);
        CHECK(std::fabs(b.lambda - basic.lambda) < 1e-8);
        CHECK(std::fabs(b.mu - basic.mu) < 1e-8);
        CHECK(std::fabs(e.lambda - eq.lambda) < 1e-8);
        CHECK(std::fabs(e.mu - eq.mu) < 1e-8);
      }
  }

  TEST_CASE("Q table") {
    const std::vector<unsigned> ns{3, 4, 5, 6, 7, 8, 9, 10, 20, 50};
    const double expected[] = {27.775, 5.439, 3.153, 2.397, 2.033, 1.820, 1.682, 1.584, 1.249, 1.099};
    auto start = std::chrono::steady_clock::now();
    auto rows = q_table(ns);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(secs < 30.0);
    REQUIRE(rows.size() == ns.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].n == ns[i]);
      CHECK(std::fabs(rows[i].Q - expected[i]) <= 0.005);
      CHECK(rows[i].Q == doctest::Approx(rows[i].true_radius / rows[i].t_inf).epsilon(1e-12));
      CHECK(rows[i].Q >= 1.0);
      if (i > 0) {
        CHECK(rows[i].lambda < rows[i - 1].lambda);
        CHECK(rows[i].mu > rows[i - 1].mu);
        CHECK(rows[i].Q < rows[i - 1].Q);
      }
    }
    // The published parameters sit on a flat part of the objective; ours
    // must do at least as well there.
    const double published[][2] = {{0.414, 0.605}, {0.367, 0.635}, {0.338, 0.655}, {0.319, 0.676},
                                   {0.301, 0.687}, {0.287, 0.699}, {0.279, 0.713}, {0.259, 0.719},
                                   {0.211, 0.769}, {0.154, 0.847}};
    for (std::size_t i = 0; i < rows.size(); ++i)
      CHECK(rows[i].Q <= q_value(ns[i], published[i][0], published[i][1]));
    CHECK(std::fabs(rows[0].lambda - 0.414) < 0.001);
    CHECK(std::fabs(rows[0].mu - 0.605) < 0.001);
  }

  TEST_CASE("Q stays above 1 across the parameter triangle") {
    for (unsigned n : {3u, 5u, 10u, 50u})
      for (int i = 1; i < 40; ++i)
        for (int j = i + 1; j < 40; ++j) CHECK(q_value(n, i / 40.0, j / 40.0) >= 1.0);
  }

  TEST_CASE("series radius oracle agrees with the closed form") {
    for (unsigned n : {3u, 4u, 5u})
      for (Rational beta : {Rational(1, 2), Rational(1), Rational(2)}) {
        double est = radius_oracle_series(n, beta, 200);
        double exact = true_radius(n, to_double(beta));
        CHECK(std::fabs(est - exact) / exact < 0.02);
      }
  }
}
