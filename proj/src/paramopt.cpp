#include "kolmo/paramopt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <string>

#include "kolmo/error.hpp"
#include "kolmo/power_series.hpp"

namespace kolmo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Value, gradient and Hessian in the two variables (λ, μ), propagated
// exactly through the arithmetic below.
struct Jet {
  double v = 0;
  std::array<double, 2> g{};
  std::array<std::array<double, 2>, 2> h{};

  Jet() = default;
  Jet(double c) : v(c) {}  // NOLINT: constants mix freely with jets
  static Jet variable(double x, int idx) {
    Jet j(x);
    j.g[idx] = 1.0;
    return j;
  }
};

Jet chain(const Jet& a, double f, double df, double d2f) {
  Jet r(f);
  for (int i = 0; i < 2; ++i) {
    r.g[i] = df * a.g[i];
    for (int j = 0; j < 2; ++j) r.h[i][j] = df * a.h[i][j] + d2f * a.g[i] * a.g[j];
  }
  return r;
}

Jet operator+(const Jet& a, const Jet& b) {
  Jet r(a.v + b.v);
  for (int i = 0; i < 2; ++i) {
    r.g[i] = a.g[i] + b.g[i];
    for (int j = 0; j < 2; ++j) r.h[i][j] = a.h[i][j] + b.h[i][j];
  }
  return r;
}
Jet operator-(const Jet& a) { return chain(a, -a.v, -1.0, 0.0); }
Jet operator-(const Jet& a, const Jet& b) { return a + (-b); }
Jet operator*(const Jet& a, const Jet& b) {
  Jet r(a.v * b.v);
  for (int i = 0; i < 2; ++i) {
    r.g[i] = a.v * b.g[i] + b.v * a.g[i];
    for (int j = 0; j < 2; ++j)
      r.h[i][j] = a.v * b.h[i][j] + b.v * a.h[i][j] + a.g[i] * b.g[j] + b.g[i] * a.g[j];
  }
  return r;
}
Jet operator/(const Jet& a, const Jet& b) {
  double x = b.v;
  return a * chain(b, 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x));
}

Jet log(const Jet& a) { return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }
Jet sqrt(const Jet& a) {
  double s = std::sqrt(a.v);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}
using std::log;
using std::sqrt;

bool in_triangle(double lambda, double mu) {
  return lambda > 0.0 && lambda < mu && mu < 1.0;
}

// r/(1-r)² = ν, written without cancellation for small ν.
template <class S>
S solve_r_t(const S& nu) {
  return 2.0 * nu / (1.0 + 2.0 * nu + sqrt(1.0 + 4.0 * nu));
}

template <class S>
S equalized_r_t(const S& lam, const S& mu) {
  S rho = 1.0 + lam - lam / mu;
  return solve_r_t(2.0 * rho * lam * lam * mu * (1.0 - mu));
}

// Logarithm of the quantity being maximized: F_basic for the basic
// objective, t∞ at β = 1 for the equalized one.
template <class S>
S log_objective(Objective o, unsigned n, const S& lam, const S& mu) {
  S tail = log(mu - lam) - log(1.0 - lam);
  if (o == Objective::basic) {
    S rho = 1.0 + lam - lam / mu;
    return log(rho) + 2.0 * log(lam) + 2.0 * log(1.0 - mu) - log(2.0 * mu) + tail;
  }
  S r = equalized_r_t(lam, mu);
  double inv = 1.0 / (n - 2.0);
  return inv * (log(r) + log(1.0 - mu) - 1.0 - (n - 1.0) * log(mu)) + tail;
}

double log_objective_d(Objective o, unsigned n, double lam, double mu) {
  if (!in_triangle(lam, mu)) return kNegInf;
  double v = log_objective<double>(o, n, lam, mu);
  return std::isnan(v) ? kNegInf : v;
}

double reported_value(Objective o, unsigned n, double lam, double mu) {
  double t = std::exp(log_objective_d(o, n, lam, mu));
  return o == Objective::basic ? t : std::numbers::e * t;
}

struct Point {
  double lam, mu;
};

struct Refined {
  Point p;
  std::size_t iterations;
};

// Nelder-Mead on -log objective; deterministic, capped at 10^4 iterations.
Refined nelder_mead(Objective o, unsigned n, Point start, double scale) {
  auto f = [&](const Point& p) { return -log_objective_d(o, n, p.lam, p.mu); };
  std::array<Point, 3> x{start, Point{start.lam + scale, start.mu},
                         Point{start.lam, start.mu + scale}};
  if (!std::isfinite(f(x[1]))) x[1] = Point{start.lam - scale, start.mu};
  if (!std::isfinite(f(x[2]))) x[2] = Point{start.lam, start.mu - scale};
  std::array<double, 3> fx{f(x[0]), f(x[1]), f(x[2])};

  std::size_t it = 0;
  for (; it < 10000; ++it) {
    std::array<int, 3> idx{0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    std::array<Point, 3> xs{x[idx[0]], x[idx[1]], x[idx[2]]};
    std::array<double, 3> fs{fx[idx[0]], fx[idx[1]], fx[idx[2]]};
    x = xs;
    fx = fs;

    double diam = 0.0;
    for (int i = 1; i < 3; ++i)
      diam = std::max(diam, std::hypot(x[i].lam - x[0].lam, x[i].mu - x[0].mu));
    if (diam < 1e-10) break;

    Point c{(x[0].lam + x[1].lam) / 2, (x[0].mu + x[1].mu) / 2};
    auto along = [&](double t) {
      return Point{c.lam + t * (x[2].lam - c.lam), c.mu + t * (x[2].mu - c.mu)};
    };
    Point xr = along(-1.0);
    double fr = f(xr);
    if (fr < fx[0]) {
      Point xe = along(-2.0);
      double fe = f(xe);
      if (fe < fr) {
        x[2] = xe;
        fx[2] = fe;
      } else {
        x[2] = xr;
        fx[2] = fr;
      }
    } else if (fr < fx[1]) {
      x[2] = xr;
      fx[2] = fr;
    } else {
      Point xc = fr < fx[2] ? along(-0.5) : along(0.5);
      double fc = f(xc);
      if (fc < std::min(fr, fx[2])) {
        x[2] = xc;
        fx[2] = fc;
      } else {
        for (int i = 1; i < 3; ++i) {
          x[i] = Point{(x[i].lam + x[0].lam) / 2, (x[i].mu + x[0].mu) / 2};
          fx[i] = f(x[i]);
        }
      }
    }
  }
  int best = static_cast<int>(std::min_element(fx.begin(), fx.end()) - fx.begin());
  return {x[best], it};
}

// Newton iteration on the gradient of the log objective. The simplex leaves
// the optimum accurate to roughly the square root of machine precision in
// the parameters; a few exact-Hessian steps bring it to full precision.
Refined newton_polish(Objective o, unsigned n, Point p) {
  std::size_t steps = 0;
  for (; steps < 50; ++steps) {
    Jet J = log_objective<Jet>(o, n, Jet::variable(p.lam, 0), Jet::variable(p.mu, 1));
    double a = J.h[0][0], b = J.h[0][1], d = J.h[1][1];
    double det = a * d - b * b;
    if (!(det > 0.0) || !(a < 0.0)) break;  // not locally concave
    double dl = -(d * J.g[0] - b * J.g[1]) / det;
    double dm = -(-b * J.g[0] + a * J.g[1]) / det;
    Point q{p.lam + dl, p.mu + dm};
    if (!in_triangle(q.lam, q.mu)) break;
    p = q;
    if (std::hypot(dl, dm) < 1e-15) break;
  }
  return {p, steps};
}

OptResult finish(Objective o, unsigned n, Point p, std::size_t iterations) {
  OptResult res{};
  res.lambda = p.lam;
  res.mu = p.mu;
  res.value = reported_value(o, n, p.lam, p.mu);
  res.iterations = iterations;
  Jet J = log_objective<Jet>(o, n, Jet::variable(p.lam, 0), Jet::variable(p.mu, 1));
  // ∇F = F·∇log F.
  res.grad_norm = res.value * std::hypot(J.g[0], J.g[1]);
  if (o == Objective::basic) {
    res.t_inf = res.value / std::numbers::e;
  } else {
    res.r = equalized_r(p.lam, p.mu);
    res.t_inf = std::exp(J.v);
  }
  return res;
}

OptResult refine(Objective o, unsigned n, Point start, double scale) {
  Refined nm = nelder_mead(o, n, start, scale);
  Refined nt = newton_polish(o, n, nm.p);
  return finish(o, n, nt.p, nm.iterations + nt.iterations);
}

OptResult maximize(Objective o, unsigned n) {
  constexpr int kGrid = 200;
  Point best{0.25, 0.5};
  double best_v = kNegInf;
  for (int i = 1; i < kGrid; ++i) {
    for (int j = 1; j < kGrid; ++j) {
      double lam = static_cast<double>(i) / kGrid, mu = static_cast<double>(j) / kGrid;
      double v = log_objective_d(o, n, lam, mu);
      if (v > best_v) {
        best_v = v;
        best = {lam, mu};
      }
    }
  }
  return refine(o, n, best, 1.0 / kGrid);
}

void require_triangle(double lambda, double mu) {
  if (!in_triangle(lambda, mu))
    throw Error(Errc::domain, "parameters need 0 < lambda < mu < 1");
}

void require_n(unsigned n) {
  if (n < 3) throw Error(Errc::domain, "exponent n must be at least 3");
}

}  // namespace

double F_basic(double lambda, double mu) {
  require_triangle(lambda, mu);
  double rho = 1.0 + lambda - lambda / mu;
  return rho * lambda * lambda * (1.0 - mu) * (1.0 - mu) / (2.0 * mu) * (mu - lambda) /
         (1.0 - lambda);
}

double solve_r(double nu) {
  if (!(nu > 0.0)) throw Error(Errc::domain, "nu must be positive");
  return solve_r_t(nu);
}

double equalized_r(double lambda, double mu) {
  require_triangle(lambda, mu);
  return equalized_r_t(lambda, mu);
}

double F_equalized(double lambda, double mu) {
  double r = equalized_r(lambda, mu);
  return r * (1.0 - mu) / (mu * mu) * (mu - lambda) / (1.0 - lambda);
}

double t_inf_equalized(unsigned n, double lambda, double mu, double beta) {
  require_n(n);
  if (!(beta > 0.0)) throw Error(Errc::domain, "beta must be positive");
  double r = equalized_r(lambda, mu);
  double t0 = std::pow(r * (1.0 - mu) / (std::numbers::e * beta * std::pow(mu, n - 1.0)),
                       1.0 / (n - 2.0));
  return t0 * (mu - lambda) / (1.0 - lambda);
}

double true_radius(unsigned n, double beta) {
  require_n(n);
  if (!(beta > 0.0)) throw Error(Errc::domain, "beta must be positive");
  return std::pow(1.0 / (n * beta), 1.0 / (n - 2.0)) * std::sqrt(1.0 - 2.0 / n);
}

double q_value(unsigned n, double lambda, double mu) {
  return true_radius(n, 1.0) / t_inf_equalized(n, lambda, mu, 1.0);
}

OptResult maximize_basic() { return maximize(Objective::basic, 3); }

OptResult maximize_equalized(unsigned n) {
  require_n(n);
  return maximize(Objective::equalized, n);
}

OptResult maximize_from(Objective objective, unsigned n, double lambda0, double mu0) {
  require_n(n);
  require_triangle(lambda0, mu0);
  return refine(objective, n, {lambda0, mu0}, 0.02);
}

std::vector<QRow> q_table(const std::vector<unsigned>& ns) {
  for (unsigned n : ns) require_n(n);
  std::vector<std::future<QRow>> jobs;
  jobs.reserve(ns.size());
  for (unsigned n : ns) {
    jobs.push_back(std::async(std::launch::async, [n] {
      OptResult opt = maximize_equalized(n);
      double R = true_radius(n, 1.0);
      return QRow{n, opt.lambda, opt.mu, R / opt.t_inf, R, opt.t_inf};
    }));
  }
  std::vector<QRow> rows;
  rows.reserve(ns.size());
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

std::vector<GridPoint> plot_grid(Objective objective, unsigned resolution) {
  if (resolution < 2) throw Error(Errc::domain, "grid resolution must be at least 2");
  std::vector<GridPoint> out;
  out.reserve(static_cast<std::size_t>(resolution) * resolution);
  for (unsigned i = 1; i <= resolution; ++i) {
    double lam = static_cast<double>(i) / (resolution + 1);
    for (unsigned j = 1; j <= resolution; ++j) {
      double mu = static_cast<double>(j) / (resolution + 1);
      GridPoint g{lam, mu, std::nullopt};
      if (in_triangle(lam, mu))
        g.value = objective == Objective::basic ? F_basic(lam, mu) : F_equalized(lam, mu);
      out.push_back(g);
    }
  }
  return out;
}

double radius_oracle_series(unsigned n, const Rational& beta, std::size_t terms) {
  require_n(n);
  if (sgn(beta) <= 0) throw Error(Errc::domain, "beta must be positive");
  if (terms < 50)
    throw Error(Errc::inconclusive, "radius estimate needs at least 50 terms, got " +
                                        std::to_string(terms));
  TruncSeries inner = add(TruncSeries::constant(1, terms),
                          TruncSeries::monomial(2 * beta, n - 2, terms));
  TruncSeries f = mul(TruncSeries::identity(terms), binomial_pow(inner, Rational(1, 2)))
                      .truncated(terms);
  TruncSeries psi = invert(f);

  // Least squares for -log|a_m| ≈ A·m + B·log m + D over the upper half.
  std::array<std::array<double, 3>, 3> M{};
  std::array<double, 3> rhs{};
  std::size_t used = 0;
  for (std::size_t m = terms / 2; m <= terms; ++m) {
    const Rational& a = psi.coeffs()[m];
    if (sgn(a) == 0) continue;
    std::array<double, 3> row{static_cast<double>(m), std::log(static_cast<double>(m)), 1.0};
    double y = -log_abs(a);
    for (int i = 0; i < 3; ++i) {
      rhs[i] += row[i] * y;
      for (int j = 0; j < 3; ++j) M[i][j] += row[i] * row[j];
    }
    ++used;
  }
  if (used < 6)
    throw Error(Errc::inconclusive, "too few nonzero coefficients to estimate the radius");

  // Gaussian elimination with partial pivoting on the 3×3 normal equations.
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::fabs(M[r][c]) > std::fabs(M[piv][c])) piv = r;
    std::swap(M[c], M[piv]);
    std::swap(rhs[c], rhs[piv]);
    for (int r = c + 1; r < 3; ++r) {
      double factor = M[r][c] / M[c][c];
      for (int k = c; k < 3; ++k) M[r][k] -= factor * M[c][k];
      rhs[r] -= factor * rhs[c];
    }
  }
  std::array<double, 3> sol{};
  for (int c = 2; c >= 0; --c) {
    double acc = rhs[c];
    for (int k = c + 1; k < 3; ++k) acc -= M[c][k] * sol[k];
    sol[c] = acc / M[c][c];
  }
  return std::exp(sol[0]);
}

}  // namespace kolmo
