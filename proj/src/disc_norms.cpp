#include "kolmo/disc_norms.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "kolmo/error.hpp"

namespace kolmo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// |q|·t^n, through logarithms when q itself does not fit in a double.
double abs_term(const Rational& q, std::size_t n, double t) {
  double d = std::fabs(to_double(q));
  if (std::isfinite(d) && std::isnormal(d)) return d * std::pow(t, static_cast<double>(n));
  return std::exp(log_abs(q) + static_cast<double>(n) * std::log(t));
}

double self_power(double x) { return x == 0.0 ? 1.0 : std::pow(x, x); }

void require_positive(double t, const char* what) {
  if (!(t > 0.0)) throw Error(Errc::domain, std::string(what) + " must be positive");
}

}  // namespace

bool leq_within_slack(double lhs, double rhs) noexcept {
  return lhs <= rhs + std::fabs(rhs) * 0x1p-38;
}

MajorantValue majorant_norm(const TruncSeries& f, double t) {
  require_positive(t, "radius");
  double sum = 0.0;
  auto c = f.coeffs();
  for (std::size_t n = 0; n < c.size(); ++n)
    if (sgn(c[n]) != 0) sum += abs_term(c[n], n, t);
  return {sum * kUpwardSlack, t};
}

bool nagumo_check(const TruncSeries& f, unsigned k, double t, double s) {
  require_positive(s, "inner radius");
  if (s >= t) throw Error(Errc::domain, "need s < t for the Cauchy-Nagumo estimate");
  TruncSeries dk = f;
  double factorial = 1.0;
  for (unsigned i = 1; i <= k; ++i) {
    dk = derivative(dk);
    factorial *= i;
  }
  double lhs = majorant_norm(dk, s).value;
  double rhs = factorial / std::pow(t - s, k) * majorant_norm(f, t).value;
  return leq_within_slack(lhs, rhs);
}

double order_filtration_norm(const TruncSeries& f, double k, double t) {
  require_positive(t, "radius");
  if (k < 0.0) throw Error(Errc::domain, "filtration order must be nonnegative");
  std::size_t m = f.order();
  if (m == kInfiniteOrder) return 0.0;
  if (static_cast<double>(m) < k)
    throw Error(Errc::infinite_norm, "leading order " + std::to_string(m) +
                                         " is below filtration order " + std::to_string(k));
  double sum = 0.0;
  auto c = f.coeffs();
  for (std::size_t n = m; n < c.size(); ++n) {
    if (sgn(c[n]) == 0) continue;
    double d = std::fabs(to_double(c[n]));
    double shift = static_cast<double>(n) - k;
    if (std::isfinite(d) && std::isnormal(d))
      sum += d * std::pow(t, shift);
    else
      sum += std::exp(log_abs(c[n]) + shift * std::log(t));
  }
  return sum * kUpwardSlack;
}

LocalOpBound compose_local_bounds(const LocalOpBound& outer, const LocalOpBound& inner) {
  double l = outer.l + inner.l;
  double factor = self_power(l) / (self_power(outer.l) * self_power(inner.l));
  return {factor * outer.C * inner.C, outer.k + inner.k, l};
}

double calibrate(const LocalOpBound& b) {
  if (b.l == 0.0) return b.C;
  return std::pow(std::numbers::e / b.l, b.l) * b.C;
}

LocalOpBound power_bound(const LocalOpBound& b, unsigned n) {
  if (n == 0) throw Error(Errc::domain, "power must be at least 1");
  LocalOpBound acc = b;
  for (unsigned i = 1; i < n; ++i) acc = compose_local_bounds(b, acc);
  return acc;
}

LocalOpBound hilbert_evaluation_bound(unsigned dim) {
  return {1.0 / std::sqrt(std::pow(std::numbers::pi, dim)), 0.0, static_cast<double>(dim)};
}

BorelMajorant BorelMajorant::polynomial(TruncSeries coeffs) {
  for (const auto& c : coeffs.coeffs())
    if (sgn(c) < 0) throw Error(Errc::domain, "a majorant needs nonnegative coefficients");
  BorelMajorant b(Shape::polynomial);
  b.poly_ = std::move(coeffs);
  return b;
}

double borel_bound(const BorelMajorant& f, double x) {
  if (x < 0.0) throw Error(Errc::domain, "Borel argument must be nonnegative");
  if (f.shape_ == BorelMajorant::Shape::polynomial) {
    if (x == 0.0) return to_double(f.poly_->coeffs()[0]) * kUpwardSlack;
    return majorant_norm(*f.poly_, x).value;
  }
  if (x >= 1.0)
    throw Error(Errc::divergence, "majorant series diverges at x = " + std::to_string(x));
  double v = 0.0;
  switch (f.shape_) {
    case BorelMajorant::Shape::geometric: v = 1.0 / (1.0 - x); break;
    case BorelMajorant::Shape::linear_rational: v = x / (1.0 - x); break;
    case BorelMajorant::Shape::quadratic_rational: v = x * x / ((1.0 - x) * (1.0 - x)); break;
    case BorelMajorant::Shape::polynomial: break;
  }
  return v * kUpwardSlack;
}

double borel_bound(const TruncSeries& fmaj, double x) {
  return borel_bound(BorelMajorant::polynomial(fmaj), x);
}

WeightSequence WeightSequence::geometric(double c0, double ratio, double e0, double step) {
  if (!(c0 > 0.0) || !(ratio > 0.0) || e0 < 0.0 || step < 0.0)
    throw Error(Errc::domain, "weights need positive coefficients and nonnegative exponents");
  WeightSequence w;
  w.kind_ = Kind::geometric;
  w.c0_ = c0;
  w.ratio_ = ratio;
  w.e0_ = e0;
  w.step_ = step;
  return w;
}

WeightSequence WeightSequence::hilbert() {
  WeightSequence w;
  w.kind_ = Kind::hilbert;
  return w;
}

WeightSequence WeightSequence::tabulated(std::vector<std::pair<double, double>> coeff_exponent) {
  for (const auto& [c, e] : coeff_exponent)
    if (!(c > 0.0) || e < 0.0)
      throw Error(Errc::domain, "weights need positive coefficients and nonnegative exponents");
  WeightSequence w;
  w.kind_ = Kind::tabulated;
  w.table_ = std::move(coeff_exponent);
  return w;
}

std::optional<std::size_t> WeightSequence::length() const {
  if (kind_ == Kind::tabulated) return table_.size();
  return std::nullopt;
}

double WeightSequence::coefficient(std::size_t i) const {
  switch (kind_) {
    case Kind::geometric: return c0_ * std::pow(ratio_, static_cast<double>(i));
    case Kind::hilbert: return std::sqrt(std::numbers::pi / static_cast<double>(i + 1));
    case Kind::tabulated: return table_.at(i).first;
  }
  return 0.0;
}

double WeightSequence::exponent(std::size_t i) const {
  switch (kind_) {
    case Kind::geometric: return e0_ + step_ * static_cast<double>(i);
    case Kind::hilbert: return static_cast<double>(i + 1);
    case Kind::tabulated: return table_.at(i).second;
  }
  return 0.0;
}

double WeightSequence::operator()(std::size_t i, double s) const {
  return coefficient(i) * std::pow(s, exponent(i));
}

WeightSequence::Tail WeightSequence::tail_from(std::size_t K) const {
  switch (kind_) {
    case Kind::geometric: return {ratio_, ratio_, step_};
    case Kind::hilbert: {
      double lo = std::sqrt(static_cast<double>(K + 1) / static_cast<double>(K + 2));
      return {lo, 1.0, 1.0};
    }
    case Kind::tabulated: break;
  }
  throw Error(Errc::inconclusive, "tabulated weights have no tail description");
}

namespace {

double log_term(const WeightSequence& lam, const WeightSequence& mu, double p, std::size_t i,
                double s, double t) {
  return p * (std::log(mu.coefficient(i)) + mu.exponent(i) * std::log(s) -
              std::log(lam.coefficient(i)) - lam.exponent(i) * std::log(t));
}

struct SumResult {
  double value;
  std::optional<std::size_t> truncated_at;
};

SumResult weighted_sum(const WeightSequence& lam, const WeightSequence& mu, double p, double s,
                       double t) {
  using Kind = WeightSequence::Kind;
  if (lam.kind() == Kind::tabulated || mu.kind() == Kind::tabulated) {
    std::size_t n = std::min(lam.length().value_or(kInfiniteOrder),
                             mu.length().value_or(kInfiniteOrder));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += std::exp(log_term(lam, mu, p, i, s, t));
    return {sum, n};
  }

  auto ml = mu.tail_from(0), ll = lam.tail_from(0);
  if (lam.kind() == Kind::geometric && mu.kind() == Kind::geometric) {
    double q = std::pow(ml.ratio_hi / ll.ratio_lo * std::pow(s, ml.exponent_step) /
                            std::pow(t, ll.exponent_step),
                        p);
    if (q >= 1.0) return {kInf, std::nullopt};
    return {std::exp(log_term(lam, mu, p, 0, s, t)) / (1.0 - q), std::nullopt};
  }

  // Sum K terms explicitly, then bound the rest by a geometric series whose
  // ratio dominates every later term ratio.
  double sum = 0.0;
  std::size_t done = 0;
  for (std::size_t K = 64; K <= (std::size_t{1} << 20); K *= 2) {
    for (; done < K; ++done) sum += std::exp(log_term(lam, mu, p, done, s, t));
    auto mt = mu.tail_from(K), lt = lam.tail_from(K);
    double q = std::pow(mt.ratio_hi / lt.ratio_lo * std::pow(s, mt.exponent_step) /
                            std::pow(t, lt.exponent_step),
                        p);
    if (q < 1.0) {
      double next = std::exp(log_term(lam, mu, p, K, s, t));
      return {sum + next / (1.0 - q), std::nullopt};
    }
  }
  throw Error(Errc::inconclusive,
              "no geometric tail bound for the weighted sum at s = " + std::to_string(s) +
                  ", t = " + std::to_string(t));
}

}  // namespace

LambdaPReport lambda_p_check(const WeightSequence& lam, const WeightSequence& mu, double p,
                             double alpha, double C,
                             const std::vector<std::pair<double, double>>& grid) {
  if (p < 1.0) throw Error(Errc::domain, "exponent p must be at least 1");
  LambdaPReport report{true, std::nullopt, 0.0};
  for (const auto& [s, t] : grid) {
    if (!(s > 0.0) || !(s < t)) throw Error(Errc::domain, "grid points need 0 < s < t");
    SumResult r = weighted_sum(lam, mu, p, s, t);
    double rhs = C / std::pow(t - s, alpha);
    if (r.truncated_at) report.truncated_at = r.truncated_at;
    report.worst_ratio = std::max(report.worst_ratio, r.value / rhs);
    if (!leq_within_slack(r.value, rhs)) report.holds = false;
  }
  return report;
}

double hilbert_weight(const std::vector<unsigned>& I, double s, unsigned dim) {
  require_positive(s, "radius");
  if (I.size() != dim) throw Error(Errc::domain, "multi-index length must equal the dimension");
  double c = 1.0;
  double total = dim;
  for (unsigned i : I) {
    c *= std::numbers::pi / (i + 1.0);
    total += i;
  }
  return std::sqrt(c) * std::pow(s, total);
}

double division_bound(unsigned d, double t) {
  require_positive(t, "radius");
  return std::pow(t, -static_cast<double>(d));
}

}  // namespace kolmo
