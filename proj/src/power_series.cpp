#include "kolmo/power_series.hpp"

#include <algorithm>
#include <sstream>

#include "kolmo/error.hpp"

namespace kolmo {

namespace {

std::size_t sat_add(std::size_t a, std::size_t b) {
  if (a == kInfiniteOrder || b == kInfiniteOrder) return kInfiniteOrder;
  return a > kInfiniteOrder - b ? kInfiniteOrder : a + b;
}

std::size_t sat_mul(std::size_t a, std::size_t b) {
  if (a == 0 || b == 0) return 0;
  if (a == kInfiniteOrder || b == kInfiniteOrder) return kInfiniteOrder;
  return a > kInfiniteOrder / b ? kInfiniteOrder : a * b;
}

std::vector<std::size_t> support(std::span<const Rational> c, std::size_t limit) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < c.size() && i <= limit; ++i)
    if (sgn(c[i]) != 0) idx.push_back(i);
  return idx;
}

// Cauchy product of the stored coefficients, kept up to z^T. Missing
// coefficients are read as zero; the caller decides what T is certified.
std::vector<Rational> product_upto(std::span<const Rational> a, std::span<const Rational> b,
                                   std::size_t T) {
  std::vector<Rational> out(T + 1);
  auto ia = support(a, T);
  auto ib = support(b, T);
  Rational tmp;
  for (std::size_t i : ia) {
    for (std::size_t j : ib) {
      if (i + j > T) break;
      mpq_mul(tmp.get_mpq_t(), a[i].get_mpq_t(), b[j].get_mpq_t());
      mpq_add(out[i + j].get_mpq_t(), out[i + j].get_mpq_t(), tmp.get_mpq_t());
    }
  }
  return out;
}

}  // namespace

TruncSeries::TruncSeries(std::size_t trunc_order) : coeffs_(trunc_order + 1) {}

TruncSeries::TruncSeries(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw Error(Errc::domain, "a truncated series needs at least one coefficient");
  for (auto& c : coeffs_) c.canonicalize();
}

TruncSeries::TruncSeries(std::vector<Rational> coeffs, std::size_t trunc_order)
    : coeffs_(std::move(coeffs)) {
  coeffs_.resize(trunc_order + 1);
  for (auto& c : coeffs_) c.canonicalize();
}

TruncSeries TruncSeries::constant(const Rational& c, std::size_t trunc_order) {
  return monomial(c, 0, trunc_order);
}

TruncSeries TruncSeries::monomial(const Rational& c, std::size_t power, std::size_t trunc_order) {
  TruncSeries s(trunc_order);
  if (power <= trunc_order) s.coeffs_[power] = c;
  return s;
}

TruncSeries TruncSeries::identity(std::size_t trunc_order) { return monomial(1, 1, trunc_order); }

TruncSeries TruncSeries::geometric(std::size_t trunc_order) {
  return TruncSeries(std::vector<Rational>(trunc_order + 1, Rational(1)));
}

const Rational& TruncSeries::operator[](std::size_t k) const {
  if (k >= coeffs_.size())
    throw Error(Errc::insufficient_truncation,
                "coefficient " + std::to_string(k) + " beyond truncation order " +
                    std::to_string(trunc_order()));
  return coeffs_[k];
}

std::size_t TruncSeries::order() const noexcept {
  for (std::size_t i = 0; i < coeffs_.size(); ++i)
    if (sgn(coeffs_[i]) != 0) return i;
  return kInfiniteOrder;
}

TruncSeries TruncSeries::truncated(std::size_t n) const {
  if (n > trunc_order())
    throw Error(Errc::insufficient_truncation,
                "cannot extend a series known to order " + std::to_string(trunc_order()) +
                    " up to " + std::to_string(n));
  return TruncSeries(std::vector<Rational>(coeffs_.begin(), coeffs_.begin() + n + 1));
}

std::string TruncSeries::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    const Rational& c = coeffs_[k];
    if (sgn(c) == 0) continue;
    Rational mag = abs(c);
    if (first) {
      if (sgn(c) < 0) os << "-";
    } else {
      os << (sgn(c) < 0 ? " - " : " + ");
    }
    first = false;
    bool unit = mag == 1;
    if (k == 0 || !unit) os << to_fraction_string(mag);
    if (k > 0) {
      if (!unit) os << "*";
      os << "z";
      if (k > 1) os << "^" << k;
    }
  }
  if (first) os << "0";
  os << " + O(z^" << coeffs_.size() << ")";
  return os.str();
}

bool operator==(const TruncSeries& f, const TruncSeries& g) {
  std::size_t n = std::min(f.trunc_order(), g.trunc_order());
  for (std::size_t k = 0; k <= n; ++k)
    if (f.coeffs()[k] != g.coeffs()[k]) return false;
  return true;
}

TruncSeries add(const TruncSeries& f, const TruncSeries& g) {
  std::size_t n = std::min(f.trunc_order(), g.trunc_order());
  std::vector<Rational> c(n + 1);
  for (std::size_t k = 0; k <= n; ++k) c[k] = f.coeffs()[k] + g.coeffs()[k];
  return TruncSeries(std::move(c));
}

TruncSeries sub(const TruncSeries& f, const TruncSeries& g) {
  std::size_t n = std::min(f.trunc_order(), g.trunc_order());
  std::vector<Rational> c(n + 1);
  for (std::size_t k = 0; k <= n; ++k) c[k] = f.coeffs()[k] - g.coeffs()[k];
  return TruncSeries(std::move(c));
}

TruncSeries negate(const TruncSeries& f) { return scale(f, Rational(-1)); }

TruncSeries scale(const TruncSeries& f, const Rational& c) {
  std::vector<Rational> out(f.coeffs().begin(), f.coeffs().end());
  for (auto& x : out) x *= c;
  return TruncSeries(std::move(out));
}

TruncSeries mul(const TruncSeries& f, const TruncSeries& g) {
  // An unknown tail O(z^{N_f+1}) of f only meets g from its leading order on.
  std::size_t T = std::min(sat_add(f.trunc_order(), g.order()), sat_add(g.trunc_order(), f.order()));
  if (T == kInfiniteOrder) T = std::max(f.trunc_order(), g.trunc_order());
  return TruncSeries(product_upto(f.coeffs(), g.coeffs(), T));
}

TruncSeries compose(const TruncSeries& f, const TruncSeries& g) {
  if (sgn(g.coeffs()[0]) != 0)
    throw Error(Errc::composition_domain,
                "inner series has constant term " + to_fraction_string(g.coeffs()[0]));
  // A series known to order N_g with no visible terms still vanishes to
  // order N_g + 1, which is all that matters for the error terms below.
  std::size_t og = std::min(g.order(), g.trunc_order() + 1);
  std::size_t m = kInfiniteOrder;
  for (std::size_t k = 1; k <= f.trunc_order(); ++k)
    if (sgn(f.coeffs()[k]) != 0) { m = k; break; }

  std::size_t from_f_tail = sat_mul(f.trunc_order() + 1, og) - 1;
  std::size_t from_g_tail =
      m == kInfiniteOrder ? kInfiniteOrder : sat_add(g.trunc_order(), sat_mul(m - 1, og));
  std::size_t T = std::min(from_f_tail, from_g_tail);

  std::vector<Rational> acc(T + 1);
  std::span<const Rational> gc = g.coeffs();
  for (std::size_t i = f.trunc_order() + 1; i-- > 0;) {
    if (i != f.trunc_order()) acc = product_upto(acc, gc, T);
    acc[0] += f.coeffs()[i];
  }
  return TruncSeries(std::move(acc));
}

TruncSeries invert(const TruncSeries& f) {
  std::size_t N = f.trunc_order();
  if (N < 1 || sgn(f.coeffs()[0]) != 0 || sgn(f.coeffs()[1]) == 0)
    throw Error(Errc::not_invertible, "need f(0) = 0 and f'(0) != 0, got " + f.to_string());

  // Solve [z^m] Σ_k f_k g^k = 0 for m >= 2 one coefficient at a time. pw[k]
  // holds the coefficients of g^k found so far.
  std::span<const Rational> fc = f.coeffs();
  std::vector<Rational> g(N + 1);
  g[1] = 1 / fc[1];
  std::vector<std::vector<Rational>> pw(N + 1, std::vector<Rational>(N + 1));
  pw[1][1] = g[1];
  Rational tmp;
  for (std::size_t m = 2; m <= N; ++m) {
    Rational acc;
    for (std::size_t k = 2; k <= m; ++k) {
      Rational& slot = pw[k][m];
      for (std::size_t j = k - 1; j <= m - 1; ++j) {
        if (sgn(pw[k - 1][j]) == 0 || sgn(g[m - j]) == 0) continue;
        mpq_mul(tmp.get_mpq_t(), pw[k - 1][j].get_mpq_t(), g[m - j].get_mpq_t());
        mpq_add(slot.get_mpq_t(), slot.get_mpq_t(), tmp.get_mpq_t());
      }
      if (sgn(fc[k]) != 0 && sgn(slot) != 0) {
        mpq_mul(tmp.get_mpq_t(), fc[k].get_mpq_t(), slot.get_mpq_t());
        mpq_add(acc.get_mpq_t(), acc.get_mpq_t(), tmp.get_mpq_t());
      }
    }
    g[m] = -acc / fc[1];
    pw[1][m] = g[m];
  }
  return TruncSeries(std::move(g));
}

TruncSeries binomial_pow(const TruncSeries& f, const Rational& e) {
  if (f.coeffs()[0] != 1)
    throw Error(Errc::domain,
                "binomial power needs constant term 1, got " + to_fraction_string(f.coeffs()[0]));
  // k·P_k = Σ_{j=1..k} ((e+1)j - k) f_j P_{k-j}, from f·P' = e·f'·P.
  std::size_t N = f.trunc_order();
  std::span<const Rational> fc = f.coeffs();
  std::vector<Rational> P(N + 1);
  P[0] = 1;
  Rational ep1 = e + 1;
  Rational tmp, w;
  for (std::size_t k = 1; k <= N; ++k) {
    Rational acc;
    for (std::size_t j = 1; j <= k; ++j) {
      if (sgn(fc[j]) == 0 || sgn(P[k - j]) == 0) continue;
      w = ep1 * static_cast<long>(j) - static_cast<long>(k);
      mpq_mul(tmp.get_mpq_t(), w.get_mpq_t(), fc[j].get_mpq_t());
      mpq_mul(tmp.get_mpq_t(), tmp.get_mpq_t(), P[k - j].get_mpq_t());
      mpq_add(acc.get_mpq_t(), acc.get_mpq_t(), tmp.get_mpq_t());
    }
    P[k] = acc / static_cast<long>(k);
  }
  return TruncSeries(std::move(P));
}

TruncSeries binomial_series(const Rational& e, std::size_t trunc_order) {
  std::vector<Rational> c(trunc_order + 1);
  c[0] = 1;
  for (std::size_t k = 1; k <= trunc_order; ++k)
    c[k] = c[k - 1] * (e - static_cast<long>(k - 1)) / static_cast<long>(k);
  return TruncSeries(std::move(c));
}

TruncSeries derivative(const TruncSeries& f) {
  std::size_t N = f.trunc_order();
  // Nothing is known about f' when f is only known modulo z; report the
  // zero series at order 0 rather than an empty one.
  if (N == 0) return TruncSeries(std::size_t{0});
  std::vector<Rational> c(N);
  for (std::size_t k = 1; k <= N; ++k) c[k - 1] = f.coeffs()[k] * static_cast<long>(k);
  return TruncSeries(std::move(c));
}

TruncSeries apply_derivation(const Derivation& v, const TruncSeries& f) {
  return mul(v.coefficient(), derivative(f));
}

TruncSeries lie_exp(const Derivation& v, const TruncSeries& f, int sign) {
  if (sign != 1 && sign != -1) throw Error(Errc::domain, "sign must be +1 or -1");
  if (v.order() == kInfiniteOrder) return f;
  if (v.order() <= 1)
    throw Error(Errc::non_terminating_exponential,
                "derivation of order " + std::to_string(v.order()) + " does not raise order");

  // Each term is v applied to the previous one, divided by k. The certified
  // truncation of the sum is the smallest among the terms, and terms whose
  // order exceeds it contribute nothing.
  std::vector<Rational> acc(f.coeffs().begin(), f.coeffs().end());
  std::size_t T = f.trunc_order();
  TruncSeries term = f;
  for (long k = 1;; ++k) {
    term = apply_derivation(v, term);
    T = std::min(T, term.trunc_order());
    if (term.order() > T) break;
    Rational factor(sign, k);
    factor.canonicalize();
    term = scale(term, factor);
    for (std::size_t i = term.order(); i <= T; ++i) acc[i] += term.coeffs()[i];
  }
  acc.resize(T + 1);
  return TruncSeries(std::move(acc));
}

Derivation j_map(const TruncSeries& b) {
  std::size_t N = b.trunc_order();
  if (N == 0) return Derivation(TruncSeries(std::size_t{0}));
  return Derivation(TruncSeries(std::vector<Rational>(b.coeffs().begin() + 1, b.coeffs().end())));
}

TruncSeries hadamard(const TruncSeries& f, const TruncSeries& g) {
  std::size_t n = std::min(f.trunc_order(), g.trunc_order());
  std::vector<Rational> c(n + 1);
  for (std::size_t k = 0; k <= n; ++k) c[k] = f.coeffs()[k] * g.coeffs()[k];
  return TruncSeries(std::move(c));
}

TruncSeries nabla(const TruncSeries& f) {
  std::vector<Rational> c(f.coeffs().begin(), f.coeffs().end());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= static_cast<long>(k);
  return TruncSeries(std::move(c));
}

MonomialDivision weierstrass_div_monomial(const TruncSeries& f, std::size_t d) {
  std::size_t N = f.trunc_order();
  if (d > N)
    throw Error(Errc::insufficient_truncation,
                "division by z^" + std::to_string(d) + " needs truncation order at least " +
                    std::to_string(d) + ", have " + std::to_string(N));
  TruncSeries q(std::vector<Rational>(f.coeffs().begin() + d, f.coeffs().end()));
  TruncSeries p(std::vector<Rational>(f.coeffs().begin(), f.coeffs().begin() + d), N);
  return {std::move(q), std::move(p)};
}

}  // namespace kolmo
