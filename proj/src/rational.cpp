#include "kolmo/rational.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <string>

#include "kolmo/error.hpp"

namespace kolmo {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::domain: return "domain error";
    case Errc::composition_domain: return "composition-domain error";
    case Errc::not_invertible: return "not-invertible error";
    case Errc::non_terminating_exponential: return "non-terminating-exponential error";
    case Errc::insufficient_truncation: return "insufficient-truncation error";
    case Errc::infinite_norm: return "infinite-norm error";
    case Errc::inconclusive: return "inconclusive";
    case Errc::divergence: return "divergence error";
    case Errc::degenerate_set: return "degenerate-set error";
    case Errc::unsupported_shape: return "unsupported-shape error";
    case Errc::leaves_domain: return "leaves-domain error";
    case Errc::nonpositive_limit: return "nonpositive-limit error";
    case Errc::certificate_breach: return "certificate-breach error";
    case Errc::parse: return "parse error";
  }
  return "error";
}

std::string to_fraction_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

namespace {

Rational parse_decimal(std::string_view text) {
  std::string s(text);
  std::size_t pos = 0;
  bool negative = false;
  if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) negative = s[pos++] == '-';

  std::string digits;
  long scale = 0;
  bool seen_point = false;
  bool any_digit = false;
  for (; pos < s.size(); ++pos) {
    char c = s[pos];
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
      any_digit = true;
      if (seen_point) ++scale;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any_digit) throw Error(Errc::parse, "not a number: '" + s + "'");

  long exponent = 0;
  if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
    ++pos;
    std::string exp_text = s.substr(pos);
    char* end = nullptr;
    exponent = std::strtol(exp_text.c_str(), &end, 10);
    if (exp_text.empty() || *end != '\0') throw Error(Errc::parse, "bad exponent in '" + s + "'");
    pos = s.size();
  }
  if (pos != s.size()) throw Error(Errc::parse, "trailing characters in '" + s + "'");

  mpz_class mantissa(digits.empty() ? std::string("0") : digits, 10);
  Rational value(mantissa);
  value *= pow_int(Rational(10), exponent - scale);
  if (negative) value = -value;
  return value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_decimal(text);
  Rational num = parse_decimal(text.substr(0, slash));
  Rational den = parse_decimal(text.substr(slash + 1));
  if (den == 0) throw Error(Errc::parse, "zero denominator in '" + std::string(text) + "'");
  Rational q = num / den;
  q.canonicalize();
  return q;
}

Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw Error(Errc::domain, "non-finite value has no rational form");
  return Rational(x);
}

Rational pow_int(const Rational& base, long exponent) {
  if (exponent == 0) return Rational(1);
  if (base == 0) {
    if (exponent < 0) throw Error(Errc::domain, "negative power of zero");
    return Rational(0);
  }
  unsigned long e = static_cast<unsigned long>(exponent < 0 ? -exponent : exponent);
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), e);
  Rational out = exponent > 0 ? Rational(num, den) : Rational(den, num);
  out.canonicalize();
  return out;
}

double to_double(const Rational& q) {
  // get_d truncates toward zero; step one ulp outward when that is closer.
  double d = q.get_d();
  if (!std::isfinite(d) || Rational(d) == q) return d;
  double away = std::nextafter(d, sgn(q) > 0 ? INFINITY : -INFINITY);
  if (!std::isfinite(away)) return d;
  Rational below_gap = abs(q - Rational(d));
  Rational above_gap = abs(Rational(away) - q);
  if (above_gap < below_gap) return away;
  if (below_gap < above_gap) return d;
  std::uint64_t bits = 0;
  std::memcpy(&bits, &d, sizeof bits);
  return (bits & 1u) == 0 ? d : away;
}

double log_abs(const Rational& q) {
  if (q == 0) return -INFINITY;
  auto log_mpz = [](const mpz_class& z) {
    long exp2 = 0;
    double mant = mpz_get_d_2exp(&exp2, z.get_mpz_t());
    return std::log(std::fabs(mant)) + static_cast<double>(exp2) * std::log(2.0);
  };
  return log_mpz(q.get_num()) - log_mpz(q.get_den());
}

bool is_integer(const Rational& q) { return q.get_den() == 1; }

}  // namespace kolmo
