#pragma once

// Seeded random inputs for property tests. Every suite builds its own
// generator from a fixed seed so failures reproduce exactly.

#include <cstdint>
#include <random>
#include <vector>

#include "kolmo/disc_norms.hpp"
#include "kolmo/power_series.hpp"

namespace kolmo::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  /// p/q with |p| <= max_num, 1 <= q <= max_den.
  Rational rational(long max_num, long max_den) {
    Rational q(integer(-max_num, max_num), integer(1, max_den));
    q.canonicalize();
    return q;
  }

  Rational positive_rational(long max_num, long max_den) {
    Rational q(integer(1, max_num), integer(1, max_den));
    q.canonicalize();
    return q;
  }

  /// Random series known to order N whose coefficients below `min_order`
  /// vanish; about a third of the other coefficients are zero.
  TruncSeries series(std::size_t N, std::size_t min_order = 0, long max_num = 5, long max_den = 4) {
    std::vector<Rational> c(N + 1);
    for (std::size_t k = min_order; k <= N; ++k)
      if (integer(0, 2) != 0) c[k] = rational(max_num, max_den);
    return TruncSeries(std::move(c));
  }

  /// f(0) = 0, f'(0) = 1.
  TruncSeries tangent_to_identity(std::size_t N) {
    TruncSeries g = series(N, 2);
    return add(TruncSeries::identity(N), g);
  }

  LocalOpBound bound() {
    return {uniform(0.01, 10.0), static_cast<double>(integer(0, 3)),
            static_cast<double>(integer(0, 3))};
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace kolmo::testing
