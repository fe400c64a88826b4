#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kolmo {

enum class Errc {
  domain,
  composition_domain,
  not_invertible,
  non_terminating_exponential,
  insufficient_truncation,
  infinite_norm,
  inconclusive,
  divergence,
  degenerate_set,
  unsupported_shape,
  leaves_domain,
  nonpositive_limit,
  certificate_breach,
  parse,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above, so
/// callers (and the CLI exit-code mapping) can branch on the kind.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace kolmo
