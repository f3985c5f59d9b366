#include "consensus/decimal.hpp"
#include "wide_int.hpp"

#include <fmt/format.h>

#include <cmath>
#include <stdexcept>

namespace consensus {

std::string format_ratio(std::int64_t numerator, std::int64_t denominator, int digits) {
  if (denominator <= 0 || numerator < 0 || digits < 0 || digits > 18) {
    throw std::invalid_argument("format_ratio: need numerator >= 0, denominator > 0");
  }
  Int128 scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;

  const Int128 scaled = static_cast<Int128>(numerator) * scale;
  Int128 q = scaled / denominator;
  const Int128 r = scaled % denominator;
  const Int128 twice = 2 * r;
  if (twice > denominator || (twice == denominator && (q % 2) != 0)) ++q;

  const auto whole = static_cast<unsigned long long>(q / scale);
  const auto frac = static_cast<unsigned long long>(q % scale);
  if (digits == 0) return fmt::format("{}", whole);
  return fmt::format("{}.{:0{}}", whole, frac, digits);
}

std::string format_fixed(double value, int digits) {
  if (!std::isfinite(value)) return fmt::format("{}", value);
  return fmt::format("{:.{}f}", value, digits);
}

}  // namespace consensus
