#pragma once

#include <cstdint>
#include <string>

namespace consensus {

/// Formats numerator/denominator as a decimal with exactly `digits`
/// fractional digits, rounding half to even. Computed on the exact ratio,
/// so the result never depends on binary floating point.
/// Requires denominator > 0 and numerator >= 0.
std::string format_ratio(std::int64_t numerator, std::int64_t denominator, int digits = 6);

/// Same rounding rule applied to a double (used for simulation tables).
std::string format_fixed(double value, int digits = 6);

}  // namespace consensus
