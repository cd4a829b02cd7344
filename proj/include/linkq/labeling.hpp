#pragma once

#include <string>

#include "linkq/error.hpp"
#include "linkq/link_class.hpp"

namespace linkq {

inline constexpr double kBadPrrMax = 0.1;
inline constexpr double kGoodPrrMin = 0.9;

/// PRR-to-class rule: bad when PRR <= 0.1, good when PRR >= 0.9, otherwise
/// intermediate. Both boundaries are inclusive.
inline LinkClass label_of(double prr) {
  if (!(prr >= 0.0 && prr <= 1.0))
    throw DomainError("label_of: PRR " + std::to_string(prr) + " outside [0, 1]");
  if (prr <= kBadPrrMax) return LinkClass::bad;
  if (prr >= kGoodPrrMin) return LinkClass::good;
  return LinkClass::intermediate;
}

}  // namespace linkq
