#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace linkq {

/// Link quality class. The enumerator order (bad < intermediate < good) is
/// the fixed order of every per-class array in this library.
enum class LinkClass : std::uint8_t { bad = 0, intermediate = 1, good = 2 };

inline constexpr std::size_t kNumClasses = 3;

inline constexpr std::array<LinkClass, kNumClasses> kAllClasses = {
    LinkClass::bad, LinkClass::intermediate, LinkClass::good};

constexpr std::size_t index_of(LinkClass c) { return static_cast<std::size_t>(c); }

constexpr LinkClass class_at(std::size_t i) { return static_cast<LinkClass>(i); }

constexpr std::string_view to_string(LinkClass c) {
  switch (c) {
    case LinkClass::bad: return "bad";
    case LinkClass::intermediate: return "intermediate";
    case LinkClass::good: return "good";
  }
  return "?";
}

inline std::optional<LinkClass> parse_link_class(std::string_view s) {
  if (s == "bad") return LinkClass::bad;
  if (s == "intermediate" || s == "int") return LinkClass::intermediate;
  if (s == "good") return LinkClass::good;
  return std::nullopt;
}

template <class T>
using PerClass = std::array<T, kNumClasses>;

}  // namespace linkq
