#pragma once

#include <string_view>

namespace ecx {

// Two-group label. ClassA is the reference (healthy/control) group, so a
// false positive is a ClassA subject predicted as ClassB.
enum class Label { ClassA, ClassB };

inline constexpr std::string_view to_string(Label label) noexcept {
  return label == Label::ClassA ? "ClassA" : "ClassB";
}

inline constexpr Label other(Label label) noexcept {
  return label == Label::ClassA ? Label::ClassB : Label::ClassA;
}

}  // namespace ecx
