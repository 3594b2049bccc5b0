#pragma once

#include "ecx/label.hpp"

#include <cstddef>
#include <span>

namespace ecx {

// Accuracy with the two error rates. False positive rate is the fraction of
// ClassA subjects predicted ClassB; false negative rate the fraction of
// ClassB predicted ClassA. A rate over an empty class is 0.
struct EvalTriple {
  double accuracy = 0.0;
  double false_positive_rate = 0.0;
  double false_negative_rate = 0.0;

  friend bool operator==(const EvalTriple&, const EvalTriple&) = default;
};

struct Confusion {
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  std::size_t false_positives = 0;  // ClassA predicted ClassB
  std::size_t false_negatives = 0;  // ClassB predicted ClassA

  EvalTriple triple() const {
    const std::size_t total = n_a + n_b;
    EvalTriple t;
    t.accuracy = total == 0 ? 0.0
                            : 1.0 - static_cast<double>(false_positives + false_negatives) /
                                        static_cast<double>(total);
    t.false_positive_rate =
        n_a == 0 ? 0.0 : static_cast<double>(false_positives) / static_cast<double>(n_a);
    t.false_negative_rate =
        n_b == 0 ? 0.0 : static_cast<double>(false_negatives) / static_cast<double>(n_b);
    return t;
  }
};

inline Confusion tally(std::span<const Label> truth, std::span<const Label> predicted) {
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == Label::ClassA) {
      ++c.n_a;
      if (predicted[i] == Label::ClassB) ++c.false_positives;
    } else {
      ++c.n_b;
      if (predicted[i] == Label::ClassA) ++c.false_negatives;
    }
  }
  return c;
}

}  // namespace ecx
