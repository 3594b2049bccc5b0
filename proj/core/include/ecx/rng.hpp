#pragma once

#include <cstdint>
#include <random>

namespace ecx {

// Independent engine for (seed, stream). Used wherever work is split across
// trees, folds, replications or channels so results never depend on the
// order in which parallel workers run.
inline std::mt19937_64 derive_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return derive_engine(seed, stream)();
}

}  // namespace ecx
