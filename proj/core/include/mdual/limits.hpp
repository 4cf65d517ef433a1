#pragma once

#include <cstddef>
#include <string_view>

namespace mdual {

/// Families of state spaces with a configurable size cap. The environment
/// variable MOEBIUS_DUAL_MAX_STATES, when set to a positive integer, replaces
/// every default below.
enum class StateCap {
  SubsetLattice,     // 2^N, default 2^20
  PartitionLattice,  // Bell(n), default 4140 (n = 8)
  ProductPoset,      // |I1| * |I2|, default 4096
  MultiAllelic,      // (T+1)^N, default 4096
  OffspringAtoms,    // support size of an offspring law, default 46656 (6^6)
  DenseMatrix,       // side length of dense rational matrices, default 1024
};

inline constexpr std::string_view kMaxStatesEnv = "MOEBIUS_DUAL_MAX_STATES";

std::size_t default_cap(StateCap kind) noexcept;
std::size_t state_cap(StateCap kind);

/// Throws SizeOverflow when `requested` exceeds the cap for `kind`.
void enforce_cap(StateCap kind, std::size_t requested, std::string_view what);

}  // namespace mdual
