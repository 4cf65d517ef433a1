#include "mdual/limits.hpp"

#include <cstdlib>
#include <string>

#include "mdual/errors.hpp"

namespace mdual {

std::size_t default_cap(StateCap kind) noexcept {
  switch (kind) {
    case StateCap::SubsetLattice: return std::size_t{1} << 20;
    case StateCap::PartitionLattice: return 4140;
    case StateCap::ProductPoset: return 4096;
    case StateCap::MultiAllelic: return 4096;
    case StateCap::OffspringAtoms: return 46656;
    case StateCap::DenseMatrix: return 1024;
  }
  return 0;
}

std::size_t state_cap(StateCap kind) {
  if (const char* env = std::getenv(std::string(kMaxStatesEnv).c_str())) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return default_cap(kind);
}

void enforce_cap(StateCap kind, std::size_t requested, std::string_view what) {
  const std::size_t cap = state_cap(kind);
  if (requested > cap) throw SizeOverflow(std::string(what), requested, cap);
}

}  // namespace mdual
