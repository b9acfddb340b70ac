#pragma once

#include <cstdint>

#include "fppflow/core.hpp"

namespace fppflow {

/// Seed for replicate `replicate` at scale `scale` of a campaign.
///
/// For fixed (master, scale) the map replicate -> seed is a bijection on
/// 64-bit words, so replicates of one scale never collide.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replicate, std::uint64_t scale) {
  std::uint64_t salt = mix64(master ^ 0xd1b54a32d192ed03ull) + mix64(scale + 0x8cb92ba72f3d8dd7ull);
  return mix64(mix64(replicate + 0x9e3779b97f4a7c15ull) ^ salt);
}

}  // namespace fppflow
