#pragma once

#include <array>
#include <cstdint>

namespace mfnc {

/// Philox4x64-10 block function (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3"). Maps a 256-bit counter and a 128-bit key to 256 random bits.
using PhiloxCounter = std::array<std::uint64_t, 4>;
using PhiloxKey = std::array<std::uint64_t, 2>;

PhiloxCounter philox4x64(PhiloxCounter counter, PhiloxKey key);

}  // namespace mfnc
