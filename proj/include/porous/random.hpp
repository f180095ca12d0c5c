#pragma once

#include <cstdint>

namespace porous {

/// Uniform [0, 1) double from the top 53 bits of a 64-bit engine draw.
inline double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

}  // namespace porous
