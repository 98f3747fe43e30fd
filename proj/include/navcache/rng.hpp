// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <cstring>
#include <initializer_list>

namespace navcache {

// Counter-based deterministic generator built on the splitmix64 finalizer.
// Every consumer derives values from an explicit key, so identical keys give
// identical streams on any platform and there is no hidden generator state.

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t seed, uint64_t value) {
    return splitmix64(seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

inline uint64_t hash_key(std::initializer_list<uint64_t> parts) {
    uint64_t h = 0x243f6a8885a308d3ULL;
    for (uint64_t p : parts)
        h = hash_combine(h, p);
    return h;
}

inline uint64_t double_bits(double v) {
    uint64_t b;
    std::memcpy(&b, &v, sizeof(b));
    return b;
}

/// Uniform in [0, 1).
inline double unit_double(uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// Uniform in [-1, 1).
inline double symmetric_double(uint64_t h) {
    return 2.0 * unit_double(h) - 1.0;
}

}  // namespace navcache
