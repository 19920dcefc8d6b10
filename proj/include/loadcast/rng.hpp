#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace loadcast {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Stream derivation: every random stream in the toolkit is identified by
// (root seed, stream name, index). The result is a pure function of the
// three, so concurrently executed rows draw from independent, reproducible
// streams regardless of scheduling.
std::uint64_t derive_seed(std::uint64_t root, std::string_view name, std::uint64_t index = 0) noexcept;

inline Rng make_rng(std::uint64_t root, std::string_view name, std::uint64_t index = 0) {
    return Rng(derive_seed(root, name, index));
}

}  // namespace loadcast
