#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace kianc {

// Seeds for independent purposes (Monte Carlo, excitation, noise,
// perturbation) are derived from a single root seed and a fixed label, so
// each stream is reproducible on its own regardless of scheduling.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);
std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                          std::uint64_t index);

using Rng = std::mt19937_64;

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace kianc
