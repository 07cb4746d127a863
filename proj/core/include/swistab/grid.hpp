#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "swistab/linalg.hpp"

namespace swistab {

/// Default number of grid directions for a state dimension:
/// 4096 for n = 2 and n = 3, 8192 for n >= 4.
std::size_t default_grid_size(std::size_t n);

/// Deterministic unit-sphere directions used by every grid check.
///   n = 1: {+1, -1}
///   n = 2: `count` equally spaced angles starting at 0
///   n = 3: `count`-point Fibonacci sphere
///   n >= 4: `count` normalized Gaussian draws from mt19937_64(seed)
/// count == 0 selects default_grid_size(n).
std::vector<linalg::Vector> unit_grid(std::size_t n, std::size_t count = 0,
                                      std::uint64_t seed = 0);

/// Seeded uniform directions on the sphere, regardless of dimension.
std::vector<linalg::Vector> random_unit_vectors(std::size_t n, std::size_t count,
                                                std::uint64_t seed);

}  // namespace swistab
