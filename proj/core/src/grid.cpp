#include "swistab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "swistab/errors.hpp"

namespace swistab {

std::size_t default_grid_size(std::size_t n) {
    return n >= 4 ? 8192 : 4096;
}

std::vector<linalg::Vector> random_unit_vectors(std::size_t n, std::size_t count,
                                                std::uint64_t seed) {
    if (n == 0) {
        throw DimensionError("random_unit_vectors: zero dimension");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<linalg::Vector> out;
    out.reserve(count);
    while (out.size() < count) {
        linalg::Vector v(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            v(i) = normal(rng);
        }
        const double norm = v.norm();
        if (norm > 1e-12) {
            out.push_back(v / norm);
        }
    }
    return out;
}

std::vector<linalg::Vector> unit_grid(std::size_t n, std::size_t count, std::uint64_t seed) {
    if (n == 0) {
        throw DimensionError("unit_grid: zero dimension");
    }
    if (count == 0) {
        count = default_grid_size(n);
    }
    std::vector<linalg::Vector> out;
    if (n == 1) {
        linalg::Vector v(1);
        v(0) = 1.0;
        out.push_back(v);
        v(0) = -1.0;
        out.push_back(v);
        return out;
    }
    if (n == 2) {
        out.reserve(count);
        for (std::size_t k = 0; k < count; ++k) {
            const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) /
                                 static_cast<double>(count);
            linalg::Vector v(2);
            v << std::cos(theta), std::sin(theta);
            out.push_back(v);
        }
        return out;
    }
    if (n == 3) {
        out.reserve(count);
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (std::size_t k = 0; k < count; ++k) {
            const double y = 1.0 - 2.0 * (static_cast<double>(k) + 0.5) /
                                       static_cast<double>(count);
            const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
            const double phi = golden * static_cast<double>(k);
            linalg::Vector v(3);
            v << r * std::cos(phi), y, r * std::sin(phi);
            out.push_back(v / v.norm());
        }
        return out;
    }
    return random_unit_vectors(n, count, seed);
}

}  // namespace swistab
