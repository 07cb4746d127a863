#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "swistab/linalg.hpp"
#include "swistab/model.hpp"

namespace swistab::testing {

inline SwitchedLinearSystem sys_a() {
    Matrix a1(2, 2);
    Matrix a2(2, 2);
    a1 << -1.0, 0.0, 0.0, 0.5;
    a2 << 0.5, 0.0, 0.0, -1.0;
    return SwitchedLinearSystem({a1, a2});
}

inline Matrix mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

inline Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) {
        out(i++) = x;
    }
    return out;
}

/// Seeded source of random test inputs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double normal() { return normal_(gen_); }
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_);
    }

    Matrix matrix(Eigen::Index n) {
        Matrix m(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) {
                m(i, j) = normal();
            }
        }
        return m;
    }

    /// Random matrix rescaled to spectral norm `norm`.
    Matrix matrix_with_norm(Eigen::Index n, double norm) {
        const Matrix m = matrix(n);
        return m * (norm / linalg::spectral_norm(m));
    }

    Matrix spd(Eigen::Index n, double shift = 0.5) {
        const Matrix b = matrix(n);
        return b * b.transpose() + shift * Matrix::Identity(n, n);
    }

    Vector vector(Eigen::Index n) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            v(i) = normal();
        }
        return v;
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace swistab::testing
