#include "swistab/pmq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "swistab/errors.hpp"
#include "swistab/grid.hpp"

namespace swistab::pmq {

namespace {

void check_dim(const PmPqf& v, const Vector& x, const char* where) {
    if (static_cast<std::size_t>(x.size()) != v.dim()) {
        throw DimensionError(std::string(where) + ": vector has dimension " +
                             std::to_string(x.size()) + ", function has " +
                             std::to_string(v.dim()));
    }
}

}  // namespace

PmPqf::PmPqf(std::vector<SymMatrix> pieces) : pieces_(std::move(pieces)) {
    if (pieces_.empty()) {
        throw InvalidArgument("PmPqf needs at least one matrix");
    }
    const auto n = pieces_.front().dim();
    if (n == 0) {
        throw DimensionError("PmPqf: empty matrix");
    }
    for (const auto& p : pieces_) {
        if (p.dim() != n) {
            throw DimensionError("PmPqf: matrices differ in dimension");
        }
        if (!p.mat().allFinite()) {
            throw InvalidArgument("PmPqf: non-finite entry");
        }
    }
}

double eval(const PmPqf& v, const Vector& x) {
    check_dim(v, x, "eval");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : v.pieces()) {
        best = std::min(best, p.quad(x));
    }
    return best;
}

std::size_t argmin_piece(const PmPqf& v, const Vector& x) {
    check_dim(v, x, "argmin_piece");
    std::size_t best_j = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double q = v.piece(j).quad(x);
        if (q < best) {
            best = q;
            best_j = j;
        }
    }
    return best_j;
}

ActiveSet active_set(const PmPqf& v, const Vector& x, double tol_active) {
    check_dim(v, x, "active_set");
    std::vector<double> values(v.size());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < v.size(); ++j) {
        values[j] = v.piece(j).quad(x);
        best = std::min(best, values[j]);
    }
    const double slack = tol_active * std::max(std::abs(best), x.squaredNorm());
    ActiveSet out;
    for (std::size_t j = 0; j < v.size(); ++j) {
        if (values[j] <= best + slack) {
            out.push_back(j);
        }
    }
    return out;
}

double directional_derivative(const PmPqf& v, const Vector& x, const Vector& eta,
                              double tol_active) {
    check_dim(v, eta, "directional_derivative");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j : active_set(v, x, tol_active)) {
        best = std::min(best, 2.0 * x.dot(v.piece(j).mat() * eta));
    }
    return best;
}

bool region_nonempty(const PmPqf& v, std::size_t j, std::size_t n_samples, std::uint64_t seed,
                     const Tolerances& tol) {
    if (j >= v.size()) {
        throw InvalidArgument("region_nonempty: piece index out of range");
    }
    if (v.size() == 1) {
        return true;
    }
    const std::size_t n = v.dim();
    std::vector<Vector> candidates = random_unit_vectors(n, n_samples, seed);
    Matrix aggregate = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k == j) {
            continue;
        }
        const Matrix diff = v.piece(j).mat() - v.piece(k).mat();
        aggregate += diff;
        const auto e = linalg::sym_eig(SymMatrix(diff), tol);
        candidates.push_back(e.vectors.col(0));
    }
    candidates.push_back(linalg::sym_eig(SymMatrix(aggregate), tol).vectors.col(0));

    for (const Vector& x : candidates) {
        const double qj = v.piece(j).quad(x);
        bool strict = true;
        for (std::size_t k = 0; k < v.size() && strict; ++k) {
            if (k != j &&
                !(v.piece(k).quad(x) - qj > tol.strict_margin * std::max(1.0, std::abs(qj)))) {
                strict = false;
            }
        }
        if (strict) {
            return true;
        }
    }
    return false;
}

CvBounds cv_bounds(const PmPqf& v, const Tolerances& tol) {
    CvBounds b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    for (std::size_t j = 0; j < v.size(); ++j) {
        const auto [lo, hi] = linalg::sym_eig_extremes(v.piece(j), tol);
        if (!(lo > 0.0) || !linalg::is_positive_definite(v.piece(j).mat())) {
            throw NotPositiveDefinite("piece " + std::to_string(j + 1) +
                                      " is not positive definite (lambda_min = " +
                                      std::to_string(lo) + ")");
        }
        b.minus = std::min(b.minus, lo);
        b.plus = std::min(b.plus, hi);
    }
    return b;
}

}  // namespace swistab::pmq
