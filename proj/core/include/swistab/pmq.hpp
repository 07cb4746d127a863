#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "swistab/config.hpp"
#include "swistab/linalg.hpp"

namespace swistab::pmq {

using linalg::Matrix;
using linalg::SymMatrix;
using linalg::Vector;

/// V(x) = min_j x^T P_j x over a nonempty list of symmetric matrices of one
/// dimension. Immutable after construction.
class PmPqf {
public:
    explicit PmPqf(std::vector<SymMatrix> pieces);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(pieces_.front().dim()); }
    std::size_t size() const noexcept { return pieces_.size(); }
    const SymMatrix& piece(std::size_t j) const { return pieces_.at(j); }
    const std::vector<SymMatrix>& pieces() const noexcept { return pieces_; }

private:
    std::vector<SymMatrix> pieces_;
};

/// Sorted indices of the pieces attaining the minimum within tol_active.
using ActiveSet = std::vector<std::size_t>;

double eval(const PmPqf& v, const Vector& x);

/// Index of the lowest-numbered piece attaining the exact minimum at x.
std::size_t argmin_piece(const PmPqf& v, const Vector& x);

/// All j with x^T P_j x <= V(x) + tol_active * max(V(x), ||x||^2).
ActiveSet active_set(const PmPqf& v, const Vector& x,
                     double tol_active = default_tolerances().tol_active);

/// One-sided directional derivative of the pointwise minimum:
/// min over active j of 2 x^T P_j eta.
double directional_derivative(const PmPqf& v, const Vector& x, const Vector& eta,
                              double tol_active = default_tolerances().tol_active);

/// Sampling witness for Omega_j = {x : x^T P_j x < x^T P_k x for all k != j}.
/// Tries `n_samples` seeded unit directions plus, for every k != j, the
/// eigenvector of lambda_min(P_j - P_k) and the eigenvector of
/// lambda_min(sum_k (P_j - P_k)). Returns true if some candidate makes P_j
/// strictly minimal by more than strict_margin * max(1, x^T P_j x). false means "no witness
/// found", not a proof that Omega_j is empty.
bool region_nonempty(const PmPqf& v, std::size_t j, std::size_t n_samples, std::uint64_t seed,
                     const Tolerances& tol = default_tolerances());

struct CvBounds {
    double minus = 0.0;
    double plus = 0.0;
};

/// C_V^- = min_j lambda_min(P_j), C_V^+ = min_j lambda_max(P_j), so that
/// C_V^- ||x||^2 <= V(x) <= C_V^+ ||x||^2. Throws NotPositiveDefinite when
/// some piece is not positive definite.
CvBounds cv_bounds(const PmPqf& v, const Tolerances& tol = default_tolerances());

}  // namespace swistab::pmq
