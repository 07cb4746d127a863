#pragma once

#include <Eigen/Dense>

#include <utility>

#include "swistab/config.hpp"

namespace swistab::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A real symmetric matrix. Construction symmetrizes the input as (X + X^T)/2,
/// so the stored entries are exactly symmetric.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(const Matrix& m);

    static SymMatrix identity(Eigen::Index n);

    const Matrix& mat() const noexcept { return m_; }
    Eigen::Index dim() const noexcept { return m_.rows(); }

    /// x^T P x
    double quad(const Vector& x) const { return x.dot(m_ * x); }

    friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
        return a.m_.rows() == b.m_.rows() && a.m_ == b.m_;
    }

private:
    Matrix m_;
};

/// e^{A t} by scaling and squaring with a [6/6] diagonal Pade approximant.
/// Throws DimensionError for non-square A.
Matrix mat_exp(const Matrix& a, double t, const Tolerances& tol = default_tolerances());

enum class HurwitzResult { Hurwitz, NotHurwitz, Indeterminate };

/// Decides whether every eigenvalue of A has negative real part by solving
/// A^T P + P A = -I over symmetric P and testing P > 0 with a Cholesky
/// factorization. A singular Lyapunov operator (some lambda_i + lambda_j = 0)
/// yields Indeterminate.
HurwitzResult is_hurwitz(const Matrix& a, const Tolerances& tol = default_tolerances());

/// Solves A^T P + P A = -Q for symmetric P; returns false when the operator is singular.
bool solve_lyapunov(const Matrix& a, const Matrix& q, Matrix& p,
                    const Tolerances& tol = default_tolerances());

struct SymEig {
    Vector values;   // ascending
    Matrix vectors;  // columns, matching values
};

/// Full eigendecomposition by cyclic Jacobi rotations.
SymEig sym_eig(const SymMatrix& p, const Tolerances& tol = default_tolerances());

/// (lambda_min, lambda_max) of a symmetric matrix.
std::pair<double, double> sym_eig_extremes(const SymMatrix& p,
                                           const Tolerances& tol = default_tolerances());

/// Largest singular value, via the extremes of A^T A.
double spectral_norm(const Matrix& a, const Tolerances& tol = default_tolerances());

/// True iff the matrix admits a Cholesky factorization (numerically positive definite).
bool is_positive_definite(const Matrix& a);

}  // namespace swistab::linalg
