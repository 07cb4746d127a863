#include "swistab/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "swistab/errors.hpp"

namespace swistab::linalg {

SymMatrix::SymMatrix(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw DimensionError("SymMatrix: matrix is " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + ", expected square");
    }
    m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index n) {
    return SymMatrix(Matrix::Identity(n, n));
}

namespace {

// Coefficients of the [6/6] diagonal Pade approximant of exp:
// c_0 = 1, c_k = c_{k-1} (p - k + 1) / (k (2p - k + 1)), p = 6.
constexpr std::array<double, 7> pade6_coefficients() {
    std::array<double, 7> c{};
    c[0] = 1.0;
    constexpr int p = 6;
    for (int k = 1; k <= p; ++k) {
        c[k] = c[k - 1] * static_cast<double>(p - k + 1) /
               static_cast<double>(k * (2 * p - k + 1));
    }
    return c;
}

void require_square(const Matrix& a, const char* where) {
    if (a.rows() != a.cols()) {
        throw DimensionError(std::string(where) + ": matrix is " + std::to_string(a.rows()) +
                             "x" + std::to_string(a.cols()) + ", expected square");
    }
}

}  // namespace

Matrix mat_exp(const Matrix& a, double t, const Tolerances& tol) {
    require_square(a, "mat_exp");
    if (!std::isfinite(t)) {
        throw InvalidArgument("mat_exp: non-finite time argument");
    }
    const Eigen::Index n = a.rows();
    if (t == 0.0) {
        return Matrix::Identity(n, n);
    }

    Matrix x = a * t;
    const double norm1 = x.cwiseAbs().colwise().sum().maxCoeff();
    if (norm1 == 0.0) {
        return Matrix::Identity(n, n);
    }
    if (!std::isfinite(norm1)) {
        throw InvalidArgument("mat_exp: non-finite matrix entries");
    }

    int squarings = 0;
    if (norm1 > tol.pade_scale_target) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / tol.pade_scale_target)));
        squarings = std::max(squarings, 0);
        x /= std::ldexp(1.0, squarings);
    }

    static constexpr auto c = pade6_coefficients();
    const Matrix id = Matrix::Identity(n, n);
    const Matrix x2 = x * x;
    const Matrix x4 = x2 * x2;
    const Matrix x6 = x4 * x2;
    // Split into even and odd parts: N = E + O, D = E - O.
    const Matrix even = c[0] * id + c[2] * x2 + c[4] * x4 + c[6] * x6;
    const Matrix odd = x * (c[1] * id + c[3] * x2 + c[5] * x4);

    Matrix r = (even - odd).partialPivLu().solve(even + odd);
    for (int s = 0; s < squarings; ++s) {
        r = r * r;
    }
    return r;
}

bool solve_lyapunov(const Matrix& a, const Matrix& q, Matrix& p, const Tolerances& tol) {
    require_square(a, "solve_lyapunov");
    const Eigen::Index n = a.rows();
    if (q.rows() != n || q.cols() != n) {
        throw DimensionError("solve_lyapunov: Q does not match A");
    }

    // Unknowns are the upper-triangular entries of P; equations are the
    // upper-triangular entries of A^T P + P A + Q = 0.
    const Eigen::Index m = n * (n + 1) / 2;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> slots;
    slots.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            slots.emplace_back(i, j);
        }
    }

    Matrix op(m, m);
    Vector rhs(m);
    for (Eigen::Index col = 0; col < m; ++col) {
        const auto [pi, pj] = slots[static_cast<std::size_t>(col)];
        Matrix basis = Matrix::Zero(n, n);
        basis(pi, pj) = 1.0;
        basis(pj, pi) = 1.0;
        const Matrix image = a.transpose() * basis + basis * a;
        for (Eigen::Index row = 0; row < m; ++row) {
            const auto [ri, rj] = slots[static_cast<std::size_t>(row)];
            op(row, col) = image(ri, rj);
        }
    }
    for (Eigen::Index row = 0; row < m; ++row) {
        const auto [ri, rj] = slots[static_cast<std::size_t>(row)];
        rhs(row) = -0.5 * (q(ri, rj) + q(rj, ri));
    }

    Eigen::FullPivLU<Matrix> lu(op);
    lu.setThreshold(tol.lyapunov_singular_rel);
    if (!lu.isInvertible()) {
        return false;
    }
    const Vector sol = lu.solve(rhs);

    p.resize(n, n);
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto [i, j] = slots[static_cast<std::size_t>(k)];
        p(i, j) = sol(k);
        p(j, i) = sol(k);
    }
    return true;
}

HurwitzResult is_hurwitz(const Matrix& a, const Tolerances& tol) {
    require_square(a, "is_hurwitz");
    const Eigen::Index n = a.rows();
    Matrix p;
    if (!solve_lyapunov(a, Matrix::Identity(n, n), p, tol)) {
        return HurwitzResult::Indeterminate;
    }
    return is_positive_definite(p) ? HurwitzResult::Hurwitz : HurwitzResult::NotHurwitz;
}

bool is_positive_definite(const Matrix& a) {
    if (a.rows() != a.cols()) {
        return false;
    }
    Eigen::LLT<Matrix> llt(a);
    return llt.info() == Eigen::Success;
}

SymEig sym_eig(const SymMatrix& sym, const Tolerances& tol) {
    Matrix a = sym.mat();
    const Eigen::Index n = a.rows();
    Matrix v = Matrix::Identity(n, n);

    const double scale = std::max(1.0, a.norm());
    auto off_norm = [&]() {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i != j) {
                    s += a(i, j) * a(i, j);
                }
            }
        }
        return std::sqrt(s);
    };

    for (int sweep = 0; sweep < tol.jacobi_max_sweeps; ++sweep) {
        if (off_norm() <= tol.jacobi_offdiag * scale) {
            break;
        }
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) {
                    continue;
                }
                // Classic symmetric Schur 2x2 rotation.
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    // Sort ascending.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        order[static_cast<std::size_t>(i)] = i;
    }
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });

    SymEig out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        out.values(k) = a(src, src);
        out.vectors.col(k) = v.col(src);
    }
    return out;
}

std::pair<double, double> sym_eig_extremes(const SymMatrix& p, const Tolerances& tol) {
    if (p.dim() == 0) {
        throw DimensionError("sym_eig_extremes: empty matrix");
    }
    const SymEig e = sym_eig(p, tol);
    return {e.values(0), e.values(e.values.size() - 1)};
}

double spectral_norm(const Matrix& a, const Tolerances& tol) {
    if (a.size() == 0) {
        return 0.0;
    }
    const auto [lo, hi] = sym_eig_extremes(SymMatrix(a.transpose() * a), tol);
    (void)lo;
    return std::sqrt(std::max(hi, 0.0));
}

}  // namespace swistab::linalg
