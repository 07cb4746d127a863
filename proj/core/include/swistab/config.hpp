#pragma once

#include <cstddef>

namespace swistab {

/// Numerical tolerances and caps shared by every module. One instance with
/// the defaults below is used unless a caller overrides a field.
struct Tolerances {
    /// Jacobi sweeps stop once the off-diagonal Frobenius norm falls below
    /// this value times max(1, ||P||_F).
    double jacobi_offdiag = 1e-12;
    int jacobi_max_sweeps = 100;

    /// Scaling-and-squaring target: ||A t / 2^s||_1 <= pade_scale_target.
    double pade_scale_target = 0.5;

    /// Relative threshold for the Lyapunov-operator rank test in is_hurwitz.
    double lyapunov_singular_rel = 1e-12;

    /// Relative tie tolerance for the active set of a pointwise minimum.
    double tol_active = 1e-9;

    /// Shift added before the Cholesky-based PSD test in dominance pruning.
    double psd_slack = 1e-12;

    /// Margin by which one quadratic must undercut all others to count as
    /// strictly minimal (region witnesses, sample pruning).
    double strict_margin = 1e-10;

    /// Hard cap on |H_N| during value iteration.
    std::size_t set_size_cap = 10000;

    /// Hard cap on M^N sequences for brute-force value enumeration.
    std::size_t enumeration_cap = 1000000;

    /// Relative slack accepted when checking V(x(t_k)) is nonincreasing.
    double monotone_rel = 1e-6;

    /// Default spacing of the trajectory recording grid.
    double dt_record = 0.01;

    /// Fraction of leading samples excluded from the decay fit.
    double fit_skip_fraction = 0.05;
};

/// Library-wide defaults.
inline const Tolerances& default_tolerances() {
    static const Tolerances tol{};
    return tol;
}

}  // namespace swistab
