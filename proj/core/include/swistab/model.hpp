#pragma once

#include <cstddef>
#include <vector>

#include "swistab/config.hpp"
#include "swistab/linalg.hpp"

namespace swistab {

using linalg::Matrix;
using linalg::SymMatrix;
using linalg::Vector;

/// Raw, unvalidated description of a switched system as read from JSON:
/// each mode is a list of rows.
struct RawSystem {
    long long n = 0;
    long long m = 0;
    std::vector<std::vector<std::vector<double>>> modes;
};

/// x' = A_sigma x with sigma taking values in {0, ..., M-1}. Mode indices are
/// 0-based in the API; file formats and CSV output use 1-based indices.
class SwitchedLinearSystem {
public:
    /// Validates shapes and finiteness, and caches L1 = max_i ||A_i|| and
    /// L2 = max_{i,j} ||A_i - A_j|| (spectral norms).
    explicit SwitchedLinearSystem(std::vector<Matrix> modes);

    std::size_t dim() const noexcept { return n_; }
    std::size_t num_modes() const noexcept { return modes_.size(); }
    const Matrix& mode(std::size_t i) const { return modes_.at(i); }
    const std::vector<Matrix>& modes() const noexcept { return modes_; }

    double l1() const noexcept { return l1_; }
    double l2() const noexcept { return l2_; }

private:
    std::size_t n_ = 0;
    std::vector<Matrix> modes_;
    double l1_ = 0.0;
    double l2_ = 0.0;
};

/// Checks a raw description (declared n and M, square modes, finite entries).
SwitchedLinearSystem validate_system(const RawSystem& raw);

/// Piecewise-constant mode signal on [breakpoints.front(), breakpoints.back()].
/// Interval k is [breakpoints[k], breakpoints[k+1]) with mode modes[k].
class PureSignal {
public:
    PureSignal(std::vector<double> breakpoints, std::vector<std::size_t> modes);

    /// Single mode on [0, t_end].
    static PureSignal constant(std::size_t mode, double t_end);

    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    const std::vector<std::size_t>& modes() const noexcept { return modes_; }
    std::size_t num_intervals() const noexcept { return modes_.size(); }
    double end_time() const noexcept { return breakpoints_.back(); }

    /// Right-continuous evaluation; t == end_time() returns the last mode.
    std::size_t mode_at(double t) const;

private:
    std::vector<double> breakpoints_;
    std::vector<std::size_t> modes_;
};

/// Piecewise-constant convex-weight signal: every weight vector lies in the simplex.
class RelaxedSignal {
public:
    RelaxedSignal(std::vector<double> breakpoints, std::vector<Vector> weights);

    static RelaxedSignal constant(const Vector& weights, double t_end);

    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    const std::vector<Vector>& weights() const noexcept { return weights_; }
    std::size_t num_intervals() const noexcept { return weights_.size(); }
    std::size_t num_modes() const noexcept { return weights_.front().size(); }
    double end_time() const noexcept { return breakpoints_.back(); }

    /// Integral of weight i over [a, b], exact for piecewise-constant weights.
    double integral(std::size_t i, double a, double b) const;

private:
    std::vector<double> breakpoints_;
    std::vector<Vector> weights_;
};

struct TrajectorySample {
    double t = 0.0;
    Vector x;
    /// Active mode for pure and closed-loop runs, -1 for relaxed runs.
    long mode = -1;
    /// Active weights for relaxed runs, empty otherwise.
    Vector weights;
};

struct Trajectory {
    Vector z;
    std::vector<TrajectorySample> samples;

    const Vector& final_state() const { return samples.back().x; }
};

/// Exact propagation of the pure system under a piecewise-constant signal.
/// Records at every breakpoint inside [0, t_max] and on the grid k * dt_record.
Trajectory propagate_pure(const SwitchedLinearSystem& sys, const PureSignal& signal,
                          const Vector& z, double t_max, double dt_record = 0.01);

/// Exact propagation of the relaxed system x' = (sum_i a_i A_i) x.
Trajectory propagate_relaxed(const SwitchedLinearSystem& sys, const RelaxedSignal& signal,
                             const Vector& z, double t_max, double dt_record = 0.01);

/// States of the pure system at the given nondecreasing query times.
std::vector<Vector> pure_states_at(const SwitchedLinearSystem& sys, const PureSignal& signal,
                                   const Vector& z, const std::vector<double>& times);

/// States of the relaxed system at the given nondecreasing query times.
std::vector<Vector> relaxed_states_at(const SwitchedLinearSystem& sys,
                                      const RelaxedSignal& signal, const Vector& z,
                                      const std::vector<double>& times);

/// sigma_h(t) = sigma(k h) on [k h, (k+1) h), truncated at t_max.
PureSignal resample_uniform(const PureSignal& signal, double h, double t_max);

struct DecayFit {
    double c_hat = 0.0;
    double gamma_hat = 0.0;
};

/// Least-squares fit of log ||x(t)|| against t after dropping the leading
/// fit_skip_fraction of samples; returns (e^{intercept} / ||z||, -slope).
DecayFit fit_decay(const Trajectory& traj, const Tolerances& tol = default_tolerances());

/// Recording grid {0, dt, 2 dt, ...} up to and including t_max.
std::vector<double> recording_grid(double t_max, double dt);

}  // namespace swistab
