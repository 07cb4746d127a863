#include "swistab/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "swistab/errors.hpp"

namespace swistab {

namespace {

void check_breakpoints(const std::vector<double>& bp, std::size_t intervals, const char* what) {
    if (intervals == 0) {
        throw InvalidArgument(std::string(what) + ": no intervals");
    }
    if (bp.size() != intervals + 1) {
        throw DimensionError(std::string(what) + ": expected " + std::to_string(intervals + 1) +
                             " breakpoints, got " + std::to_string(bp.size()));
    }
    if (bp.front() != 0.0) {
        throw InvalidArgument(std::string(what) + ": first breakpoint must be 0");
    }
    for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
        if (!std::isfinite(bp[k + 1]) || !(bp[k + 1] > bp[k])) {
            throw InvalidArgument(std::string(what) +
                                  ": breakpoints must be finite and strictly increasing");
        }
    }
}

std::size_t interval_index(const std::vector<double>& bp, double t) {
    // Right-continuous: the interval [bp[k], bp[k+1]) containing t, clamped to
    // the last interval at or beyond the end.
    auto it = std::upper_bound(bp.begin(), bp.end(), t);
    std::size_t k = it == bp.begin() ? 0 : static_cast<std::size_t>(it - bp.begin()) - 1;
    return std::min(k, bp.size() - 2);
}

// Small memo for transition matrices keyed by (generator address, step length).
class TransitionCache {
public:
    const Matrix& get(const Matrix& generator, double dt) {
        for (auto& e : entries_) {
            if (e.key == &generator && e.dt == dt) {
                return e.value;
            }
        }
        if (entries_.size() == kCapacity) {
            entries_.erase(entries_.begin());
        }
        entries_.push_back({&generator, dt, linalg::mat_exp(generator, dt)});
        return entries_.back().value;
    }

private:
    struct Entry {
        const Matrix* key;
        double dt;
        Matrix value;
    };
    static constexpr std::size_t kCapacity = 16;
    std::vector<Entry> entries_;
};

// Shared exact propagation for any piecewise-constant generator sequence.
// generator(k) is the matrix active on interval k; times must be nondecreasing
// and lie within [0, bp.back()].
std::vector<Vector> piecewise_states(const std::vector<double>& bp,
                                     const std::function<const Matrix&(std::size_t)>& generator,
                                     const Vector& z, const std::vector<double>& times) {
    std::vector<Vector> out;
    out.reserve(times.size());
    TransitionCache cache;

    Vector x = z;
    double t_cur = 0.0;
    std::size_t k = 0;
    const std::size_t intervals = bp.size() - 1;
    for (double tau : times) {
        if (tau < t_cur) {
            throw InvalidArgument("query times must be nondecreasing");
        }
        while (k + 1 < intervals && bp[k + 1] <= tau) {
            const double step = bp[k + 1] - t_cur;
            if (step > 0.0) {
                x = cache.get(generator(k), step) * x;
            }
            t_cur = bp[k + 1];
            ++k;
        }
        const double step = tau - t_cur;
        if (step > 0.0) {
            x = cache.get(generator(k), step) * x;
            t_cur = tau;
        }
        out.push_back(x);
    }
    return out;
}

std::vector<double> record_times(const std::vector<double>& bp, double t_max, double dt_record) {
    std::vector<double> times = recording_grid(t_max, dt_record);
    for (double b : bp) {
        if (b > 0.0 && b < t_max) {
            times.push_back(b);
        }
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    return times;
}

void check_propagation_args(const SwitchedLinearSystem& sys, const Vector& z, double t_max,
                            double end_time, double dt_record) {
    if (static_cast<std::size_t>(z.size()) != sys.dim()) {
        throw DimensionError("initial state has dimension " + std::to_string(z.size()) +
                             ", system has " + std::to_string(sys.dim()));
    }
    if (!std::isfinite(t_max) || t_max < 0.0) {
        throw InvalidArgument("t_max must be finite and nonnegative");
    }
    if (!(dt_record > 0.0)) {
        throw InvalidArgument("dt_record must be positive");
    }
    if (end_time < t_max) {
        throw InvalidArgument("signal ends at " + std::to_string(end_time) +
                              ", shorter than t_max = " + std::to_string(t_max));
    }
}

}  // namespace

SwitchedLinearSystem::SwitchedLinearSystem(std::vector<Matrix> modes) : modes_(std::move(modes)) {
    if (modes_.empty()) {
        throw InvalidArgument("switched system needs at least one mode");
    }
    n_ = static_cast<std::size_t>(modes_.front().rows());
    if (n_ == 0) {
        throw DimensionError("switched system has zero state dimension");
    }
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        const Matrix& a = modes_[i];
        if (a.rows() != a.cols()) {
            throw DimensionError("mode " + std::to_string(i + 1) + " is " +
                                 std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                 ", expected square");
        }
        if (static_cast<std::size_t>(a.rows()) != n_) {
            throw DimensionError("mode " + std::to_string(i + 1) + " has dimension " +
                                 std::to_string(a.rows()) + ", expected " + std::to_string(n_));
        }
        if (!a.allFinite()) {
            throw InvalidArgument("mode " + std::to_string(i + 1) + " has a non-finite entry");
        }
    }
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        l1_ = std::max(l1_, linalg::spectral_norm(modes_[i]));
        for (std::size_t j = i + 1; j < modes_.size(); ++j) {
            l2_ = std::max(l2_, linalg::spectral_norm(modes_[i] - modes_[j]));
        }
    }
}

SwitchedLinearSystem validate_system(const RawSystem& raw) {
    if (raw.m <= 0 || raw.modes.empty()) {
        throw InvalidArgument("system must declare at least one mode");
    }
    if (raw.n <= 0) {
        throw DimensionError("system dimension must be positive");
    }
    if (static_cast<std::size_t>(raw.m) != raw.modes.size()) {
        throw DimensionError("declared M = " + std::to_string(raw.m) + " but " +
                             std::to_string(raw.modes.size()) + " modes given");
    }
    const auto n = static_cast<std::size_t>(raw.n);
    std::vector<Matrix> modes;
    modes.reserve(raw.modes.size());
    for (std::size_t i = 0; i < raw.modes.size(); ++i) {
        const auto& rows = raw.modes[i];
        const std::size_t cols = rows.empty() ? 0 : rows.front().size();
        for (const auto& r : rows) {
            if (r.size() != cols) {
                throw DimensionError("mode " + std::to_string(i + 1) + " has ragged rows");
            }
        }
        if (rows.size() != cols) {
            throw DimensionError("mode " + std::to_string(i + 1) + " is " +
                                 std::to_string(rows.size()) + "x" + std::to_string(cols) +
                                 ", expected square");
        }
        if (rows.size() != n) {
            throw DimensionError("mode " + std::to_string(i + 1) + " has dimension " +
                                 std::to_string(rows.size()) + ", declared n = " +
                                 std::to_string(n));
        }
        Matrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
            }
        }
        modes.push_back(std::move(a));
    }
    return SwitchedLinearSystem(std::move(modes));
}

PureSignal::PureSignal(std::vector<double> breakpoints, std::vector<std::size_t> modes)
    : breakpoints_(std::move(breakpoints)), modes_(std::move(modes)) {
    check_breakpoints(breakpoints_, modes_.size(), "PureSignal");
}

PureSignal PureSignal::constant(std::size_t mode, double t_end) {
    return PureSignal({0.0, t_end}, {mode});
}

std::size_t PureSignal::mode_at(double t) const {
    return modes_[interval_index(breakpoints_, t)];
}

RelaxedSignal::RelaxedSignal(std::vector<double> breakpoints, std::vector<Vector> weights)
    : breakpoints_(std::move(breakpoints)), weights_(std::move(weights)) {
    check_breakpoints(breakpoints_, weights_.size(), "RelaxedSignal");
    const Eigen::Index m = weights_.front().size();
    if (m == 0) {
        throw DimensionError("RelaxedSignal: empty weight vector");
    }
    for (const Vector& w : weights_) {
        if (w.size() != m) {
            throw DimensionError("RelaxedSignal: weight vectors differ in length");
        }
        if (!w.allFinite() || w.minCoeff() < 0.0 || std::abs(w.sum() - 1.0) > 1e-12) {
            throw InvalidArgument("RelaxedSignal: weights must be nonnegative and sum to 1");
        }
    }
}

RelaxedSignal RelaxedSignal::constant(const Vector& weights, double t_end) {
    return RelaxedSignal({0.0, t_end}, {weights});
}

double RelaxedSignal::integral(std::size_t i, double a, double b) const {
    double total = 0.0;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        const double lo = std::max(a, breakpoints_[k]);
        const double hi = std::min(b, breakpoints_[k + 1]);
        if (hi > lo) {
            total += weights_[k](static_cast<Eigen::Index>(i)) * (hi - lo);
        }
    }
    return total;
}

std::vector<double> recording_grid(double t_max, double dt) {
    if (!(dt > 0.0)) {
        throw InvalidArgument("recording grid spacing must be positive");
    }
    std::vector<double> grid;
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * dt;
        if (t >= t_max) {
            break;
        }
        grid.push_back(t);
    }
    grid.push_back(t_max);
    return grid;
}

std::vector<Vector> pure_states_at(const SwitchedLinearSystem& sys, const PureSignal& signal,
                                   const Vector& z, const std::vector<double>& times) {
    for (std::size_t m : signal.modes()) {
        if (m >= sys.num_modes()) {
            throw InvalidArgument("signal uses mode " + std::to_string(m + 1) +
                                  " but the system has " + std::to_string(sys.num_modes()));
        }
    }
    if (!times.empty() && times.back() > signal.end_time()) {
        throw InvalidArgument("query time beyond the end of the signal");
    }
    const auto gen = [&](std::size_t k) -> const Matrix& { return sys.mode(signal.modes()[k]); };
    return piecewise_states(signal.breakpoints(), gen, z, times);
}

namespace {

std::vector<Matrix> relaxed_generators(const SwitchedLinearSystem& sys,
                                       const RelaxedSignal& signal) {
    if (signal.num_modes() != sys.num_modes()) {
        throw DimensionError("relaxed signal has " + std::to_string(signal.num_modes()) +
                             " weights, system has " + std::to_string(sys.num_modes()) +
                             " modes");
    }
    std::vector<Matrix> gens;
    gens.reserve(signal.num_intervals());
    for (const Vector& w : signal.weights()) {
        Matrix g = w(0) * sys.mode(0);
        for (std::size_t i = 1; i < sys.num_modes(); ++i) {
            g += w(static_cast<Eigen::Index>(i)) * sys.mode(i);
        }
        gens.push_back(std::move(g));
    }
    return gens;
}

}  // namespace

std::vector<Vector> relaxed_states_at(const SwitchedLinearSystem& sys,
                                      const RelaxedSignal& signal, const Vector& z,
                                      const std::vector<double>& times) {
    const std::vector<Matrix> gens = relaxed_generators(sys, signal);
    if (!times.empty() && times.back() > signal.end_time()) {
        throw InvalidArgument("query time beyond the end of the signal");
    }
    const auto gen = [&](std::size_t k) -> const Matrix& { return gens[k]; };
    return piecewise_states(signal.breakpoints(), gen, z, times);
}

Trajectory propagate_pure(const SwitchedLinearSystem& sys, const PureSignal& signal,
                          const Vector& z, double t_max, double dt_record) {
    check_propagation_args(sys, z, t_max, signal.end_time(), dt_record);
    const std::vector<double> times = record_times(signal.breakpoints(), t_max, dt_record);
    std::vector<Vector> states = pure_states_at(sys, signal, z, times);

    Trajectory traj;
    traj.z = z;
    traj.samples.reserve(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        traj.samples.push_back(
            {times[k], std::move(states[k]), static_cast<long>(signal.mode_at(times[k])), {}});
    }
    return traj;
}

Trajectory propagate_relaxed(const SwitchedLinearSystem& sys, const RelaxedSignal& signal,
                             const Vector& z, double t_max, double dt_record) {
    check_propagation_args(sys, z, t_max, signal.end_time(), dt_record);
    const std::vector<double> times = record_times(signal.breakpoints(), t_max, dt_record);
    std::vector<Vector> states = relaxed_states_at(sys, signal, z, times);

    Trajectory traj;
    traj.z = z;
    traj.samples.reserve(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        const std::size_t idx = interval_index(signal.breakpoints(), times[k]);
        traj.samples.push_back({times[k], std::move(states[k]), -1, signal.weights()[idx]});
    }
    return traj;
}

PureSignal resample_uniform(const PureSignal& signal, double h, double t_max) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw InvalidArgument("resample_uniform: h must be positive and finite");
    }
    if (!(t_max > 0.0)) {
        throw InvalidArgument("resample_uniform: t_max must be positive");
    }
    if (signal.end_time() < t_max) {
        throw InvalidArgument("resample_uniform: signal shorter than t_max");
    }
    std::vector<double> bp;
    std::vector<std::size_t> modes;
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * h;
        if (t >= t_max) {
            break;
        }
        bp.push_back(t);
        modes.push_back(signal.mode_at(t));
    }
    bp.push_back(t_max);
    return PureSignal(std::move(bp), std::move(modes));
}

DecayFit fit_decay(const Trajectory& traj, const Tolerances& tol) {
    const std::size_t count = traj.samples.size();
    if (count < 10) {
        throw DegenerateFit("fit_decay needs at least 10 samples, got " + std::to_string(count));
    }
    const double z_norm = traj.z.norm();
    if (!(z_norm > 0.0)) {
        throw DegenerateFit("fit_decay: zero initial state");
    }
    const auto skip = static_cast<std::size_t>(std::floor(tol.fit_skip_fraction *
                                                          static_cast<double>(count)));
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    std::size_t used = 0;
    for (std::size_t k = skip; k < count; ++k) {
        const double norm = traj.samples[k].x.norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) {
            throw DegenerateFit("fit_decay: zero-norm or non-finite state at t = " +
                                std::to_string(traj.samples[k].t));
        }
        const double t = traj.samples[k].t;
        const double y = std::log(norm);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
        ++used;
    }
    const double nn = static_cast<double>(used);
    const double denom = nn * stt - st * st;
    if (!(denom > 0.0)) {
        throw DegenerateFit("fit_decay: sample times do not span an interval");
    }
    const double slope = (nn * sty - st * sy) / denom;
    const double intercept = (sy - slope * st) / nn;
    return {std::exp(intercept) / z_norm, -slope};
}

}  // namespace swistab
