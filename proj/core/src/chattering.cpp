#include "swistab/chattering.hpp"

#include <algorithm>
#include <cmath>

#include "swistab/errors.hpp"
#include "swistab/parallel.hpp"

namespace swistab::chatter {

namespace {

void check_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidArgument(std::string(name) + " must be positive and finite");
    }
}

}  // namespace

ChatterPlan build_plan(const RelaxedSignal& signal, double h, double horizon) {
    check_positive(h, "h");
    check_positive(horizon, "T");
    if (signal.end_time() < horizon) {
        throw InvalidArgument("relaxed signal ends before T");
    }
    ChatterPlan plan;
    plan.h = h;
    plan.horizon = horizon;
    const std::size_t m = signal.num_modes();
    for (std::size_t k = 0;; ++k) {
        const double start = static_cast<double>(k) * h;
        if (start >= horizon) {
            break;
        }
        const double end = std::min(static_cast<double>(k + 1) * h, horizon);
        std::vector<double> slots(m + 1);
        slots[0] = start;
        for (std::size_t i = 0; i < m; ++i) {
            slots[i + 1] = slots[i] + signal.integral(i, start, end);
        }
        // The weights sum to one, so the last boundary equals `end` up to
        // rounding; pin it so consecutive subintervals tile exactly.
        slots[m] = end;
        plan.slot_times.push_back(std::move(slots));
    }
    return plan;
}

PureSignal build_pure(const RelaxedSignal& signal, double h, double horizon) {
    const ChatterPlan plan = build_plan(signal, h, horizon);
    std::vector<double> bp{0.0};
    std::vector<std::size_t> modes;
    for (const auto& slots : plan.slot_times) {
        for (std::size_t i = 0; i + 1 < slots.size(); ++i) {
            const double a = std::max(slots[i], bp.back());
            const double b = slots[i + 1];
            if (!(b > a)) {
                continue;
            }
            if (!modes.empty() && modes.back() == i) {
                bp.back() = b;
            } else {
                modes.push_back(i);
                bp.push_back(b);
            }
        }
    }
    return PureSignal(std::move(bp), std::move(modes));
}

double chatter_error(const SwitchedLinearSystem& sys, const RelaxedSignal& signal, double h,
                     double horizon, const Vector& z, double dt_record) {
    const PureSignal pure = build_pure(signal, h, horizon);
    std::vector<double> times = recording_grid(horizon, dt_record);
    for (double b : pure.breakpoints()) {
        if (b <= horizon) {
            times.push_back(b);
        }
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    const std::vector<Vector> xp = pure_states_at(sys, pure, z, times);
    const std::vector<Vector> xr = relaxed_states_at(sys, signal, z, times);
    double sup = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        sup = std::max(sup, (xp[k] - xr[k]).norm());
    }
    return sup;
}

double required_h(const SwitchedLinearSystem& sys, double horizon, double gain_c,
                  double epsilon) {
    check_positive(horizon, "T");
    check_positive(gain_c, "C");
    check_positive(epsilon, "epsilon");
    check_positive(sys.l1(), "L1");
    const double kappa =
        horizon * static_cast<double>(sys.num_modes()) * sys.l1() * sys.l1() * gain_c;
    return epsilon / kappa * std::exp(-sys.l1() * horizon);
}

double error_bound(const SwitchedLinearSystem& sys, double horizon, double gain_c, double h) {
    check_positive(horizon, "T");
    check_positive(gain_c, "C");
    check_positive(h, "h");
    const double kappa =
        horizon * static_cast<double>(sys.num_modes()) * sys.l1() * sys.l1() * gain_c;
    return kappa * h * std::exp(sys.l1() * horizon);
}

double relaxed_gain(const SwitchedLinearSystem& sys, const RelaxedSignal& signal, double horizon,
                    double dt_record) {
    check_positive(horizon, "T");
    std::vector<double> times = recording_grid(horizon, dt_record);
    for (double b : signal.breakpoints()) {
        if (b < horizon) {
            times.push_back(b);
        }
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    const auto n = static_cast<Eigen::Index>(sys.dim());
    std::vector<std::vector<Vector>> columns;
    for (Eigen::Index j = 0; j < n; ++j) {
        columns.push_back(relaxed_states_at(sys, signal, Vector::Unit(n, j), times));
    }
    double gain = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        Matrix phi(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            phi.col(j) = columns[static_cast<std::size_t>(j)][k];
        }
        gain = std::max(gain, linalg::spectral_norm(phi));
    }
    return gain;
}

std::vector<SweepRow> error_sweep(const SwitchedLinearSystem& sys, const RelaxedSignal& signal,
                                  double horizon, const Vector& z,
                                  const std::vector<double>& h_list, double gain_c,
                                  double dt_record) {
    std::vector<SweepRow> rows(h_list.size());
    const double z_norm = z.norm();
    parallel_for(h_list.size(), [&](std::size_t i) {
        const double h = h_list[i];
        rows[i] = {h, chatter_error(sys, signal, h, horizon, z, dt_record),
                   error_bound(sys, horizon, gain_c, h) * z_norm};
    });
    return rows;
}

double loglog_slope(const std::vector<double>& h, const std::vector<double>& err) {
    if (h.size() != err.size() || h.size() < 2) {
        throw InvalidArgument("loglog_slope needs at least two matching points");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(h[i] > 0.0) || !(err[i] > 0.0)) {
            throw InvalidArgument("loglog_slope needs positive values");
        }
        const double x = std::log(h[i]);
        const double y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(h.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace swistab::chatter
