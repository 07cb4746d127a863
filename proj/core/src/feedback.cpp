#include "swistab/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "swistab/errors.hpp"
#include "swistab/grid.hpp"
#include "swistab/parallel.hpp"
#include "swistab/synthesis.hpp"

namespace swistab::feedback {

SamplingSchedule SamplingSchedule::uniform(double h) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw InvalidArgument("sampling period must be positive and finite, got " +
                              std::to_string(h));
    }
    SamplingSchedule s;
    s.uniform_ = true;
    s.h_ = h;
    s.diameter_ = h;
    return s;
}

SamplingSchedule SamplingSchedule::explicit_times(std::vector<double> times) {
    if (times.empty() || times.front() != 0.0) {
        throw InvalidArgument("sampling schedule must start at 0");
    }
    double d = 0.0;
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double gap = times[k] - times[k - 1];
        if (!(gap > 0.0) || !std::isfinite(times[k])) {
            throw InvalidArgument("sampling schedule gap " + std::to_string(k) +
                                  " is not positive");
        }
        d = std::max(d, gap);
    }
    SamplingSchedule s;
    s.uniform_ = false;
    s.diameter_ = d;
    s.times_ = std::move(times);
    return s;
}

std::vector<double> SamplingSchedule::instants(double t_max) const {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) {
        throw InvalidArgument("simulation end time must be positive and finite");
    }
    std::vector<double> out;
    if (uniform_) {
        for (std::size_t k = 0;; ++k) {
            const double t = static_cast<double>(k) * h_;
            if (t >= t_max) {
                break;
            }
            out.push_back(t);
        }
    } else {
        if (times_.back() < t_max) {
            throw InvalidArgument("sampling schedule ends before t_max");
        }
        for (double t : times_) {
            if (t >= t_max) {
                break;
            }
            out.push_back(t);
        }
    }
    out.push_back(t_max);
    return out;
}

FeedbackLaw::FeedbackLaw(pmq::PmPqf clf, SwitchedLinearSystem sys, double tol_active)
    : clf_(std::move(clf)), sys_(std::move(sys)), tol_active_(tol_active) {
    if (clf_.dim() != sys_.dim()) {
        throw DimensionError("feedback law: function dimension " + std::to_string(clf_.dim()) +
                             " differs from system dimension " + std::to_string(sys_.dim()));
    }
}

std::size_t min_dv_law(const FeedbackLaw& law, const Vector& z) {
    if (z.isZero(0.0)) {
        return 0;
    }
    // Same arithmetic as pmq::directional_derivative, with the active set
    // computed once for all modes.
    const pmq::ActiveSet active = pmq::active_set(law.clf(), z, law.tol_active());
    std::size_t best = 0;
    double best_dv = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < law.system().num_modes(); ++i) {
        const Vector eta = law.system().mode(i) * z;
        double dv = std::numeric_limits<double>::infinity();
        for (std::size_t j : active) {
            dv = std::min(dv, 2.0 * z.dot(law.clf().piece(j).mat() * eta));
        }
        if (dv < best_dv) {
            best_dv = dv;
            best = i;
        }
    }
    return best;
}

ClosedLoopRun simulate_sh(const FeedbackLaw& law, const SamplingSchedule& schedule,
                          const Vector& z, double t_max, double dt_record) {
    const SwitchedLinearSystem& sys = law.system();
    if (static_cast<std::size_t>(z.size()) != sys.dim()) {
        throw DimensionError("initial state has dimension " + std::to_string(z.size()) +
                             ", expected " + std::to_string(sys.dim()));
    }
    if (!(dt_record > 0.0)) {
        throw InvalidArgument("recording step must be positive");
    }
    const std::vector<double> instants = schedule.instants(t_max);
    const std::vector<double> grid = recording_grid(t_max, dt_record);

    // Transition matrices keyed by (mode, interval length). Full intervals of
    // a uniform schedule use the period itself so one entry per mode suffices.
    std::map<std::pair<std::size_t, double>, Matrix> cache;
    auto transition = [&](std::size_t mode, double dt) -> const Matrix& {
        auto it = cache.find({mode, dt});
        if (it == cache.end()) {
            it = cache.emplace(std::make_pair(mode, dt), linalg::mat_exp(sys.mode(mode), dt)).first;
        }
        return it->second;
    };

    ClosedLoopRun run;
    run.trajectory.z = z;
    Vector x = z;
    std::size_t g = 0;
    std::size_t mode = 0;
    for (std::size_t k = 0; k + 1 < instants.size(); ++k) {
        const double t0 = instants[k];
        const double t1 = instants[k + 1];
        mode = min_dv_law(law, x);
        run.events.push_back(SampleEvent{t0, x, mode});
        run.trajectory.samples.push_back(TrajectorySample{t0, x, static_cast<long>(mode), {}});
        while (g < grid.size() && grid[g] <= t0) {
            ++g;
        }
        while (g < grid.size() && grid[g] < t1) {
            run.trajectory.samples.push_back(
                TrajectorySample{grid[g], linalg::mat_exp(sys.mode(mode), grid[g] - t0) * x,
                                 static_cast<long>(mode), {}});
            ++g;
        }
        const bool full = schedule.is_uniform() && k + 2 < instants.size();
        x = transition(mode, full ? schedule.period() : t1 - t0) * x;
    }
    run.trajectory.samples.push_back(TrajectorySample{t_max, x, static_cast<long>(mode), {}});
    return run;
}

ClosedLoopRun simulate_discrete(const FeedbackLaw& law, double h, const Vector& z, double t_max,
                                double dt_record) {
    return simulate_sh(law, SamplingSchedule::uniform(h), z, t_max, dt_record);
}

Trajectory simulate_discrete(const SwitchedLinearSystem& sys,
                             const std::vector<std::size_t>& modes, double h, const Vector& z,
                             double t_max, double dt_record) {
    const std::vector<double> instants = SamplingSchedule::uniform(h).instants(t_max);
    const std::size_t needed = instants.size() - 1;
    if (modes.size() < needed) {
        throw InvalidArgument("mode sequence has " + std::to_string(modes.size()) +
                              " entries, " + std::to_string(needed) + " needed to reach t_max");
    }
    const PureSignal signal(instants,
                            std::vector<std::size_t>(modes.begin(),
                                                     modes.begin() + static_cast<long>(needed)));
    return propagate_pure(sys, signal, z, t_max, dt_record);
}

StabilityReport stability_report(const FeedbackLaw& law, const std::vector<Vector>& z_set,
                                 const std::vector<double>& h_list, double t_max,
                                 const Tolerances& tol) {
    if (z_set.empty() || h_list.empty()) {
        throw InvalidArgument("stability report needs nonempty initial states and periods");
    }
    const SwitchedLinearSystem& sys = law.system();
    StabilityReport report;
    const auto grid = unit_grid(sys.dim());
    report.kappa_ct = synth::verify_ct_decrease(sys, law.clf(), grid, tol).kappa;
    report.h0 = report.kappa_ct > 0.0
                    ? synth::compute_h0(sys, law.clf(), report.kappa_ct / 3.0, tol)
                    : 0.0;

    const std::size_t nz = z_set.size();
    report.runs.resize(h_list.size() * nz);
    parallel_for(report.runs.size(), [&](std::size_t idx) {
        const double h = h_list[idx / nz];
        const Vector& z = z_set[idx % nz];
        const ClosedLoopRun run = simulate_sh(law, SamplingSchedule::uniform(h), z, t_max);
        StabilityRun& r = report.runs[idx];
        r.z_index = idx % nz;
        r.z = z;
        r.h = h;
        r.above_h0 = h > report.h0;
        const DecayFit fit = fit_decay(run.trajectory, tol);
        r.gamma_hat = fit.gamma_hat;
        r.c_hat = fit.c_hat;
        r.v_monotone = true;
        double v_prev = pmq::eval(law.clf(), run.events.front().x);
        for (std::size_t k = 1; k <= run.events.size(); ++k) {
            const Vector& x =
                k < run.events.size() ? run.events[k].x : run.trajectory.final_state();
            const double v = pmq::eval(law.clf(), x);
            if (v > v_prev * (1.0 + tol.monotone_rel)) {
                r.v_monotone = false;
            }
            v_prev = v;
        }
    });

    for (double h : h_list) {
        if (h > report.h0) {
            report.flagged_h.push_back(h);
        }
    }
    bool any = false;
    bool ok = report.kappa_ct > 0.0;
    report.min_gamma_hat = std::numeric_limits<double>::infinity();
    report.max_c_hat = 0.0;
    for (const StabilityRun& r : report.runs) {
        if (r.above_h0) {
            continue;
        }
        any = true;
        report.min_gamma_hat = std::min(report.min_gamma_hat, r.gamma_hat);
        report.max_c_hat = std::max(report.max_c_hat, r.c_hat);
        ok = ok && r.gamma_hat > 0.0 && r.v_monotone;
    }
    if (!any) {
        report.min_gamma_hat = 0.0;
    }
    report.passed = ok && any;
    return report;
}

}  // namespace swistab::feedback
