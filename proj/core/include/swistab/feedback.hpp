#pragma once

#include <cstddef>
#include <vector>

#include "swistab/config.hpp"
#include "swistab/model.hpp"
#include "swistab/pmq.hpp"

namespace swistab::feedback {

/// Sampling times 0 = t_0 < t_1 < ... of a sample-and-hold run.
class SamplingSchedule {
public:
    /// t_k = k h. Throws InvalidArgument for h <= 0.
    static SamplingSchedule uniform(double h);
    /// Explicit times starting at 0 and strictly increasing.
    static SamplingSchedule explicit_times(std::vector<double> times);

    bool is_uniform() const noexcept { return uniform_; }
    double period() const noexcept { return h_; }
    const std::vector<double>& times() const noexcept { return times_; }
    /// Largest gap between consecutive sampling times.
    double diameter() const noexcept { return diameter_; }

    /// Sampling times in [0, t_max) followed by t_max. Throws InvalidArgument
    /// when explicit times stop before t_max.
    std::vector<double> instants(double t_max) const;

private:
    bool uniform_ = true;
    double h_ = 0.0;
    double diameter_ = 0.0;
    std::vector<double> times_;
};

/// Min-directional-derivative switching law for a fixed candidate function.
class FeedbackLaw {
public:
    FeedbackLaw(pmq::PmPqf clf, SwitchedLinearSystem sys,
                double tol_active = default_tolerances().tol_active);

    const pmq::PmPqf& clf() const noexcept { return clf_; }
    const SwitchedLinearSystem& system() const noexcept { return sys_; }
    double tol_active() const noexcept { return tol_active_; }

private:
    pmq::PmPqf clf_;
    SwitchedLinearSystem sys_;
    double tol_active_;
};

/// argmin_i DV(z; A_i z), lowest index on ties; mode 0 at z = 0.
std::size_t min_dv_law(const FeedbackLaw& law, const Vector& z);

struct SampleEvent {
    double t = 0.0;
    Vector x;
    std::size_t mode = 0;
};

struct ClosedLoopRun {
    Trajectory trajectory;
    /// State and chosen mode at every sampling instant before t_max.
    std::vector<SampleEvent> events;
};

/// Sample-and-hold solution: the law is evaluated at each sampling time and
/// the chosen mode is propagated exactly until the next one. Records on the
/// grid k dt_record and at sampling times; the recorded mode is the one held
/// on the interval starting at that time (the last held mode at t_max).
ClosedLoopRun simulate_sh(const FeedbackLaw& law, const SamplingSchedule& schedule,
                          const Vector& z, double t_max, double dt_record = 0.01);

/// Uniform-interval closed loop; identical to simulate_sh with uniform(h).
ClosedLoopRun simulate_discrete(const FeedbackLaw& law, double h, const Vector& z, double t_max,
                                double dt_record = 0.01);

/// Open-loop uniform switching sigma(t) = modes[k] on [k h, (k+1) h).
/// Throws InvalidArgument if the sequence does not cover [0, t_max].
Trajectory simulate_discrete(const SwitchedLinearSystem& sys,
                             const std::vector<std::size_t>& modes, double h, const Vector& z,
                             double t_max, double dt_record = 0.01);

struct StabilityRun {
    std::size_t z_index = 0;
    Vector z;
    double h = 0.0;
    double gamma_hat = 0.0;
    double c_hat = 0.0;
    /// V(x(t_{k+1})) <= V(x(t_k)) (1 + monotone_rel) at every sampling step.
    bool v_monotone = false;
    bool above_h0 = false;
};

struct StabilityReport {
    double kappa_ct = 0.0;
    /// compute_h0 at kappa_ct / 3, or 0 when no decrease is certified.
    double h0 = 0.0;
    /// Ordered by h index, then z index.
    std::vector<StabilityRun> runs;
    /// Aggregates over runs with h <= h0.
    double min_gamma_hat = 0.0;
    double max_c_hat = 0.0;
    std::vector<double> flagged_h;
    bool passed = false;
};

/// Runs simulate_sh for every (h, z) pair. Passes when kappa_ct > 0, at least
/// one h lies at or below h0, and every such run decays (gamma_hat > 0) with
/// monotone V.
StabilityReport stability_report(const FeedbackLaw& law, const std::vector<Vector>& z_set,
                                 const std::vector<double>& h_list, double t_max,
                                 const Tolerances& tol = default_tolerances());

}  // namespace swistab::feedback
