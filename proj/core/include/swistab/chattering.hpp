#pragma once

#include <cstddef>
#include <vector>

#include "swistab/model.hpp"

namespace swistab::chatter {

/// Slot boundaries of the sequential construction: on subinterval k,
/// slot_times[k] = {t_{k,0} = k h, t_{k,1}, ..., t_{k,M}}, where slot i has
/// length equal to the integral of weight i over the subinterval.
struct ChatterPlan {
    double h = 0.0;
    double horizon = 0.0;
    std::vector<std::vector<double>> slot_times;
};

/// Partitions [0, T] into subintervals of length h (the last may be shorter)
/// and lays out one slot per mode in ascending mode order.
ChatterPlan build_plan(const RelaxedSignal& signal, double h, double horizon);

/// Pure signal realizing the plan: mode i on [t_{k,i}, t_{k,i+1}). Zero-length
/// slots are dropped and adjacent slots with the same mode are merged.
PureSignal build_pure(const RelaxedSignal& signal, double h, double horizon);

/// sup ||x_pure(t) - x_relaxed(t)|| over the recording grid plus every
/// breakpoint of the pure signal in [0, T]; both flows propagated exactly.
double chatter_error(const SwitchedLinearSystem& sys, const RelaxedSignal& signal, double h,
                     double horizon, const Vector& z, double dt_record = 0.01);

/// Subinterval length guaranteeing error < epsilon ||z|| on [0, T] for a
/// relaxed trajectory with ||x(t)|| <= C ||z||: (epsilon / kappa) e^{-L1 T}
/// with kappa = T M L1^2 C.
double required_h(const SwitchedLinearSystem& sys, double horizon, double gain_c,
                  double epsilon);

/// Error bound per unit ||z|| implied at a given h: kappa h e^{L1 T}. It is
/// the inverse of required_h in epsilon.
double error_bound(const SwitchedLinearSystem& sys, double horizon, double gain_c, double h);

/// max over the recording grid (plus signal breakpoints) of the spectral norm
/// of the relaxed transition matrix, i.e. the smallest C with
/// ||x(t)|| <= C ||z|| for every z on that grid.
double relaxed_gain(const SwitchedLinearSystem& sys, const RelaxedSignal& signal, double horizon,
                    double dt_record = 0.01);

struct SweepRow {
    double h = 0.0;
    double sup_error = 0.0;
    double bound = 0.0;
};

/// chatter_error for each h (run in parallel, returned in input order) with
/// the matching error_bound scaled by ||z||.
std::vector<SweepRow> error_sweep(const SwitchedLinearSystem& sys, const RelaxedSignal& signal,
                                  double horizon, const Vector& z,
                                  const std::vector<double>& h_list, double gain_c,
                                  double dt_record = 0.01);

/// Least-squares slope of log(error) against log(h).
double loglog_slope(const std::vector<double>& h, const std::vector<double>& err);

}  // namespace swistab::chatter
