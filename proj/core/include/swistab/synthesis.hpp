#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "swistab/config.hpp"
#include "swistab/model.hpp"
#include "swistab/pmq.hpp"

namespace swistab::synth {

/// Discrete-time switched system x_{k+1} = E_i x_k obtained by sampling with period h.
struct Dtsls {
    double h = 0.0;
    std::vector<Matrix> maps;

    std::size_t dim() const { return static_cast<std::size_t>(maps.front().rows()); }
    std::size_t num_modes() const { return maps.size(); }
};

/// E_i = e^{A_i h}. Throws InvalidArgument for h <= 0.
Dtsls sample_dtsls(const SwitchedLinearSystem& sys, double h);

/// Wraps explicit maps (any square matrices of one dimension).
Dtsls make_dtsls(double h, std::vector<Matrix> maps);

struct PruneConfig {
    bool dominance = true;
    bool sample = false;
    /// Directions used by sample pruning; 0 selects the default grid size.
    std::size_t sample_count = 0;
    std::uint64_t sample_seed = 1;
    /// Held-out directions on which the effect of sample pruning is measured.
    std::size_t holdout_count = 2048;
    std::uint64_t holdout_seed = 2;
};

/// Per-step pruning record of value iteration.
struct PruneStep {
    std::size_t candidates = 0;
    std::size_t duplicates = 0;
    std::size_t dominated = 0;
    std::size_t sampled = 0;
    /// max relative change of V on the held-out set caused by sample pruning.
    double sample_deviation = 0.0;
};

struct ValueIterState {
    std::size_t horizon = 0;
    std::vector<SymMatrix> set;
    std::vector<PruneStep> prune_log;

    pmq::PmPqf function() const { return pmq::PmPqf(set); }
    double max_sample_deviation() const;
};

/// H_0 = {I}; H_{k+1} = prune({I + E_i^T P E_i : i, P in H_k}). The result
/// represents V_N(z) = min over mode sequences of sum_{k=0}^N ||x_k||^2.
/// Throws CapExceeded when |H| exceeds tol.set_size_cap after pruning.
ValueIterState value_iteration(const Dtsls& dt, long horizon, const PruneConfig& prune = {},
                               const Tolerances& tol = default_tolerances());

/// Exact V_N(z) by enumerating all M^N mode sequences.
double brute_force_value(const Dtsls& dt, long horizon, const Vector& z,
                         const Tolerances& tol = default_tolerances());

/// Canonical order (by trace, then entries) with bitwise duplicates removed.
std::vector<SymMatrix> canonicalize(std::vector<SymMatrix> set);

/// Drops P whenever another kept P' satisfies P - P' >= 0, tested by a
/// Cholesky factorization of P - P' + psd_slack I. Near-equal pairs keep the
/// earlier matrix in canonical order.
std::vector<SymMatrix> prune_dominance(const std::vector<SymMatrix>& set,
                                       const Tolerances& tol = default_tolerances());

/// Keeps only matrices that are strictly minimal (by strict_margin) on at
/// least one direction of a deterministic unit-sphere sample. Heuristic: may
/// change V off the sample set.
std::vector<SymMatrix> prune_sample(const std::vector<SymMatrix>& set, std::size_t n_samples,
                                    std::uint64_t seed,
                                    const Tolerances& tol = default_tolerances());

struct DecreaseCheck {
    double kappa = 0.0;
    Vector worst_point;
    bool passed() const { return kappa > 0.0; }
};

/// kappa_dt = -max_z min_i {V(E_i z) - V(z)} over unit grid directions.
DecreaseCheck verify_dt_decrease(const Dtsls& dt, const pmq::PmPqf& v,
                                 const std::vector<Vector>& grid);

/// kappa_ct = -max_z min_i DV(z; A_i z) / V(z) over unit grid directions:
/// the largest kappa with min_i DV <= -kappa V on the grid. Throws
/// NotPositiveDefinite if some piece of V is not positive definite.
DecreaseCheck verify_ct_decrease(const SwitchedLinearSystem& sys, const pmq::PmPqf& v,
                                 const std::vector<Vector>& grid,
                                 const Tolerances& tol = default_tolerances());

/// Sampling-period bound for the min-DV law:
/// kappa C_V^- / max_{i,k} ||A_i^T S_ik + S_ik A_i||, S_ik = A_i^T P_k + P_k A_i.
/// `kappa` is the rate with min_i DV <= -3 kappa V (i.e. kappa_ct / 3).
double compute_h0(const SwitchedLinearSystem& sys, const pmq::PmPqf& v, double kappa,
                  const Tolerances& tol = default_tolerances());

struct VerificationReport {
    double h = 0.0;
    std::size_t horizon = 0;
    std::size_t set_size = 0;
    std::size_t grid_size = 0;
    double kappa_dt = 0.0;
    double kappa_ct = 0.0;
    Vector worst_point_dt;
    Vector worst_point;
    double cv_minus = 0.0;
    double cv_plus = 0.0;
    /// compute_h0 with kappa = kappa_ct / 3 when kappa_ct > 0, else 0.
    double h0 = 0.0;
    bool passed_dt = false;
    bool passed_ct = false;
};

struct SynthesisResult {
    ValueIterState state;
    VerificationReport report;
};

/// Full pipeline: sample, iterate, check both decrease conditions on the
/// default grid and compute h0.
SynthesisResult synthesize(const SwitchedLinearSystem& sys, double h, long horizon,
                           const PruneConfig& prune = {}, std::size_t grid_count = 0,
                           std::uint64_t grid_seed = 0,
                           const Tolerances& tol = default_tolerances());

struct OrderRow {
    double h = 0.0;
    std::size_t horizon = 0;
    std::size_t set_size = 0;
    /// max over P in H_N of ||P||.
    double max_p_norm = 0.0;
    /// max over grid z of ||P' - P||, P = argmin at z, P' = argmin at E_i z
    /// with i the mode minimizing V(E_i z) - V(z).
    double max_delta_p_norm = 0.0;
};

/// Order-of-magnitude diagnostics for a sweep of sampling periods. The
/// horizon is held fixed in time: N = ceil(horizon_time / h).
std::vector<OrderRow> order_diagnostics(const SwitchedLinearSystem& sys, double horizon_time,
                                        const std::vector<double>& h_list,
                                        const PruneConfig& prune = {},
                                        std::size_t grid_count = 0,
                                        const Tolerances& tol = default_tolerances());

struct BridgeRow {
    double h = 0.0;
    std::size_t horizon = 0;
    double kappa_dt = 0.0;
    double kappa_ct = 0.0;
};

struct BridgeSweep {
    std::vector<BridgeRow> rows;
    /// Smallest h whose V passes both decrease checks; 0 when none does.
    double smallest_passing_h = 0.0;
};

/// Runs the pipeline at every h with N = ceil(horizon_time / h) and records
/// both decrease margins for the same V.
BridgeSweep taylor_bridge_sweep(const SwitchedLinearSystem& sys, double horizon_time,
                                const std::vector<double>& h_list,
                                const PruneConfig& prune = {}, std::size_t grid_count = 0,
                                const Tolerances& tol = default_tolerances());

struct GeneratedSystem {
    SwitchedLinearSystem system;
    /// Hurwitz matrix equal to the equal-weight average of the modes.
    Matrix mean_generator;
    /// True when no draw made every individual mode non-Hurwitz.
    bool trivially_stabilizable = false;
};

/// Random stabilizable system: a Hurwitz mean generator (shifted until
/// A + margin I is Hurwitz) plus zero-sum perturbations scaled up until every
/// mode on its own is not Hurwitz. Deterministic in `seed`.
GeneratedSystem gen_stabilizable(std::uint64_t seed, std::size_t n, std::size_t num_modes,
                                 double margin);

}  // namespace swistab::synth
