#include "swistab/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>

#include "swistab/errors.hpp"
#include "swistab/grid.hpp"
#include "swistab/parallel.hpp"

namespace swistab::synth {

namespace {

using pmq::PmPqf;

bool canonical_less(const SymMatrix& a, const SymMatrix& b) {
    const double ta = a.mat().trace();
    const double tb = b.mat().trace();
    if (ta != tb) {
        return ta < tb;
    }
    const Matrix& x = a.mat();
    const Matrix& y = b.mat();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x.data()[i] != y.data()[i]) {
            return x.data()[i] < y.data()[i];
        }
    }
    return false;
}

// Cholesky of P - Q + slack I without materializing the difference.
bool difference_is_psd(const Matrix& p, const Matrix& q, double slack, std::vector<double>& l) {
    const Eigen::Index n = p.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (p(i, i) - q(i, i) + slack < 0.0) {
            return false;
        }
    }
    l.assign(static_cast<std::size_t>(n * n), 0.0);
    auto at = [&](Eigen::Index r, Eigen::Index c) -> double& {
        return l[static_cast<std::size_t>(r * n + c)];
    };
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = p(j, j) - q(j, j) + slack;
        for (Eigen::Index k = 0; k < j; ++k) {
            d -= at(j, k) * at(j, k);
        }
        if (!(d > 0.0)) {
            return false;
        }
        const double ljj = std::sqrt(d);
        at(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = p(i, j) - q(i, j);
            for (Eigen::Index k = 0; k < j; ++k) {
                s -= at(i, k) * at(j, k);
            }
            at(i, j) = s / ljj;
        }
    }
    return true;
}

std::vector<SymMatrix> sample_keep(const std::vector<SymMatrix>& set,
                                   const std::vector<Vector>& samples, const Tolerances& tol) {
    const std::size_t m = set.size();
    std::vector<char> keep(m, 0);
    std::vector<double> q(m);
    for (const Vector& x : samples) {
        std::size_t best = 0;
        for (std::size_t j = 0; j < m; ++j) {
            q[j] = set[j].quad(x);
            if (q[j] < q[best]) {
                best = j;
            }
        }
        double second = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j) {
            if (j != best) {
                second = std::min(second, q[j]);
            }
        }
        if (second - q[best] > tol.strict_margin * std::max(1.0, std::abs(q[best]))) {
            keep[best] = 1;
        }
    }
    std::vector<SymMatrix> out;
    for (std::size_t j = 0; j < m; ++j) {
        if (keep[j]) {
            out.push_back(set[j]);
        }
    }
    if (out.empty()) {
        // Every sample was a tie: keep the minimizers so V stays defined.
        std::vector<char> any(m, 0);
        for (const Vector& x : samples) {
            std::size_t best = 0;
            for (std::size_t j = 1; j < m; ++j) {
                if (set[j].quad(x) < set[best].quad(x)) {
                    best = j;
                }
            }
            any[best] = 1;
        }
        for (std::size_t j = 0; j < m; ++j) {
            if (any[j]) {
                out.push_back(set[j]);
            }
        }
    }
    return out;
}

double min_quad(const std::vector<SymMatrix>& set, const Vector& x) {
    double best = std::numeric_limits<double>::infinity();
    for (const SymMatrix& p : set) {
        best = std::min(best, p.quad(x));
    }
    return best;
}

std::size_t horizon_for(double horizon_time, double h) {
    const double steps = std::ceil(horizon_time / h - 1e-9);
    return static_cast<std::size_t>(std::max(1.0, steps));
}

}  // namespace

Dtsls sample_dtsls(const SwitchedLinearSystem& sys, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw InvalidArgument("sampling period must be positive and finite, got " +
                              std::to_string(h));
    }
    std::vector<Matrix> maps;
    maps.reserve(sys.num_modes());
    for (const Matrix& a : sys.modes()) {
        maps.push_back(linalg::mat_exp(a, h));
    }
    return Dtsls{h, std::move(maps)};
}

Dtsls make_dtsls(double h, std::vector<Matrix> maps) {
    if (maps.empty()) {
        throw InvalidArgument("discrete system needs at least one map");
    }
    const Eigen::Index n = maps.front().rows();
    for (const Matrix& e : maps) {
        if (e.rows() != n || e.cols() != n || n == 0) {
            throw DimensionError("discrete system maps must be square of one dimension");
        }
        if (!e.allFinite()) {
            throw InvalidArgument("discrete system map has non-finite entries");
        }
    }
    return Dtsls{h, std::move(maps)};
}

double ValueIterState::max_sample_deviation() const {
    double d = 0.0;
    for (const PruneStep& s : prune_log) {
        d = std::max(d, s.sample_deviation);
    }
    return d;
}

std::vector<SymMatrix> canonicalize(std::vector<SymMatrix> set) {
    std::sort(set.begin(), set.end(), canonical_less);
    set.erase(std::unique(set.begin(), set.end()), set.end());
    return set;
}

std::vector<SymMatrix> prune_dominance(const std::vector<SymMatrix>& set, const Tolerances& tol) {
    std::vector<SymMatrix> sorted = canonicalize(set);
    const std::size_t m = sorted.size();
    if (m <= 1) {
        return sorted;
    }
    const double slack = tol.psd_slack;
    const double n = static_cast<double>(sorted.front().dim());
    std::vector<double> trace(m);
    for (std::size_t i = 0; i < m; ++i) {
        trace[i] = sorted[i].mat().trace();
    }

    // P_i is dropped when some P_j lies below it. If the two are also below
    // each other (equal up to slack) only the later one is dropped. Since
    // dominance is transitive this removes exactly the non-minimal elements.
    std::vector<char> drop(m, 0);
    parallel_for(m, [&](std::size_t i) {
        thread_local std::vector<double> work;
        const Matrix& pi = sorted[i].mat();
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) {
                continue;
            }
            // P_i - P_j >= -slack I forces tr(P_j) <= tr(P_i) + n slack; the
            // list is sorted by trace so later j cannot qualify.
            if (trace[j] > trace[i] + n * slack) {
                break;
            }
            const Matrix& pj = sorted[j].mat();
            if (!difference_is_psd(pi, pj, slack, work)) {
                continue;
            }
            if (j < i || !difference_is_psd(pj, pi, slack, work)) {
                drop[i] = 1;
                return;
            }
        }
    });

    std::vector<SymMatrix> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!drop[i]) {
            out.push_back(std::move(sorted[i]));
        }
    }
    return out;
}

std::vector<SymMatrix> prune_sample(const std::vector<SymMatrix>& set, std::size_t n_samples,
                                    std::uint64_t seed, const Tolerances& tol) {
    std::vector<SymMatrix> sorted = canonicalize(set);
    if (sorted.size() <= 1) {
        return sorted;
    }
    const auto samples = unit_grid(static_cast<std::size_t>(sorted.front().dim()), n_samples, seed);
    return sample_keep(sorted, samples, tol);
}

ValueIterState value_iteration(const Dtsls& dt, long horizon, const PruneConfig& prune,
                               const Tolerances& tol) {
    if (horizon < 0) {
        throw InvalidArgument("horizon must be non-negative, got " + std::to_string(horizon));
    }
    if (dt.maps.empty()) {
        throw InvalidArgument("discrete system has no modes");
    }
    const auto n = static_cast<Eigen::Index>(dt.dim());
    const Matrix id = Matrix::Identity(n, n);

    ValueIterState state;
    state.set.push_back(SymMatrix::identity(n));

    std::vector<Vector> samples;
    std::vector<Vector> holdout;
    if (prune.sample) {
        samples = unit_grid(dt.dim(), prune.sample_count, prune.sample_seed);
        holdout = random_unit_vectors(dt.dim(), prune.holdout_count, prune.holdout_seed);
    }

    for (long k = 0; k < horizon; ++k) {
        const std::size_t prev = state.set.size();
        const std::size_t modes = dt.maps.size();
        std::vector<SymMatrix> cand(prev * modes, SymMatrix::identity(n));
        parallel_for(cand.size(), [&](std::size_t idx) {
            const Matrix& e = dt.maps[idx % modes];
            const Matrix& p = state.set[idx / modes].mat();
            cand[idx] = SymMatrix(id + e.transpose() * p * e);
        });

        PruneStep step;
        step.candidates = cand.size();
        std::vector<SymMatrix> next = canonicalize(std::move(cand));
        step.duplicates = step.candidates - next.size();
        if (prune.dominance) {
            const std::size_t before = next.size();
            next = prune_dominance(next, tol);
            step.dominated = before - next.size();
        }
        if (prune.sample && next.size() > 1) {
            const std::size_t before = next.size();
            std::vector<SymMatrix> kept = sample_keep(next, samples, tol);
            step.sampled = before - kept.size();
            for (const Vector& x : holdout) {
                const double full = min_quad(next, x);
                const double pruned = min_quad(kept, x);
                step.sample_deviation =
                    std::max(step.sample_deviation, std::abs(pruned - full) / full);
            }
            next = std::move(kept);
        }
        if (next.size() > tol.set_size_cap) {
            throw CapExceeded("value iteration: set size " + std::to_string(next.size()) +
                                  " exceeds cap at step " + std::to_string(k + 1),
                              tol.set_size_cap);
        }
        state.set = std::move(next);
        state.prune_log.push_back(step);
    }
    state.horizon = static_cast<std::size_t>(horizon);
    return state;
}

double brute_force_value(const Dtsls& dt, long horizon, const Vector& z, const Tolerances& tol) {
    if (horizon < 0) {
        throw InvalidArgument("horizon must be non-negative, got " + std::to_string(horizon));
    }
    if (static_cast<std::size_t>(z.size()) != dt.dim()) {
        throw DimensionError("initial state has dimension " + std::to_string(z.size()) +
                             ", expected " + std::to_string(dt.dim()));
    }
    const double modes = static_cast<double>(dt.maps.size());
    const double count = std::pow(modes, static_cast<double>(horizon));
    if (count > static_cast<double>(tol.enumeration_cap)) {
        throw CapExceeded("brute force: " + std::to_string(dt.maps.size()) + "^" +
                              std::to_string(horizon) + " sequences exceed the enumeration cap",
                          tol.enumeration_cap);
    }
    std::function<double(const Vector&, long)> cost = [&](const Vector& x, long depth) {
        const double here = x.squaredNorm();
        if (depth == horizon) {
            return here;
        }
        double best = std::numeric_limits<double>::infinity();
        for (const Matrix& e : dt.maps) {
            best = std::min(best, cost(e * x, depth + 1));
        }
        return here + best;
    };
    return cost(z, 0);
}

DecreaseCheck verify_dt_decrease(const Dtsls& dt, const PmPqf& v,
                                 const std::vector<Vector>& grid) {
    if (grid.empty()) {
        throw InvalidArgument("decrease check needs a nonempty grid");
    }
    if (v.dim() != dt.dim()) {
        throw DimensionError("function and discrete system dimensions differ");
    }
    std::vector<double> worst(grid.size());
    parallel_for(grid.size(), [&](std::size_t g) {
        const Vector& z = grid[g];
        const double vz = pmq::eval(v, z);
        double best = std::numeric_limits<double>::infinity();
        for (const Matrix& e : dt.maps) {
            best = std::min(best, pmq::eval(v, e * z) - vz);
        }
        worst[g] = best;
    });
    const auto it = std::max_element(worst.begin(), worst.end());
    return DecreaseCheck{-*it, grid[static_cast<std::size_t>(it - worst.begin())]};
}

DecreaseCheck verify_ct_decrease(const SwitchedLinearSystem& sys, const PmPqf& v,
                                 const std::vector<Vector>& grid, const Tolerances& tol) {
    if (grid.empty()) {
        throw InvalidArgument("decrease check needs a nonempty grid");
    }
    if (v.dim() != sys.dim()) {
        throw DimensionError("function and system dimensions differ");
    }
    (void)pmq::cv_bounds(v, tol);
    std::vector<double> worst(grid.size());
    parallel_for(grid.size(), [&](std::size_t g) {
        const Vector& z = grid[g];
        const double vz = pmq::eval(v, z);
        double best = std::numeric_limits<double>::infinity();
        for (const Matrix& a : sys.modes()) {
            best = std::min(best, pmq::directional_derivative(v, z, a * z, tol.tol_active));
        }
        worst[g] = best / vz;
    });
    const auto it = std::max_element(worst.begin(), worst.end());
    return DecreaseCheck{-*it, grid[static_cast<std::size_t>(it - worst.begin())]};
}

double compute_h0(const SwitchedLinearSystem& sys, const PmPqf& v, double kappa,
                  const Tolerances& tol) {
    if (!(kappa > 0.0)) {
        throw InvalidArgument("h0 needs a positive decay rate, got " + std::to_string(kappa));
    }
    if (v.dim() != sys.dim()) {
        throw DimensionError("function and system dimensions differ");
    }
    const pmq::CvBounds cv = pmq::cv_bounds(v, tol);
    double denom = 0.0;
    for (const Matrix& a : sys.modes()) {
        for (const SymMatrix& p : v.pieces()) {
            const Matrix s = a.transpose() * p.mat() + p.mat() * a;
            denom = std::max(denom, linalg::spectral_norm(a.transpose() * s + s * a, tol));
        }
    }
    if (denom == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return kappa * cv.minus / denom;
}

SynthesisResult synthesize(const SwitchedLinearSystem& sys, double h, long horizon,
                           const PruneConfig& prune, std::size_t grid_count,
                           std::uint64_t grid_seed, const Tolerances& tol) {
    const Dtsls dt = sample_dtsls(sys, h);
    SynthesisResult out;
    out.state = value_iteration(dt, horizon, prune, tol);
    const PmPqf v = out.state.function();
    const auto grid = unit_grid(sys.dim(), grid_count, grid_seed);

    VerificationReport& r = out.report;
    r.h = h;
    r.horizon = out.state.horizon;
    r.set_size = v.size();
    r.grid_size = grid.size();
    const DecreaseCheck d = verify_dt_decrease(dt, v, grid);
    r.kappa_dt = d.kappa;
    r.worst_point_dt = d.worst_point;
    r.passed_dt = d.passed();
    const DecreaseCheck c = verify_ct_decrease(sys, v, grid, tol);
    r.kappa_ct = c.kappa;
    r.worst_point = c.worst_point;
    r.passed_ct = c.passed();
    const pmq::CvBounds cv = pmq::cv_bounds(v, tol);
    r.cv_minus = cv.minus;
    r.cv_plus = cv.plus;
    r.h0 = r.passed_ct ? compute_h0(sys, v, r.kappa_ct / 3.0, tol) : 0.0;
    return out;
}

std::vector<OrderRow> order_diagnostics(const SwitchedLinearSystem& sys, double horizon_time,
                                        const std::vector<double>& h_list,
                                        const PruneConfig& prune, std::size_t grid_count,
                                        const Tolerances& tol) {
    if (!(horizon_time > 0.0)) {
        throw InvalidArgument("horizon time must be positive");
    }
    const auto grid = unit_grid(sys.dim(), grid_count, 0);
    std::vector<OrderRow> rows;
    for (double h : h_list) {
        const Dtsls dt = sample_dtsls(sys, h);
        OrderRow row;
        row.h = h;
        row.horizon = horizon_for(horizon_time, h);
        const ValueIterState state =
            value_iteration(dt, static_cast<long>(row.horizon), prune, tol);
        const PmPqf v = state.function();
        row.set_size = v.size();
        for (const SymMatrix& p : v.pieces()) {
            row.max_p_norm = std::max(row.max_p_norm, linalg::sym_eig_extremes(p, tol).second);
        }
        std::vector<double> delta(grid.size());
        parallel_for(grid.size(), [&](std::size_t g) {
            const Vector& z = grid[g];
            const double vz = pmq::eval(v, z);
            std::size_t mode = 0;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < dt.maps.size(); ++i) {
                const double d = pmq::eval(v, dt.maps[i] * z) - vz;
                if (d < best) {
                    best = d;
                    mode = i;
                }
            }
            const SymMatrix& p = v.piece(pmq::argmin_piece(v, z));
            const SymMatrix& q = v.piece(pmq::argmin_piece(v, dt.maps[mode] * z));
            const auto [lo, hi] = linalg::sym_eig_extremes(SymMatrix(q.mat() - p.mat()), tol);
            delta[g] = std::max(std::abs(lo), std::abs(hi));
        });
        row.max_delta_p_norm = *std::max_element(delta.begin(), delta.end());
        rows.push_back(row);
    }
    return rows;
}

BridgeSweep taylor_bridge_sweep(const SwitchedLinearSystem& sys, double horizon_time,
                                const std::vector<double>& h_list, const PruneConfig& prune,
                                std::size_t grid_count, const Tolerances& tol) {
    BridgeSweep out;
    for (double h : h_list) {
        const auto horizon = static_cast<long>(horizon_for(horizon_time, h));
        const SynthesisResult res = synthesize(sys, h, horizon, prune, grid_count, 0, tol);
        out.rows.push_back(BridgeRow{h, res.state.horizon, res.report.kappa_dt,
                                     res.report.kappa_ct});
        if (res.report.passed_dt && res.report.passed_ct &&
            (out.smallest_passing_h == 0.0 || h < out.smallest_passing_h)) {
            out.smallest_passing_h = h;
        }
    }
    return out;
}

GeneratedSystem gen_stabilizable(std::uint64_t seed, std::size_t n, std::size_t num_modes,
                                 double margin) {
    if (n < 2 || num_modes < 2) {
        throw InvalidArgument("generator needs n >= 2 and at least two modes");
    }
    if (!(margin >= 0.0)) {
        throw InvalidArgument("generator margin must be non-negative");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto dim = static_cast<Eigen::Index>(n);
    const Matrix id = Matrix::Identity(dim, dim);
    auto draw = [&]() {
        Matrix m(dim, dim);
        for (Eigen::Index j = 0; j < dim; ++j) {
            for (Eigen::Index i = 0; i < dim; ++i) {
                m(i, j) = normal(rng);
            }
        }
        return m;
    };

    Matrix mean = draw();
    mean /= std::max(linalg::spectral_norm(mean), std::numeric_limits<double>::min());
    double shift = 0.0;
    while (linalg::is_hurwitz(mean - shift * id + margin * id) != linalg::HurwitzResult::Hurwitz) {
        shift += 0.25;
    }
    mean -= shift * id;

    constexpr int kAttempts = 100;
    constexpr double kScaleStep = 0.1;
    // Perturbations larger than the mean generator itself are re-drawn.
    const double scale_max = 2.0 * linalg::spectral_norm(mean);
    std::vector<Matrix> last;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        std::vector<Matrix> b(num_modes);
        Matrix sum = Matrix::Zero(dim, dim);
        for (Matrix& bi : b) {
            bi = draw();
            sum += bi;
        }
        double largest = 0.0;
        for (Matrix& bi : b) {
            bi -= sum / static_cast<double>(num_modes);
            largest = std::max(largest, linalg::spectral_norm(bi));
        }
        if (largest == 0.0) {
            continue;
        }
        for (Matrix& bi : b) {
            bi /= largest;
        }
        for (double c = kScaleStep; c <= scale_max; c += kScaleStep) {
            std::vector<Matrix> modes;
            bool all_unstable = true;
            for (const Matrix& bi : b) {
                modes.push_back(mean + c * bi);
                if (linalg::is_hurwitz(modes.back()) == linalg::HurwitzResult::Hurwitz) {
                    all_unstable = false;
                }
            }
            if (all_unstable) {
                return GeneratedSystem{SwitchedLinearSystem(std::move(modes)), mean, false};
            }
            last = std::move(modes);
        }
    }
    return GeneratedSystem{SwitchedLinearSystem(std::move(last)), mean, true};
}

}  // namespace swistab::synth
