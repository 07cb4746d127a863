// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "swistab/chattering.hpp"
#include "swistab/feedback.hpp"
#include "swistab/grid.hpp"
#include "swistab/synthesis.hpp"

using namespace swistab;

namespace {

struct Outcome {
    bool ok = false;
    std::string detail;
};

SwitchedLinearSystem sys_a() {
    Matrix a1(2, 2);
    Matrix a2(2, 2);
    a1 << -1.0, 0.0, 0.0, 0.5;
    a2 << 0.5, 0.0, 0.0, -1.0;
    return SwitchedLinearSystem({a1, a2});
}

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

synth::PruneConfig dominance_and_sample() {
    synth::PruneConfig cfg;
    cfg.sample = true;
    return cfg;
}

Outcome ac1_oracle() {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const SwitchedLinearSystem sys = synth::gen_stabilizable(seed, 2, 2, 0.1).system;
        for (double h : {0.1, 0.5}) {
            const synth::Dtsls dt = synth::sample_dtsls(sys, h);
            for (long n = 0; n <= 6; ++n) {
                const pmq::PmPqf v = synth::value_iteration(dt, n).function();
                for (int k = 0; k < 100; ++k) {
                    const Vector z{{normal(rng), normal(rng)}};
                    worst = std::max(worst, std::abs(pmq::eval(v, z) -
                                                     synth::brute_force_value(dt, n, z)));
                }
            }
        }
    }
    return {worst <= 1e-9, fmt("max |V_N - oracle| = %.3g (tol 1e-9)", worst)};
}

Outcome ac2_chattering() {
    const double horizon = 1.0;
    const std::vector<double> sweep{0.2, 0.1, 0.05, 0.025};
    std::vector<SwitchedLinearSystem> systems{sys_a()};
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        systems.push_back(synth::gen_stabilizable(seed, 2, 2, 0.1).system);
    }
    const auto zs = unit_grid(2, 8);
    double worst_ratio = 0.0;
    double min_slope = INFINITY;
    for (const auto& sys : systems) {
        const Vector w = Vector::Constant(2, 0.5);
        const RelaxedSignal signal = RelaxedSignal::constant(w, horizon);
        const double c = chatter::relaxed_gain(sys, signal, horizon);
        for (double eps : {0.5, 0.1}) {
            const double h = chatter::required_h(sys, horizon, c, eps) / 2.0;
            for (const Vector& z : zs) {
                worst_ratio = std::max(
                    worst_ratio, chatter::chatter_error(sys, signal, h, horizon, z) / eps);
            }
        }
        std::vector<double> err(sweep.size(), 0.0);
        for (std::size_t i = 0; i < sweep.size(); ++i) {
            for (const Vector& z : zs) {
                err[i] = std::max(err[i], chatter::chatter_error(sys, signal, sweep[i], horizon, z));
            }
        }
        min_slope = std::min(min_slope, chatter::loglog_slope(sweep, err));
    }
    return {worst_ratio <= 1.0 && min_slope >= 0.8,
            fmt("%zu systems, max error/eps = %.3g (<= 1), min slope = %.3f (>= 0.8)",
                systems.size(), worst_ratio, min_slope)};
}

Outcome ac3_kappa() {
    const pmq::PmPqf v({SymMatrix::identity(2)});
    const double kappa = synth::verify_ct_decrease(sys_a(), v, unit_grid(2)).kappa;
    const double h0 = synth::compute_h0(sys_a(), v, 1.0 / 6.0);
    const bool ok = std::abs(kappa - 0.5) <= 0.01 && std::abs(h0 - 1.0 / 24.0) <= 1e-15;
    return {ok, fmt("kappa_ct = %.12g (0.5 +- 0.01), h0 = %.17g (1/24)", kappa, h0)};
}

Outcome ac4_decay() {
    const feedback::FeedbackLaw law(pmq::PmPqf({SymMatrix::identity(2)}), sys_a());
    const auto report = feedback::stability_report(law, unit_grid(2, 16), {1.0 / 48.0}, 10.0);
    bool monotone = true;
    for (const auto& r : report.runs) {
        monotone = monotone && r.v_monotone;
    }
    return {monotone && report.min_gamma_hat >= 0.2,
            fmt("16 runs, V monotone = %s, min gamma_hat = %.4f (>= 0.2)",
                monotone ? "yes" : "no", report.min_gamma_hat)};
}

bool same_trajectory(const Trajectory& a, const Trajectory& b) {
    if (a.samples.size() != b.samples.size()) {
        return false;
    }
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        if (a.samples[k].t != b.samples[k].t || a.samples[k].x != b.samples[k].x ||
            a.samples[k].mode != b.samples[k].mode) {
            return false;
        }
    }
    return true;
}

Outcome ac5_theorem_fragment() {
    int certified = 0;
    int passed = 0;
    bool bitwise = true;
    const auto zs = unit_grid(2, 8);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto gen = synth::gen_stabilizable(seed, 2, 2, 0.1);
        const auto res = synth::synthesize(gen.system, 0.05, 10, dominance_and_sample());
        if (!res.report.passed_ct) {
            continue;
        }
        ++certified;
        const feedback::FeedbackLaw law(res.state.function(), gen.system);
        const double h0 = res.report.h0;
        const std::vector<double> hs{h0 / 2.0, h0 / 4.0, h0 / 8.0};
        const auto report = feedback::stability_report(law, zs, hs, 2.0);
        passed += report.passed && report.flagged_h.empty() ? 1 : 0;
        for (double h : hs) {
            const auto d = feedback::simulate_discrete(law, h, zs.front(), 2.0);
            const auto s = feedback::simulate_sh(law, feedback::SamplingSchedule::uniform(h),
                                                 zs.front(), 2.0);
            bitwise = bitwise && same_trajectory(d.trajectory, s.trajectory);
        }
    }
    return {certified == 10 && passed == certified && bitwise,
            fmt("certified %d/10, stability passed %d/%d, discrete == sample-and-hold: %s",
                certified, passed, certified, bitwise ? "yes" : "no")};
}

Outcome ac6_order() {
    const std::vector<double> hs{0.2, 0.1, 0.05, 0.025};
    const auto rows = synth::order_diagnostics(sys_a(), 2.0, hs, dominance_and_sample());
    std::vector<double> inv_h;
    std::vector<double> p;
    double lo = INFINITY;
    double hi = 0.0;
    for (const auto& r : rows) {
        inv_h.push_back(1.0 / r.h);
        p.push_back(r.max_p_norm);
        lo = std::min(lo, r.max_delta_p_norm);
        hi = std::max(hi, r.max_delta_p_norm);
    }
    const double slope = chatter::loglog_slope(inv_h, p);
    return {slope >= 0.7 && slope <= 1.3 && hi / lo < 3.0,
            fmt("slope log||P|| vs log(1/h) = %.3f in [0.7, 1.3], ||dP|| range %.3g..%.3g "
                "(ratio %.2f < 3)",
                slope, lo, hi, hi / lo)};
}

Outcome ac7_suite() {
    const std::string cmd = std::string(SWISTAB_UNIT_TESTS_PATH) + " --gtest_brief=1 > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    const bool ok = WIFEXITED(status) && WEXITSTATUS(status) == 0;
    return {ok, ok ? "unit suite green" : "unit suite reported failures"};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"AC1 value-iteration oracle", 10.0, ac1_oracle},
        {"AC2 chattering guarantee", 30.0, ac2_chattering},
        {"AC3 analytic kappa and h0", 1.0, ac3_kappa},
        {"AC4 closed-loop decay", 5.0, ac4_decay},
        {"AC5 certified => sample-and-hold => discrete", 60.0, ac5_theorem_fragment},
        {"AC6 order diagnostics", 60.0, ac6_order},
        {"AC7 invariant suites", 300.0, ac7_suite},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool ok = out.ok && secs < c.budget_s;
        failures += ok ? 0 : 1;
        std::printf("%s %s: %s; %.2f s (budget %.0f s)\n", ok ? "PASS" : "FAIL", c.name,
                    out.detail.c_str(), secs, c.budget_s);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
