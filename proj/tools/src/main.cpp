#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "swistab/chattering.hpp"
#include "swistab/errors.hpp"
#include "swistab/feedback.hpp"
#include "swistab/grid.hpp"
#include "swistab/parallel.hpp"
#include "swistab/synthesis.hpp"
#include "swistab_tools/io.hpp"

namespace fs = std::filesystem;
using namespace swistab;
using io::json;

namespace {

enum ExitCode : int { kOk = 0, kInputError = 1, kCapExceeded = 2, kNotCertified = 3 };

struct Options {
    std::string system;
    std::string clf;
    std::string relaxed;
    std::string out = ".";
    double h = 0.1;
    long horizon = 30;
    std::size_t grid = 0;
    std::string prune = "dominance";
    std::uint64_t seed = 0;
    std::string z;
    double tmax = 10.0;
    std::string schedule = "uniform:0.02";
    std::size_t threads = 0;
    std::string law = "min-dv";
    std::string sequence;
    double horizon_time = 2.0;
    double epsilon = 0.1;
    std::string h_list;
    std::string kind = "order";
    std::size_t z_count = 16;
    std::size_t n = 2;
    std::size_t modes = 2;
    double margin = 0.1;
    double dt_record = 0.01;
};

json tolerances_json(const Tolerances& tol) {
    return json{{"tol_active", tol.tol_active},
                {"psd_slack", tol.psd_slack},
                {"strict_margin", tol.strict_margin},
                {"jacobi_offdiag", tol.jacobi_offdiag},
                {"pade_scale_target", tol.pade_scale_target},
                {"lyapunov_singular_rel", tol.lyapunov_singular_rel},
                {"monotone_rel", tol.monotone_rel},
                {"fit_skip_fraction", tol.fit_skip_fraction}};
}

/// Full record of a run: command, every option, tolerances, caps, seeds and
/// the SHA-256 of each input file. Contains no timestamps and no output
/// path, so identical invocations produce identical bytes.
json run_config(const std::string& command, const Options& o) {
    const Tolerances& tol = default_tolerances();
    json inputs = json::object();
    for (const auto& [name, path] : std::map<std::string, std::string>{
             {"system", o.system}, {"clf", o.clf}, {"relaxed", o.relaxed}}) {
        if (!path.empty()) {
            inputs[name] = json{{"path", path}, {"sha256", io::sha256_file(path)}};
        }
    }
    return json{
        {"tool", "swistab"},
        {"version", "0.1.0"},
        {"command", command},
        {"options",
         {{"h", o.h},
          {"horizon", o.horizon},
          {"grid", o.grid},
          {"prune", o.prune},
          {"z", o.z},
          {"tmax", o.tmax},
          {"schedule", o.schedule},
          {"threads", o.threads},
          {"law", o.law},
          {"sequence", o.sequence},
          {"horizon_time", o.horizon_time},
          {"epsilon", o.epsilon},
          {"h_list", o.h_list},
          {"kind", o.kind},
          {"z_count", o.z_count},
          {"n", o.n},
          {"modes", o.modes},
          {"margin", o.margin},
          {"dt_record", o.dt_record}}},
        {"tolerances", tolerances_json(tol)},
        {"caps", {{"set_size", tol.set_size_cap}, {"enumeration", tol.enumeration_cap}}},
        {"seeds", {{"seed", o.seed}}},
        {"inputs", inputs}};
}

fs::path out_dir(const Options& o) {
    fs::path dir(o.out);
    fs::create_directories(dir);
    return dir;
}

void write_run(const fs::path& dir, const std::string& command, const Options& o) {
    io::write_json(dir / "run.json", run_config(command, o));
}

SwitchedLinearSystem load_system(const Options& o) {
    if (o.system.empty()) {
        throw io::InputError("--system is required");
    }
    return io::system_from_json(io::read_json(o.system));
}

pmq::PmPqf load_clf_or_identity(const Options& o, std::size_t n) {
    if (o.clf.empty()) {
        return pmq::PmPqf({SymMatrix::identity(static_cast<Eigen::Index>(n))});
    }
    return io::clf_from_json(io::read_json(o.clf));
}

Vector parse_state(const Options& o, std::size_t n) {
    if (o.z.empty()) {
        throw io::InputError("--z is required");
    }
    const std::vector<double> v = io::parse_real_list(o.z, "--z");
    if (v.size() != n) {
        throw DimensionError("--z has " + std::to_string(v.size()) + " entries, system has n = " +
                             std::to_string(n));
    }
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

synth::PruneConfig parse_prune(const Options& o) {
    synth::PruneConfig cfg;
    cfg.dominance = false;
    cfg.sample_seed = o.seed;
    for (const std::string& item : CLI::detail::split(o.prune, ',')) {
        if (item == "dominance") {
            cfg.dominance = true;
        } else if (item == "sample") {
            cfg.sample = true;
        } else if (item != "none") {
            throw io::InputError("--prune: unknown rule \"" + item + "\"");
        }
    }
    return cfg;
}

double parse_uniform_schedule(const std::string& text) {
    const std::string prefix = "uniform:";
    if (text.rfind(prefix, 0) != 0) {
        throw io::InputError("--schedule must have the form uniform:H");
    }
    return io::parse_real_list(text.substr(prefix.size()), "--schedule").at(0);
}

std::vector<double> h_list_or(const Options& o, std::vector<double> fallback) {
    return o.h_list.empty() ? fallback : io::parse_real_list(o.h_list, "--h-list");
}

int cmd_synthesize(const Options& o) {
    const SwitchedLinearSystem sys = load_system(o);
    const synth::PruneConfig prune = parse_prune(o);
    spdlog::info("synthesize: h = {}, N = {}, prune = {}", o.h, o.horizon, o.prune);
    const synth::SynthesisResult res = synth::synthesize(sys, o.h, o.horizon, prune, o.grid, o.seed);
    const synth::VerificationReport& r = res.report;

    const fs::path dir = out_dir(o);
    const json cfg = run_config("synthesize", o);
    json clf = io::clf_to_json(res.state.function());
    clf["run_config"] = cfg;
    io::write_json(dir / "clf.json", clf);

    json log = json::array();
    for (std::size_t k = 0; k < res.state.prune_log.size(); ++k) {
        const synth::PruneStep& s = res.state.prune_log[k];
        log.push_back(json{{"step", k + 1},
                           {"candidates", s.candidates},
                           {"duplicates", s.duplicates},
                           {"dominance", s.dominated},
                           {"sample", s.sampled},
                           {"sample_deviation", s.sample_deviation}});
    }
    json report{{"kappa_dt", r.kappa_dt},
                {"kappa_ct", r.kappa_ct},
                {"h0", r.h0},
                {"cv_minus", r.cv_minus},
                {"cv_plus", r.cv_plus},
                {"grid", r.grid_size},
                {"worst_point", io::vector_to_json(r.worst_point)},
                {"worst_point_dt", io::vector_to_json(r.worst_point_dt)},
                {"h", r.h},
                {"N", r.horizon},
                {"set_size", r.set_size},
                {"passed_dt", r.passed_dt},
                {"passed_ct", r.passed_ct},
                {"max_sample_deviation", res.state.max_sample_deviation()},
                {"prune_log", log},
                {"run_config", cfg}};
    io::write_json(dir / "report.json", report);
    write_run(dir, "synthesize", o);

    spdlog::info("kappa_dt = {}, kappa_ct = {}, h0 = {}, |H| = {}", r.kappa_dt, r.kappa_ct, r.h0,
                 r.set_size);
    if (!r.passed_ct) {
        std::cerr << "no decrease certified on grid (kappa_ct = " << r.kappa_ct << ")\n";
        return kNotCertified;
    }
    return kOk;
}

int cmd_verify(const Options& o) {
    const SwitchedLinearSystem sys = load_system(o);
    if (o.clf.empty()) {
        throw io::InputError("--clf is required");
    }
    const pmq::PmPqf v = io::clf_from_json(io::read_json(o.clf));
    if (v.dim() != sys.dim()) {
        throw DimensionError("clf dimension " + std::to_string(v.dim()) +
                             " differs from system dimension " + std::to_string(sys.dim()));
    }

    json report = json::object();
    std::vector<std::string> failed;
    bool pd = true;
    pmq::CvBounds cv;
    try {
        cv = pmq::cv_bounds(v);
    } catch (const NotPositiveDefinite& e) {
        pd = false;
        report["positive_definite_detail"] = e.what();
    }
    report["positive_definite"] = pd;
    // A finite minimum of positive definite quadratics grows like ||x||^2.
    report["radially_unbounded"] = pd;
    report["radially_unbounded_basis"] = "derived from positive definiteness";
    if (!pd) {
        failed.emplace_back("positive_definite");
        failed.emplace_back("radially_unbounded");
        report["decrease"] = false;
        failed.emplace_back("decrease");
    } else {
        report["cv_minus"] = cv.minus;
        report["cv_plus"] = cv.plus;
        const auto grid = unit_grid(sys.dim(), o.grid, o.seed);
        const synth::DecreaseCheck c = synth::verify_ct_decrease(sys, v, grid);
        report["kappa_ct"] = c.kappa;
        report["worst_point"] = io::vector_to_json(c.worst_point);
        report["grid"] = grid.size();
        report["decrease"] = c.passed();
        report["h0"] = c.passed() ? synth::compute_h0(sys, v, c.kappa / 3.0) : 0.0;
        if (!c.passed()) {
            failed.emplace_back("decrease");
        }
    }
    json regions = json::array();
    bool all_regions = true;
    const std::size_t samples = o.grid == 0 ? default_grid_size(sys.dim()) : o.grid;
    for (std::size_t j = 0; j < v.size(); ++j) {
        const bool ok = pmq::region_nonempty(v, j, samples, o.seed);
        regions.push_back(ok);
        all_regions = all_regions && ok;
    }
    report["regions"] = regions;
    report["regions_nonempty"] = all_regions;
    if (!all_regions) {
        failed.emplace_back("regions_nonempty");
    }
    report["failed"] = failed;
    report["passed"] = failed.empty();
    report["run_config"] = run_config("verify", o);

    const fs::path dir = out_dir(o);
    io::write_json(dir / "report.json", report);
    write_run(dir, "verify", o);
    if (!failed.empty()) {
        std::cerr << "verification failed:";
        for (const std::string& f : failed) {
            std::cerr << ' ' << f;
        }
        std::cerr << '\n';
        return kNotCertified;
    }
    return kOk;
}

int cmd_simulate(const Options& o) {
    const SwitchedLinearSystem sys = load_system(o);
    const Vector z = parse_state(o, sys.dim());
    const fs::path dir = out_dir(o);

    if (!o.relaxed.empty()) {
        const RelaxedSignal signal = io::relaxed_from_json(io::read_json(o.relaxed));
        const Trajectory traj = propagate_relaxed(sys, signal, z, o.tmax, o.dt_record);
        io::write_trajectory_csv(dir / "trajectory.csv", traj);
        io::write_weights_csv(dir / "weights.csv", traj);
    } else if (!o.sequence.empty()) {
        std::vector<std::size_t> seq;
        for (double m : io::parse_real_list(o.sequence, "--sequence")) {
            if (m < 1.0 || m != std::floor(m) || m > static_cast<double>(sys.num_modes())) {
                throw io::InputError("--sequence entries must be modes in 1.." +
                                     std::to_string(sys.num_modes()));
            }
            seq.push_back(static_cast<std::size_t>(m) - 1);
        }
        const Trajectory traj = feedback::simulate_discrete(sys, seq, o.h, z, o.tmax, o.dt_record);
        io::write_trajectory_csv(dir / "trajectory.csv", traj);
    } else {
        if (o.law != "min-dv") {
            throw io::InputError("--law: only min-dv is available");
        }
        const feedback::FeedbackLaw law(load_clf_or_identity(o, sys.dim()), sys);
        const double h = parse_uniform_schedule(o.schedule);
        const feedback::ClosedLoopRun run = feedback::simulate_sh(
            law, feedback::SamplingSchedule::uniform(h), z, o.tmax, o.dt_record);
        io::write_trajectory_csv(dir / "trajectory.csv", run.trajectory);
    }
    write_run(dir, "simulate", o);
    return kOk;
}

int cmd_chatter(const Options& o) {
    const SwitchedLinearSystem sys = load_system(o);
    const Vector z = parse_state(o, sys.dim());
    const double horizon = o.tmax;
    const RelaxedSignal signal =
        o.relaxed.empty()
            ? RelaxedSignal::constant(
                  Vector::Constant(static_cast<Eigen::Index>(sys.num_modes()),
                                   1.0 / static_cast<double>(sys.num_modes())),
                  horizon)
            : io::relaxed_from_json(io::read_json(o.relaxed));
    const double gain = chatter::relaxed_gain(sys, signal, horizon, o.dt_record);
    const double hr = chatter::required_h(sys, horizon, gain, o.epsilon);
    const std::vector<double> hs = h_list_or(o, {hr, hr / 2.0, hr / 4.0, hr / 8.0});
    const auto rows = chatter::error_sweep(sys, signal, horizon, z, hs, gain, o.dt_record);

    const fs::path dir = out_dir(o);
    std::ofstream csv(dir / "chatter.csv");
    csv << "h,sup_error,bound\n";
    std::vector<double> errs;
    bool within = true;
    for (const chatter::SweepRow& r : rows) {
        csv << io::format_real(r.h) << ',' << io::format_real(r.sup_error) << ','
            << io::format_real(r.bound) << '\n';
        errs.push_back(r.sup_error);
        within = within && r.sup_error <= r.bound;
    }
    csv.close();
    json summary{{"required_h", hr},
                 {"gain_c", gain},
                 {"epsilon", o.epsilon},
                 {"horizon", horizon},
                 {"within_bound", within},
                 {"run_config", run_config("chatter", o)}};
    if (rows.size() >= 2) {
        summary["loglog_slope"] = chatter::loglog_slope(hs, errs);
    }
    io::write_json(dir / "chatter.json", summary);
    write_run(dir, "chatter", o);
    return kOk;
}

int cmd_diagnose(const Options& o) {
    const SwitchedLinearSystem sys = load_system(o);
    const fs::path dir = out_dir(o);
    const synth::PruneConfig prune = parse_prune(o);
    json summary = json::object();
    int code = kOk;

    if (o.kind == "order") {
        const std::vector<double> hs = h_list_or(o, {0.2, 0.1, 0.05, 0.025});
        const auto rows = synth::order_diagnostics(sys, o.horizon_time, hs, prune, o.grid);
        std::ofstream csv(dir / "diagnostics.csv");
        csv << "h,N,set_size,max_p_norm,max_delta_p_norm\n";
        std::vector<double> inv_h;
        std::vector<double> p;
        double lo = rows.front().max_delta_p_norm;
        double hi = lo;
        for (const synth::OrderRow& r : rows) {
            csv << io::format_real(r.h) << ',' << r.horizon << ',' << r.set_size << ','
                << io::format_real(r.max_p_norm) << ',' << io::format_real(r.max_delta_p_norm)
                << '\n';
            inv_h.push_back(1.0 / r.h);
            p.push_back(r.max_p_norm);
            lo = std::min(lo, r.max_delta_p_norm);
            hi = std::max(hi, r.max_delta_p_norm);
        }
        if (rows.size() >= 2) {
            summary["p_norm_slope"] = chatter::loglog_slope(inv_h, p);
        }
        summary["delta_p_ratio"] = lo > 0.0 ? hi / lo : 0.0;
    } else if (o.kind == "bridge") {
        const std::vector<double> hs = h_list_or(o, {0.2, 0.1, 0.05});
        const synth::BridgeSweep sweep =
            synth::taylor_bridge_sweep(sys, o.horizon_time, hs, prune, o.grid);
        std::ofstream csv(dir / "bridge.csv");
        csv << "h,N,kappa_dt,kappa_ct\n";
        for (const synth::BridgeRow& r : sweep.rows) {
            csv << io::format_real(r.h) << ',' << r.horizon << ',' << io::format_real(r.kappa_dt)
                << ',' << io::format_real(r.kappa_ct) << '\n';
        }
        summary["smallest_passing_h"] = sweep.smallest_passing_h;
    } else if (o.kind == "stability") {
        const feedback::FeedbackLaw law(load_clf_or_identity(o, sys.dim()), sys);
        const std::vector<double> hs = h_list_or(o, {o.h});
        const auto zs = unit_grid(sys.dim(), o.z_count, o.seed);
        const feedback::StabilityReport rep = feedback::stability_report(law, zs, hs, o.tmax);
        json runs = json::array();
        for (const feedback::StabilityRun& r : rep.runs) {
            runs.push_back(json{{"z", io::vector_to_json(r.z)},
                                {"h", r.h},
                                {"gamma_hat", r.gamma_hat},
                                {"C_hat", r.c_hat},
                                {"V_monotone", r.v_monotone},
                                {"above_h0", r.above_h0}});
        }
        summary["h0"] = rep.h0;
        summary["kappa_ct"] = rep.kappa_ct;
        summary["runs"] = runs;
        summary["min_gamma_hat"] = rep.min_gamma_hat;
        summary["max_C_hat"] = rep.max_c_hat;
        summary["flagged_h"] = rep.flagged_h;
        summary["passed"] = rep.passed;
        if (!rep.passed) {
            std::cerr << "stability report failed\n";
            code = kNotCertified;
        }
    } else {
        throw io::InputError("--kind must be order, bridge or stability");
    }
    summary["kind"] = o.kind;
    summary["run_config"] = run_config("diagnose", o);
    io::write_json(dir / (o.kind + ".json"), summary);
    write_run(dir, "diagnose", o);
    return code;
}

int cmd_generate(const Options& o) {
    const synth::GeneratedSystem g = synth::gen_stabilizable(o.seed, o.n, o.modes, o.margin);
    json out = io::system_to_json(g.system);
    out["mean_generator"] = io::matrix_to_json(g.mean_generator);
    out["trivially_stabilizable"] = g.trivially_stabilizable;
    out["run_config"] = run_config("generate", o);
    const fs::path dir = out_dir(o);
    io::write_json(dir / "system.json", out);
    write_run(dir, "generate", o);
    return kOk;
}

void configure_logging() {
    auto logger = spdlog::stderr_color_st("swistab");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("SWISTAB_LOG")) {
        const std::string level(env);
        if (level == "error") {
            spdlog::set_level(spdlog::level::err);
        } else if (level == "info") {
            spdlog::set_level(spdlog::level::info);
        } else if (level == "debug") {
            spdlog::set_level(spdlog::level::debug);
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    configure_logging();
    CLI::App app{"Stabilizability toolkit for switched linear systems"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--threads", o.threads, "Worker threads (0 = hardware)");
        sub->add_option("--seed", o.seed, "Seed for grids and generators");
    };
    auto* syn = app.add_subcommand("synthesize", "Value iteration and decrease checks");
    common(syn);
    syn->add_option("--system", o.system)->required();
    syn->add_option("--h", o.h, "Sampling period");
    syn->add_option("--horizon", o.horizon, "Horizon N");
    syn->add_option("--grid", o.grid, "Grid size (0 = default)");
    syn->add_option("--prune", o.prune, "dominance[,sample] or none");

    auto* ver = app.add_subcommand("verify", "Check the CLF conditions");
    common(ver);
    ver->add_option("--system", o.system)->required();
    ver->add_option("--clf", o.clf)->required();
    ver->add_option("--grid", o.grid, "Grid size (0 = default)");

    auto* sim = app.add_subcommand("simulate", "Closed- or open-loop simulation");
    common(sim);
    sim->add_option("--system", o.system)->required();
    sim->add_option("--clf", o.clf, "CLF JSON (default {I})");
    sim->add_option("--law", o.law, "Switching law");
    sim->add_option("--schedule", o.schedule, "uniform:H");
    sim->add_option("--z", o.z, "Initial state v1,v2,...")->required();
    sim->add_option("--tmax", o.tmax, "End time");
    sim->add_option("--relaxed", o.relaxed, "Relaxed signal JSON (open loop)");
    sim->add_option("--sequence", o.sequence, "Mode sequence 1,2,... (open loop, uses --h)");
    sim->add_option("--h", o.h, "Interval length for --sequence");
    sim->add_option("--dt-record", o.dt_record, "Recording step");

    auto* cha = app.add_subcommand("chatter", "Chattering error sweep");
    common(cha);
    cha->add_option("--system", o.system)->required();
    cha->add_option("--relaxed", o.relaxed, "Relaxed signal JSON (default equal weights)");
    cha->add_option("--z", o.z, "Initial state")->required();
    cha->add_option("--tmax", o.tmax, "Horizon T");
    cha->add_option("--epsilon", o.epsilon, "Target error per unit ||z||");
    cha->add_option("--h-list", o.h_list, "Comma-separated h values");
    cha->add_option("--dt-record", o.dt_record, "Recording step");

    auto* dia = app.add_subcommand("diagnose", "Order, bridge or stability diagnostics");
    common(dia);
    dia->add_option("--system", o.system)->required();
    dia->add_option("--kind", o.kind, "order | bridge | stability");
    dia->add_option("--clf", o.clf, "CLF JSON for --kind stability (default {I})");
    dia->add_option("--horizon-time", o.horizon_time, "Horizon in time units, N = ceil(T/h)");
    dia->add_option("--h-list", o.h_list, "Comma-separated h values");
    dia->add_option("--h", o.h, "Single sampling period for --kind stability");
    dia->add_option("--prune", o.prune, "dominance[,sample] or none");
    dia->add_option("--grid", o.grid, "Grid size (0 = default)");
    dia->add_option("--tmax", o.tmax, "Simulation end time");
    dia->add_option("--z-count", o.z_count, "Number of unit initial states");

    auto* gen = app.add_subcommand("generate", "Random stabilizable system");
    common(gen);
    gen->add_option("--n", o.n, "State dimension");
    gen->add_option("--modes", o.modes, "Number of modes");
    gen->add_option("--margin", o.margin, "Stability margin of the mean generator");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kInputError;
    }

    set_thread_count(o.threads);
    try {
        if (*syn) {
            return cmd_synthesize(o);
        }
        if (*ver) {
            return cmd_verify(o);
        }
        if (*sim) {
            return cmd_simulate(o);
        }
        if (*cha) {
            return cmd_chatter(o);
        }
        if (*dia) {
            return cmd_diagnose(o);
        }
        return cmd_generate(o);
    } catch (const CapExceeded& e) {
        spdlog::error("{}", e.what());
        return kCapExceeded;
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return kInputError;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kInputError;
    }
}
