#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "resfront/certificates.hpp"
#include "resfront/classifier.hpp"
#include "resfront/errors.hpp"
#include "resfront/io.hpp"
#include "resfront/phase_plane.hpp"
#include "resfront/semiwave.hpp"
#include "resfront/solver.hpp"
#include "resfront/threshold.hpp"

namespace resfront::cli {

namespace fs = std::filesystem;
using io::json;

enum Exit : int { Ok = 0, Invalid = 1, NumericalFailure = 2, Inconclusive = 3 };

struct Common {
    std::string config;
    std::string out;
    std::optional<double> sigma, alpha, h0, t_horizon;
    std::optional<int> n;
};

namespace cli_detail {

inline void add_common(CLI::App* app, Common& c, bool config_required = false) {
    auto* opt = app->add_option("-c,--config", c.config, "run config (.toml or .json)");
    if (config_required) opt->required();
    app->add_option("-o,--out", c.out, "output directory");
    app->add_option("--sigma", c.sigma, "override sigma");
    app->add_option("--alpha", c.alpha, "override alpha");
    app->add_option("--h0", c.h0, "override h0");
    app->add_option("--n", c.n, "override the grid size");
    app->add_option("--t-horizon", c.t_horizon, "override horizons.t_horizon");
}

inline io::RunSettings load(const std::string& path, const Common& c) {
    json cfg = json::object();
    fs::path base = ".";
    if (!path.empty()) {
        cfg = io::load_config(path);
        if (fs::path(path).has_parent_path()) base = fs::path(path).parent_path();
    }
    if (c.sigma) cfg["sigma"] = *c.sigma;
    if (c.alpha) cfg["alpha"] = *c.alpha;
    if (c.h0) cfg["h0"] = *c.h0;
    if (c.n) cfg["n"] = *c.n;
    if (c.t_horizon) cfg["horizons"]["t_horizon"] = *c.t_horizon;
    return io::parse_settings(cfg, base);
}

inline io::RunSettings load(const Common& c) { return load(c.config, c); }

// --out, then output.dir from the config, then $RESFRONT_OUT_DIR, then ./resfront_out.
inline fs::path output_dir(const Common& c, const io::RunSettings* settings) {
    fs::path dir;
    if (!c.out.empty()) dir = c.out;
    else if (settings && !settings->output.dir.empty()) dir = settings->output.dir;
    else if (const char* env = std::getenv("RESFRONT_OUT_DIR"); env && *env) dir = env;
    else dir = "resfront_out";
    fs::create_directories(dir);
    return dir;
}

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline int exit_for(const Outcome& o, Termination t) {
    if (t == Termination::NumericalFailure) return NumericalFailure;
    return o.verdict == Verdict::Undetermined ? Inconclusive : Ok;
}

inline void print_advisory(const CheckedInitial& init, const io::RunSettings& s) {
    const auto cert = vanishing_certificate(init, s.nl, s.alpha, s.certificates);
    if (cert)
        std::cerr << "advisory: vanishing certified a priori (" << to_string(cert->reason)
                  << ", margin " << num(cert->margin) << ")\n";
}

struct RunResult {
    Trajectory trajectory;
    Outcome outcome;
};

inline RunResult run_one(const io::RunSettings& s, const CheckedInitial& init, bool keep_checkpoints) {
    RunConfig rc = s.run;
    rc.keep_checkpoints = keep_checkpoints;
    RunResult r;
    r.trajectory = simulate(init, s.nl, s.alpha, rc);
    r.outcome = detect_outcome(r.trajectory, s.nl, classify_stationary(s.nl, s.alpha), std::nullopt, s.classifier);
    return r;
}

}  // namespace cli_detail

inline int cmd_simulate(const Common& c) {
    using namespace cli_detail;
    const io::RunSettings s = load(c);
    const CheckedInitial init = validate_initial(io::make_initial(s));
    print_advisory(init, s);
    const json config = io::resolved(s);
    const auto r = run_one(s, init, s.output.profiles);
    const fs::path dir = output_dir(c, &s);
    json tj = io::trajectory_json(r.trajectory, config);
    tj["outcome"] = io::to_json(r.outcome);
    io::write_json(dir / "trajectory.json", tj);
    io::write_timeseries(dir / "timeseries.csv", r.trajectory, config);
    if (s.output.profiles) io::write_checkpoint_profiles(dir, r.trajectory, config);
    std::cout << "simulate: " << to_string(r.outcome.verdict) << " (" << to_string(r.trajectory.termination)
              << ") t_end=" << num(r.trajectory.final_state.t) << " width=" << num(r.trajectory.final_state.width())
              << " max_u=" << num(r.trajectory.final_state.max_u()) << " -> " << dir.string() << "\n";
    return exit_for(r.outcome, r.trajectory.termination);
}

inline int cmd_classify(const Common& c, const std::string& trajectory_path) {
    using namespace cli_detail;
    const json tj = json::parse(io::read_text(trajectory_path));
    const Trajectory tr = io::trajectory_from_json(tj);
    const fs::path traj_dir = fs::path(trajectory_path).has_parent_path() ? fs::path(trajectory_path).parent_path()
                                                                           : fs::path(".");
    const io::RunSettings s = c.config.empty() ? io::parse_settings(tj.value("config", json::object()), traj_dir) : load(c);
    const Outcome o = detect_outcome(tr, s.nl, classify_stationary(s.nl, tr.alpha), std::nullopt, s.classifier);
    const fs::path dir = output_dir(c, &s);
    json out = io::to_json(o);
    out["config"] = io::resolved(s);
    out["trajectory"] = trajectory_path;
    io::write_json(dir / "verdict.json", out);
    std::cout << "classify: " << to_string(o.verdict) << " - " << o.reason << "\n";
    return exit_for(o, tr.termination);
}

inline int cmd_compare(const Common& c, const std::string& lo_path, const std::string& hi_path) {
    using namespace cli_detail;
    const io::RunSettings lo = load(lo_path, c), hi = load(hi_path, c);
    const auto rlo = run_one(lo, validate_initial(io::make_initial(lo)), true);
    const auto rhi = run_one(hi, validate_initial(io::make_initial(hi)), true);
    const OrderingReport rep = compare_runs(rlo.trajectory, rhi.trajectory);
    const fs::path dir = output_dir(c, &lo);
    json out = {{"ordered", rep.ok()},
                {"checkpoints", rep.checkpoints},
                {"violations", rep.violations},
                {"worst_g_margin", io::nan_safe(rep.worst_g_margin)},
                {"worst_h_margin", io::nan_safe(rep.worst_h_margin)},
                {"worst_u_margin", io::nan_safe(rep.worst_u_margin)},
                {"max_abs_difference", rep.max_abs_difference},
                {"notes", rep.notes},
                {"lower", {{"config", io::resolved(lo)}, {"outcome", io::to_json(rlo.outcome)}}},
                {"upper", {{"config", io::resolved(hi)}, {"outcome", io::to_json(rhi.outcome)}}}};
    io::write_json(dir / "compare.json", out);
    std::cout << "compare: " << (rep.ok() ? "ordered" : "ORDER VIOLATED") << " at " << rep.checkpoints
              << " checkpoints, " << rep.violations << " violations\n";
    return rep.ok() ? Ok : Inconclusive;
}

inline int cmd_stationary(const Common& c) {
    using namespace cli_detail;
    const io::RunSettings s = load(c);
    const StationaryClass sc = classify_stationary(s.nl, s.alpha);
    const json config = io::resolved(s);
    const fs::path dir = output_dir(c, &s);
    json out = io::to_json(sc);
    out["config"] = config;
    if (sc.kind == StationaryCase::CompactSupport) {
        const StationaryProfile p = profile_V(s.nl, s.alpha, s.stationary_n);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < p.x.size(); ++i) rows.push_back({p.x[i], p.v[i]});
        io::write_csv(dir / "stationary_profile.csv", config, {"x", "v"}, rows);
        out["support_width"] = p.support_width;
    }
    io::write_json(dir / "stationary.json", out);
    std::cout << "stationary: " << to_string(sc.kind) << " alpha0=" << num(sc.alpha0) << " B=" << num(sc.B)
              << " ell=" << (sc.ell.is_finite() ? num(sc.ell.value()) : std::string("inf")) << "\n";
    return Ok;
}

inline int cmd_semiwave(const Common& c) {
    using namespace cli_detail;
    const io::RunSettings s = load(c);
    const SemiWaveResult r = solve_cstar(s.nl, s.alpha);
    const json config = io::resolved(s);
    const fs::path dir = output_dir(c, &s);
    json out = {{"c_star", r.c_star},
                {"residual", r.residual_at_one},
                {"bracket_width", r.bracket_width},
                {"c_lo", r.c_lo},
                {"c_hi", r.c_hi},
                {"below", to_string(r.below)},
                {"above", to_string(r.above)},
                {"z_end", r.z_end},
                {"shots", r.shots},
                {"config", config}};
    io::write_json(dir / "semiwave.json", out);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < r.profile.z.size(); ++i)
        rows.push_back({r.profile.z[i], r.profile.q[i], r.profile.qprime[i]});
    io::write_csv(dir / "semiwave_profile.csv", config, {"z", "q", "qprime"}, rows);
    std::cout << "semiwave: c*=" << io::fmt(r.c_star) << " bracket=" << num(r.bracket_width)
              << " residual=" << num(r.residual_at_one) << "\n";
    return Ok;
}

inline int cmd_threshold(const Common& c) {
    using namespace cli_detail;
    const io::RunSettings s = load(c);
    ThresholdConfig tc = s.threshold;
    tc.progress = [](const std::string& m) { std::cerr << "  " << m << "\n"; };
    std::cerr << "threshold: projected cost about " << projected_simulations(tc) + 4
              << " simulations (scan + bisection + midpoint run)\n";
    const ThresholdResult r = find_sigma_star(io::make_initial(s), s.nl, s.alpha, tc);
    const json config = io::resolved(s);
    const fs::path dir = output_dir(c, &s);
    json out = io::to_json(r);
    out["config"] = config;
    io::write_json(dir / "threshold.json", out);
    std::vector<std::vector<double>> rows;
    for (const auto& e : r.log)
        rows.push_back({e.sigma, static_cast<double>(e.verdict), e.spread ? 1.0 : 0.0, e.fallback ? 1.0 : 0.0,
                        e.t_end, e.horizon});
    io::write_csv(dir / "threshold_log.csv", config,
                  {"sigma", "verdict_code", "spread", "fallback", "t_end", "horizon"}, rows);
    std::cout << "threshold: ";
    if (r.infinite) std::cout << "sigma* = inf (no spreading up to " << num(tc.sigma_cap) << ")";
    else if (r.no_vanishing) std::cout << "sigma* <= " << num(tc.sigma_floor) << " (spreads at the floor)";
    else
        std::cout << "sigma* in [" << io::fmt(r.sigma_lo) << ", " << io::fmt(r.sigma_hi) << "], midpoint "
                  << to_string(r.midpoint_outcome.verdict);
    std::cout << (r.inconclusive ? " [inconclusive]" : "") << "\n";
    return r.inconclusive ? Inconclusive : Ok;
}

inline int cmd_certify(const Common& c) {
    using namespace cli_detail;
    const io::RunSettings s = load(c);
    const CheckedInitial init = validate_initial(io::make_initial(s));
    const auto cert = vanishing_certificate(init, s.nl, s.alpha, s.certificates);
    const fs::path dir = output_dir(c, &s);
    json out = {{"certified", cert.has_value()}, {"config", io::resolved(s)}};
    if (cert) {
        out["reason"] = to_string(cert->reason);
        out["margin"] = cert->margin;
        out["detail"] = cert->detail;
    }
    io::write_json(dir / "certificate.json", out);
    std::cout << "certify: " << (cert ? std::string("vanishing (") + to_string(cert->reason) + ")"
                                      : std::string("no sufficient condition holds"))
              << "\n";
    return Ok;
}

struct SweepPoint {
    double sigma = 0.0, alpha = 0.0;
    std::string verdict;
    double t_star = 0.0, width = 0.0;
    bool numerical_failure = false;
    bool undetermined = false;
};

inline int cmd_sweep(const Common& c, unsigned jobs) {
    using namespace cli_detail;
    const io::RunSettings base = load(c);
    std::vector<double> sigmas = base.sweep.sigma.empty() ? std::vector<double>{base.sigma} : base.sweep.sigma;
    std::vector<double> alphas = base.sweep.alpha.empty() ? std::vector<double>{base.alpha} : base.sweep.alpha;
    std::sort(sigmas.begin(), sigmas.end());
    std::sort(alphas.begin(), alphas.end());
    std::vector<SweepPoint> pts;
    for (double sg : sigmas)
        for (double a : alphas) pts.push_back({sg, a});

    const fs::path dir = output_dir(c, &base);
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::string first_error;
    auto worker = [&] {
        for (std::size_t k = next++; k < pts.size(); k = next++) {
            SweepPoint& p = pts[k];
            try {
                io::RunSettings s = base;
                s.sigma = p.sigma;
                s.alpha = p.alpha;
                const json config = io::resolved(s);
                const auto r = run_one(s, validate_initial(io::make_initial(s)), false);
                p.verdict = to_string(r.outcome.verdict);
                p.t_star = r.outcome.t_star;
                p.width = r.trajectory.final_state.width();
                p.numerical_failure = r.trajectory.termination == Termination::NumericalFailure;
                p.undetermined = r.outcome.verdict == Verdict::Undetermined;
                char name[32];
                std::snprintf(name, sizeof name, "point_%04zu", k);
                json tj = io::trajectory_json(r.trajectory, config);
                tj["outcome"] = io::to_json(r.outcome);
                io::write_json(dir / (std::string(name) + ".json"), tj);
            } catch (const std::exception& e) {
                p.verdict = "error";
                p.numerical_failure = true;
                std::lock_guard<std::mutex> lock(err_mu);
                if (first_error.empty()) first_error = e.what();
            }
        }
    };
    const unsigned n_workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(pts.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::ofstream out(dir / "sweep.csv", std::ios::binary);
    if (!out) throw ValidationError("cannot write sweep.csv");
    out << "# config: " << io::resolved(base).dump() << "\n";
    out << "index,sigma,alpha,verdict,t_star,width\n";
    int failures = 0, undetermined = 0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const auto& p = pts[k];
        out << k << "," << io::fmt(p.sigma) << "," << io::fmt(p.alpha) << "," << p.verdict << ","
            << io::fmt(p.t_star) << "," << io::fmt(p.width) << "\n";
        failures += p.numerical_failure;
        undetermined += p.undetermined;
    }
    std::cout << "sweep: " << pts.size() << " points, " << failures << " failed, " << undetermined
              << " undetermined -> " << (dir / "sweep.csv").string() << "\n";
    if (!first_error.empty()) std::cerr << "first error: " << first_error << "\n";
    if (failures) return NumericalFailure;
    return undetermined ? Inconclusive : Ok;
}

/// Parses argv, dispatches to a subcommand and maps errors to exit codes.
inline int run(int argc, char** argv) {
    CLI::App app{"resfront: reaction-diffusion with resistant free boundaries"};
    app.require_subcommand(1);
    Common c;
    std::string trajectory, lo, hi;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());

    auto* sim = app.add_subcommand("simulate", "run one simulation and classify it");
    cli_detail::add_common(sim, c);
    auto* cls = app.add_subcommand("classify", "classify a stored trajectory");
    cls->add_option("trajectory,-t,--trajectory", trajectory, "trajectory.json from simulate")->required();
    cli_detail::add_common(cls, c);
    auto* cmp = app.add_subcommand("compare", "check the comparison ordering of two runs");
    cmp->add_option("--lower", lo, "config of the smaller data")->required();
    cmp->add_option("--upper", hi, "config of the larger data")->required();
    cli_detail::add_common(cmp, c);
    auto* sta = app.add_subcommand("stationary", "stationary classification and profile");
    cli_detail::add_common(sta, c);
    auto* sw = app.add_subcommand("semiwave", "semi-wave speed and profile");
    cli_detail::add_common(sw, c);
    auto* thr = app.add_subcommand("threshold", "locate the sharp threshold sigma*");
    cli_detail::add_common(thr, c);
    auto* cert = app.add_subcommand("certify", "a priori vanishing certificates");
    cli_detail::add_common(cert, c);
    auto* swp = app.add_subcommand("sweep", "grid of simulations over sigma and alpha");
    cli_detail::add_common(swp, c, true);
    swp->add_option("-j,--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Ok : Invalid;
    }

    try {
        if (*sim) return cmd_simulate(c);
        if (*cls) return cmd_classify(c, trajectory);
        if (*cmp) return cmd_compare(c, lo, hi);
        if (*sta) return cmd_stationary(c);
        if (*sw) return cmd_semiwave(c);
        if (*thr) return cmd_threshold(c);
        if (*cert) return cmd_certify(c);
        if (*swp) return cmd_sweep(c, jobs);
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return NumericalFailure;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Invalid;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Invalid;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Invalid;
    }
    return Invalid;
}

}  // namespace resfront::cli
