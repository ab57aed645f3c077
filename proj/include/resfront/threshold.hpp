#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "resfront/classifier.hpp"
#include "resfront/errors.hpp"
#include "resfront/nonlinearity.hpp"
#include "resfront/phase_plane.hpp"
#include "resfront/solver.hpp"

namespace resfront {

struct ThresholdConfig {
    double tol = 1e-3;            // relative bracket width sigma_hi - sigma_lo <= tol * sigma_hi
    double midpoint_tol = 1e-10;  // bisection continues to this relative width before the midpoint run
    double sigma_start = 1.0;
    double sigma_cap = 1e6;
    double sigma_floor = 1e-6;
    int max_horizon_doublings = 3;
    double midpoint_stall_window = 5.0;
    RunConfig run;
    ClassifierConfig classifier;
    std::function<void(const std::string&)> progress;  // optional progress sink
};

struct ThresholdEval {
    double sigma = 0.0;
    Verdict verdict = Verdict::Undetermined;
    bool spread = false;       // side of the bracket this run was put on
    bool fallback = false;     // undetermined after every horizon doubling, counted as not spreading
    double t_end = 0.0;        // T* for vanishing runs, final time otherwise
    double horizon = 0.0;
    std::string phase;         // scan, bisect or refine
};

struct ThresholdResult {
    double sigma_lo = 0.0;  // largest sigma placed on the vanishing side
    double sigma_hi = std::numeric_limits<double>::infinity();  // smallest sigma that spread
    bool infinite = false;      // nothing spread up to sigma_cap
    bool no_vanishing = false;  // everything down to sigma_floor spread
    bool inconclusive = false;  // some verdict needed the not-spreading fallback
    double coarse_lo = 0.0;     // bracket when the width first met tol
    double coarse_hi = 0.0;
    double midpoint_sigma = std::numeric_limits<double>::quiet_NaN();
    Outcome midpoint_outcome;
    Trajectory midpoint_run;
    std::vector<ThresholdEval> log;

    double width() const { return sigma_hi - sigma_lo; }
};

/// True when no logged vanishing verdict sits above a logged spreading one.
inline bool log_is_monotone(const std::vector<ThresholdEval>& log) {
    double lowest_spread = std::numeric_limits<double>::infinity();
    for (const auto& e : log)
        if (e.spread) lowest_spread = std::min(lowest_spread, e.sigma);
    for (const auto& e : log)
        if (!e.spread && e.sigma >= lowest_spread) return false;
    return true;
}

/// Rough number of simulations a threshold search needs, for cost warnings.
inline int projected_simulations(const ThresholdConfig& cfg, double bracket_ratio = 2.0) {
    const double bisect = std::log2(bracket_ratio / cfg.midpoint_tol);
    return 2 + static_cast<int>(std::ceil(std::max(0.0, bisect))) + 1;
}

/// Locates the sharp threshold sigma* for data sigma * phi by a doubling or
/// halving scan from sigma_start followed by bisection. Undetermined runs are
/// repeated at doubled horizons before being counted as not spreading.
inline ThresholdResult find_sigma_star(const InitialData& phi, const Nonlinearity& nl, double alpha,
                                       const ThresholdConfig& cfg = {}) {
    const auto cls = classify_nonlinearity(nl);
    if (cls.kind == NonlinearityClass::Other)
        throw PreconditionError("find_sigma_star: f must be monostable or bistable");
    const double a_max = std::sqrt(2.0 * nl.F(1.0));
    if (!(alpha > 0.0 && alpha < a_max))
        throw PreconditionError("find_sigma_star: need 0 < alpha < sqrt(2F(1)) = " + std::to_string(a_max));
    if (!(cfg.tol > 0.0)) throw PreconditionError("find_sigma_star: tol must be positive");

    const StationaryClass sc = classify_stationary(nl, alpha);
    ThresholdResult res;
    auto say = [&](const std::string& msg) {
        if (cfg.progress) cfg.progress(msg);
    };

    auto run_at = [&](double sigma, const RunConfig& rc) {
        InitialData d = phi;
        d.sigma = sigma;
        return simulate(validate_initial(d), nl, alpha, rc);
    };

    auto evaluate = [&](double sigma, const char* phase) {
        ThresholdEval e;
        e.sigma = sigma;
        e.phase = phase;
        RunConfig rc = cfg.run;
        rc.keep_checkpoints = false;
        rc.stall_stop = false;
        for (int k = 0; k <= cfg.max_horizon_doublings; ++k) {
            const Trajectory tr = run_at(sigma, rc);
            const Outcome o = detect_outcome(tr, nl, sc, std::nullopt, cfg.classifier);
            e.verdict = o.verdict;
            e.horizon = rc.t_horizon;
            e.t_end = o.verdict == Verdict::Vanishing ? o.t_star : tr.final_state.t;
            if (o.verdict == Verdict::Spreading || o.verdict == Verdict::Vanishing) break;
            rc.t_horizon *= 2.0;
        }
        e.spread = e.verdict == Verdict::Spreading;
        if (e.verdict != Verdict::Spreading && e.verdict != Verdict::Vanishing) {
            e.fallback = true;
            res.inconclusive = true;
        }
        res.log.push_back(e);
        say(std::string(phase) + " sigma = " + std::to_string(sigma) + " -> " + to_string(e.verdict));
        return e.spread;
    };

    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double s = cfg.sigma_start;
    if (evaluate(s, "scan")) {
        hi = s;
        while (true) {
            s /= 2.0;
            if (s < cfg.sigma_floor) {
                res.no_vanishing = true;
                res.sigma_lo = 0.0;
                res.sigma_hi = hi;
                return res;
            }
            if (!evaluate(s, "scan")) {
                lo = s;
                break;
            }
            hi = s;
        }
    } else {
        lo = s;
        while (true) {
            s *= 2.0;
            if (s > cfg.sigma_cap) {
                res.infinite = true;
                res.sigma_lo = lo;
                return res;
            }
            if (evaluate(s, "scan")) {
                hi = s;
                break;
            }
            lo = s;
        }
    }
    say("bracket [" + std::to_string(lo) + ", " + std::to_string(hi) + "], about " +
        std::to_string(projected_simulations(cfg, hi / lo)) + " more simulations");

    bool coarse_recorded = false;
    const double fine = std::min(cfg.tol, cfg.midpoint_tol > 0.0 ? cfg.midpoint_tol : cfg.tol);
    while (true) {
        if (!coarse_recorded && hi - lo <= cfg.tol * hi) {
            res.coarse_lo = lo;
            res.coarse_hi = hi;
            coarse_recorded = true;
        }
        if (hi - lo <= fine * hi) break;
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (evaluate(mid, coarse_recorded ? "refine" : "bisect") ? hi : lo) = mid;
    }
    if (!coarse_recorded) {
        res.coarse_lo = lo;
        res.coarse_hi = hi;
    }
    res.sigma_lo = lo;
    res.sigma_hi = hi;

    // Midpoint run: stop once the ends have been stalled for a while.
    RunConfig rc = cfg.run;
    rc.stall_stop = true;
    rc.eps_stall = cfg.classifier.eps_stall;
    rc.stall_window = cfg.midpoint_stall_window;
    rc.keep_checkpoints = false;
    res.midpoint_sigma = 0.5 * (lo + hi);
    res.midpoint_run = run_at(res.midpoint_sigma, rc);
    res.midpoint_outcome = detect_outcome(res.midpoint_run, nl, sc, std::nullopt, cfg.classifier);
    say("midpoint sigma = " + std::to_string(res.midpoint_sigma) + " -> " + to_string(res.midpoint_outcome.verdict));
    return res;
}

}  // namespace resfront
