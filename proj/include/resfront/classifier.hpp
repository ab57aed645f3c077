#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "resfront/errors.hpp"
#include "resfront/interp.hpp"
#include "resfront/nonlinearity.hpp"
#include "resfront/phase_plane.hpp"
#include "resfront/solver.hpp"

namespace resfront {

enum class Verdict { Spreading, Vanishing, Transition, Undetermined };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Spreading: return "spreading";
        case Verdict::Vanishing: return "vanishing";
        case Verdict::Transition: return "transition";
        case Verdict::Undetermined: return "undetermined";
    }
    return "?";
}

/// Verdict conventions. None of these are properties of the equation; they
/// decide how close a finite run must come to each limit to be labeled.
struct ClassifierConfig {
    double equiv_window = 0.0;     // max shrink/vanish trigger lag; <= 0 means max(2 h0, width at vanish) / alpha
    double tail_fraction = 0.2;    // trailing share of the run used for speed averages
    double speed_match = 0.10;     // relative mismatch allowed between h' and -g'
    double plateau_tol = 0.05;     // interior max vs. the positive zero of f
    double width_tol = 0.05;       // |h - g - 2 ell| relative to 2 ell
    double profile_tol = 0.05;     // sup |u - V| relative to B
    double eps_stall = 1e-5;       // |h'| + |g'| at the end of a transition run
    double center_slack_dx = 10.0; // limit point of a vanishing run may leave [-h0, h0] by this many dx
};

struct Outcome {
    Verdict verdict = Verdict::Undetermined;
    double t_star = std::numeric_limits<double>::quiet_NaN();
    double width = std::numeric_limits<double>::quiet_NaN();
    double profile_error = std::numeric_limits<double>::quiet_NaN();
    bool presumptive = false;  // spreading inferred from domain overflow without plateau confirmation
    std::string reason;
    std::vector<std::string> failed;
    std::map<std::string, double> diagnostics;
};

namespace classifier_detail {

inline double window_mean(const std::vector<Sample>& s, double from, double Sample::*field, int& count) {
    double sum = 0.0;
    count = 0;
    for (const auto& x : s)
        if (x.t >= from) {
            sum += x.*field;
            ++count;
        }
    return count ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

// sup over grid nodes of |u(x) - V(x - c + ell)| with c the interval midpoint.
inline double centered_profile_error(const SolverState& s, const StationaryShape& V) {
    const double c = 0.5 * (s.g + s.h);
    double err = 0.0;
    for (int i = 0; i <= s.n(); ++i) err = std::max(err, std::abs(s.u[i] - V(s.x(i) - c + V.ell())));
    return err;
}

}  // namespace classifier_detail

/// Labels a finished trajectory as spreading, vanishing, transition or
/// undetermined, recording every check it made in `diagnostics`.
inline Outcome detect_outcome(const Trajectory& tr, const Nonlinearity& nl, const StationaryClass& sc,
                              std::optional<double> cstar = std::nullopt, const ClassifierConfig& cfg = {}) {
    Outcome out;
    const SolverState& fin = tr.final_state;
    out.width = fin.width();
    out.diagnostics["t_end"] = fin.t;
    out.diagnostics["width"] = fin.width();
    out.diagnostics["max_u"] = fin.max_u();
    out.diagnostics["monitor_violations"] = static_cast<double>(tr.monitors.violations());
    if (cstar) out.diagnostics["c_star"] = *cstar;

    const auto plateau = spreading_plateau(nl);
    auto plateau_ok = [&](double mx) {
        if (!plateau) return false;
        out.diagnostics["plateau"] = *plateau;
        out.diagnostics["plateau_gap"] = std::abs(mx - *plateau) / *plateau;
        return std::abs(mx - *plateau) <= cfg.plateau_tol * *plateau;
    };

    // An end beyond h0 + 2 ell puts a shifted V_alpha under u, which forces spreading.
    if (sc.kind == StationaryCase::CompactSupport) {
        const double reach = tr.h0 + 2.0 * sc.ell.value();
        for (const auto& x : tr.samples)
            if (x.h > reach || x.g < -reach) {
                out.diagnostics["passed_h0_plus_2ell_at"] = x.t;
                break;
            }
    }

    switch (tr.termination) {
        case Termination::ShrinkVanish: {
            double window = cfg.equiv_window;
            if (!(window > 0.0)) {
                // Once u is negligible each end retreats at about alpha, so the
                // interval needs roughly width / (2 alpha) to close.
                double w = 2.0 * tr.h0;
                for (const auto& x : tr.samples)
                    if (x.t >= tr.t_vanish - 1e-12) {
                        w = std::max(w, x.h - x.g);
                        break;
                    }
                window = w / tr.alpha;
            }
            out.t_star = tr.t_star;
            out.diagnostics["t_star"] = tr.t_star;
            out.diagnostics["lag"] = tr.lag;
            out.diagnostics["equiv_window"] = window;
            const double limit = 0.5 * (fin.g + fin.h);
            const double slack = cfg.center_slack_dx * tr.samples.front().dx;
            out.diagnostics["limit_point"] = limit;
            out.diagnostics["limit_outside_h0"] = std::abs(limit) > tr.h0 + slack ? 1.0 : 0.0;
            if (!(tr.lag <= window)) {
                out.failed.push_back("shrink and vanish triggers " + std::to_string(tr.lag) +
                                     " apart, beyond the equivalence window");
                out.reason = "shrink/vanish co-occurrence check failed";
                return out;
            }
            out.verdict = Verdict::Vanishing;
            out.reason = tr.floor_declared ? "interval collapsed (declared at the time-step floor)"
                                           : "interval collapsed with u below the vanishing level";
            return out;
        }
        case Termination::DomainOverflow: {
            out.verdict = Verdict::Spreading;
            out.presumptive = !plateau_ok(fin.max_u());
            out.diagnostics["presumptive"] = out.presumptive ? 1.0 : 0.0;
            out.reason = out.presumptive ? "domain overflow (presumptive, plateau not yet reached)"
                                         : "domain overflow with interior at the plateau";
            return out;
        }
        case Termination::NumericalFailure:
            out.reason = "numerical failure: " + tr.message;
            out.failed.push_back(out.reason);
            return out;
        case Termination::HorizonReached: break;
    }

    // Transition: width 2 ell, stalled ends, profile close to V_alpha.
    if (sc.kind == StationaryCase::CompactSupport) {
        const double two_ell = 2.0 * sc.ell.value();
        const double speed = std::abs(fin.gprime) + std::abs(fin.hprime);
        const double width_gap = std::abs(fin.width() - two_ell) / two_ell;
        out.diagnostics["two_ell"] = two_ell;
        out.diagnostics["width_gap"] = width_gap;
        out.diagnostics["end_speed"] = speed;
        bool ok = true;
        if (!(width_gap <= cfg.width_tol)) {
            ok = false;
            out.failed.push_back("width differs from 2 ell by " + std::to_string(100 * width_gap) + "%");
        }
        if (!(speed <= cfg.eps_stall)) {
            ok = false;
            out.failed.push_back("boundaries not stalled (|h'| + |g'| = " + std::to_string(speed) + ")");
        }
        if (ok) {
            const StationaryShape V(nl, sc.alpha);
            const double err = classifier_detail::centered_profile_error(fin, V);
            out.profile_error = err;
            out.diagnostics["profile_error"] = err;
            if (err <= cfg.profile_tol * V.B()) {
                out.verdict = Verdict::Transition;
                out.reason = "stalled at width 2 ell with the stationary profile";
                out.failed.clear();
                return out;
            }
            out.failed.push_back("profile differs from V_alpha by " + std::to_string(err));
        }
    } else {
        out.failed.push_back(std::string("no compact stationary profile (") + to_string(sc.kind) +
                             "), transition branch disabled");
    }

    // Spreading at the horizon: both ends still advancing at matching speeds
    // and the interior at the plateau.
    const double from = fin.t * (1.0 - cfg.tail_fraction);
    int count = 0;
    const double hp = classifier_detail::window_mean(tr.samples, from, &Sample::hprime, count);
    const double gp = classifier_detail::window_mean(tr.samples, from, &Sample::gprime, count);
    out.diagnostics["tail_mean_hprime"] = hp;
    out.diagnostics["tail_mean_minus_gprime"] = -gp;
    if (count >= 2 && hp > 0.0 && -gp > 0.0) {
        const double mismatch = std::abs(hp + gp) / std::max(hp, -gp);
        out.diagnostics["speed_mismatch"] = mismatch;
        if (mismatch <= cfg.speed_match && plateau_ok(fin.max_u())) {
            out.verdict = Verdict::Spreading;
            out.reason = "both ends advancing with the interior at the plateau";
            out.failed.clear();
            return out;
        }
        if (mismatch > cfg.speed_match) out.failed.push_back("end speeds do not match");
        else out.failed.push_back("interior not at the plateau");
    } else {
        out.failed.push_back("ends not both advancing over the final window");
    }
    out.reason = "no criterion met at the horizon";
    return out;
}

struct SpeedReport {
    double slope_right = 0.0;  // least-squares slope of h
    double slope_left = 0.0;   // least-squares slope of -g
    double drift_right = 0.0;  // max - min of h - slope t over the window
    double drift_left = 0.0;
    double rel_err_right = 0.0;
    double rel_err_left = 0.0;
    int samples = 0;
};

/// Asymptotic front speeds over the second half of the run, compared with c*.
inline SpeedReport spreading_speed(const Trajectory& tr, double cstar) {
    const double from = 0.5 * tr.final_state.t;
    std::vector<const Sample*> w;
    for (const auto& s : tr.samples)
        if (s.t >= from) w.push_back(&s);
    if (w.size() < 10) throw PreconditionError("spreading_speed: fewer than 10 samples in the second half of the run");
    auto fit = [&](auto value, double& slope, double& drift) {
        double st = 0, sv = 0, stt = 0, stv = 0;
        const double m = static_cast<double>(w.size());
        for (auto* s : w) {
            const double v = value(*s);
            st += s->t;
            sv += v;
            stt += s->t * s->t;
            stv += s->t * v;
        }
        slope = (m * stv - st * sv) / (m * stt - st * st);
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (auto* s : w) {
            const double r = value(*s) - slope * s->t;
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        drift = hi - lo;
    };
    SpeedReport rep;
    rep.samples = static_cast<int>(w.size());
    fit([](const Sample& s) { return s.h; }, rep.slope_right, rep.drift_right);
    fit([](const Sample& s) { return -s.g; }, rep.slope_left, rep.drift_left);
    rep.rel_err_right = std::abs(rep.slope_right - cstar) / cstar;
    rep.rel_err_left = std::abs(rep.slope_left - cstar) / cstar;
    return rep;
}

struct OrderingReport {
    int checkpoints = 0;
    long violations = 0;
    double worst_g_margin = std::numeric_limits<double>::infinity();  // g_lo - g_hi + tol
    double worst_h_margin = std::numeric_limits<double>::infinity();  // h_hi - h_lo + tol
    double worst_u_margin = std::numeric_limits<double>::infinity();  // u_hi - u_lo + tol
    double max_abs_difference = 0.0;  // largest |difference| seen in g, h or u
    std::vector<std::string> notes;
    bool ok() const { return violations == 0; }
};

/// Checks the comparison ordering of two runs at every checkpoint time they
/// share, with tolerance 5 dx (the coarser of the two grids).
inline OrderingReport compare_runs(const Trajectory& lo, const Trajectory& hi, double tol_factor = 5.0) {
    if (lo.checkpoints.empty() || hi.checkpoints.empty())
        throw PreconditionError("compare_runs: both trajectories need stored checkpoints");
    // Initial ordering is a precondition, not a result.
    {
        const auto& a = lo.checkpoints.front();
        const auto& b = hi.checkpoints.front();
        if (a.t != 0.0 || b.t != 0.0) throw PreconditionError("compare_runs: first checkpoint must be t = 0");
        if (a.g < b.g - 1e-12 || a.h > b.h + 1e-12)
            throw PreconditionError("compare_runs: initial support of the lower run is not nested in the upper one");
        const int n = static_cast<int>(a.u.size()) - 1;
        for (int i = 0; i <= n; ++i) {
            const double x = a.g + (a.h - a.g) * i / n;
            const double ub = interp::cubic_on_interval(b.u, b.g, b.h, x);
            if (a.u[i] > ub + 1e-6 * std::max(1.0, ub))
                throw PreconditionError("compare_runs: initial data of the lower run exceeds the upper one");
        }
    }
    OrderingReport rep;
    std::size_t j = 0;
    for (const auto& a : lo.checkpoints) {
        while (j < hi.checkpoints.size() && hi.checkpoints[j].t < a.t - 1e-12) ++j;
        if (j >= hi.checkpoints.size()) break;
        const auto& b = hi.checkpoints[j];
        if (std::abs(b.t - a.t) > 1e-12) continue;
        ++rep.checkpoints;
        const int na = static_cast<int>(a.u.size()) - 1, nb = static_cast<int>(b.u.size()) - 1;
        const double dx = std::max((a.h - a.g) / na, (b.h - b.g) / nb);
        const double tol = tol_factor * dx;
        auto flag = [&](const std::string& what) {
            ++rep.violations;
            if (rep.notes.size() < 16) rep.notes.push_back(what + " at t = " + std::to_string(a.t));
        };
        const double gm = a.g - b.g + tol, hm = b.h - a.h + tol;
        rep.worst_g_margin = std::min(rep.worst_g_margin, gm);
        rep.worst_h_margin = std::min(rep.worst_h_margin, hm);
        rep.max_abs_difference = std::max({rep.max_abs_difference, std::abs(a.g - b.g), std::abs(a.h - b.h)});
        if (gm < 0.0) flag("g_lo < g_hi - tol");
        if (hm < 0.0) flag("h_lo > h_hi + tol");
        const double left = std::max(a.g, b.g), right = std::min(a.h, b.h);
        if (right > left) {
            const int m = std::max(na, nb);
            double um = std::numeric_limits<double>::infinity();
            for (int i = 0; i <= m; ++i) {
                const double x = left + (right - left) * i / m;
                const double ua = interp::cubic_on_interval(a.u, a.g, a.h, x);
                const double ub = interp::cubic_on_interval(b.u, b.g, b.h, x);
                um = std::min(um, ub - ua + tol);
                rep.max_abs_difference = std::max(rep.max_abs_difference, std::abs(ub - ua));
            }
            rep.worst_u_margin = std::min(rep.worst_u_margin, um);
            if (um < 0.0) flag("u_lo > u_hi + tol");
        }
    }
    return rep;
}

}  // namespace resfront
