// Runs the ten acceptance checks and prints one PASS/FAIL line for each.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "oracles.hpp"
#include "resfront/resfront.hpp"

using namespace resfront;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<Trajectory> kept;

void keep(const Trajectory& tr) {
    kept.push_back(tr);
}

RunConfig horizon(double t) {
    RunConfig rc;
    rc.t_horizon = t;
    rc.keep_checkpoints = false;
    return rc;
}

// ---------------------------------------------------------------------------

void stationary_fidelity() {
    const auto nl = Nonlinearity::logistic();
    const double alpha = 0.4;
    const auto t0 = Clock::now();
    const auto p = profile_V(nl, alpha, 1000);
    const double secs = seconds_since(t0);
    const int n = static_cast<int>(p.v.size()) - 1;
    double ode = 0.0, first = 0.0, sym = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double v2 = oracle::derivative(p.x, p.v, i, 2), v1 = oracle::derivative(p.x, p.v, i, 1);
        ode = std::max(ode, std::abs(v2 + p.v[i] * (1 - p.v[i])));
        first = std::max(first, std::abs(v1 * v1 + 2 * oracle::logistic_F(p.v[i]) - alpha * alpha));
        sym = std::max(sym, std::abs(p.v[i] - p.v[n - i]));
    }
    const double slope = std::abs(oracle::derivative(p.x, p.v, 0, 1) - alpha);
    report(1, "stationary fidelity", ode <= 1e-6 && first <= 1e-6 && sym <= 1e-10 && slope <= 1e-6 && secs < 1.0,
           fmt("ode %.2e, first integral %.2e, symmetry %.2e, |v'(0)-alpha| %.2e, %.3f s", ode, first, sym, slope,
               secs));
}

void quadrature_vs_shooting() {
    const auto nl = Nonlinearity::logistic();
    const double a0 = alpha0(nl);
    double worst = 0.0;
    std::string values;
    for (int k = 0; k < 5; ++k) {
        const double a = 0.1 + (0.95 * a0 - 0.1) * (k + 0.5) / 5.0;
        const double ell = half_width_ell(nl, a).value();
        const auto shot = oracle::shoot_peak([](double v) { return v * (1 - v); }, a);
        const double rel = std::abs(ell - shot.peak_x) / shot.peak_x;
        worst = std::max(worst, rel);
        values += fmt("%s%.4f", k ? "," : "", a);
    }
    report(2, "quadrature vs shooting", worst <= 1e-6,
           fmt("worst relative gap %.2e over alpha in {%s}", worst, values.c_str()));
}

void stationarity_under_evolution() {
    const auto nl = Nonlinearity::logistic();
    const double alpha = 0.4;
    const int n = 2000;
    const StationaryShape V(nl, alpha);
    std::vector<double> phi(n + 1);
    for (int i = 0; i <= n; ++i) phi[i] = V(2.0 * V.ell() * i / n);
    phi.front() = phi.back() = 0.0;
    auto data = InitialData::sampled(V.ell(), 1.0, phi);
    data.shape = [V](double x) { return V(x + V.ell()); };
    const auto init = validate_initial(data);
    RunConfig rc = horizon(5.0);
    rc.n = n;
    rc.regrid = false;
    const auto t0 = Clock::now();
    const auto tr = simulate(init, nl, alpha, rc);
    const double secs = seconds_since(t0);
    double drift = 0.0;
    const auto& f = tr.final_state;
    for (int i = 0; i <= f.n(); ++i) drift = std::max(drift, std::abs(f.u[i] - init(f.x(i))));
    double speed = 0.0;
    for (const auto& s : tr.samples) speed = std::max({speed, std::abs(s.gprime), std::abs(s.hprime)});
    keep(tr);
    report(3, "stationarity under evolution", drift <= 1e-3 && speed <= 1e-4 && secs < 30.0,
           fmt("drift %.2e, max |g'|,|h'| %.2e, %.1f s", drift, speed, secs));
}

void shrink_vanish_equivalence() {
    const auto nl = Nonlinearity::logistic();
    const RunConfig rc = horizon(500.0);
    int vanished = 0, bad = 0;
    double worst_w = 0.0, worst_u = 0.0;
    for (int k = 1; k <= 20; ++k) {
        const auto tr = simulate(validate_initial(InitialData::cosine(1.0, 0.25 * k)), nl, 0.4, rc);
        keep(tr);
        if (tr.termination != Termination::ShrinkVanish) continue;
        ++vanished;
        const double w = tr.final_state.width(), u = tr.final_state.max_u();
        worst_w = std::max(worst_w, w);
        worst_u = std::max(worst_u, u);
        if (!(w <= 2 * rc.eps_shrink && u <= 2 * rc.eps_vanish)) ++bad;
    }
    report(4, "shrink/vanish equivalence", bad == 0 && vanished > 0,
           fmt("%d of 20 runs vanished, %d exceptions, worst width %.2e, worst max_u %.2e", vanished, bad, worst_w,
               worst_u));
}

void sharp_threshold() {
    const auto nl = Nonlinearity::logistic();
    ThresholdConfig tc;
    tc.run.n = 400;
    const auto t0 = Clock::now();
    const auto r = find_sigma_star(InitialData::cosine(1.0, 1.0), nl, 0.4, tc);
    const double secs = seconds_since(t0);
    const double two_ell = 2.0 * half_width_ell(nl, 0.4).value();
    const double coarse = r.coarse_hi - r.coarse_lo;
    const double w = r.midpoint_run.final_state.width();
    const double gap = std::abs(w - two_ell) / two_ell;
    keep(r.midpoint_run);
    const bool ok = !r.infinite && !r.no_vanishing && r.width() <= 1e-3 && log_is_monotone(r.log) &&
                    gap <= 0.05 && secs < 600.0;
    report(5, "sharp threshold", ok,
           fmt("sigma* in [%.9f, %.9f] (width %.1e, coarse %.2e), %zu runs, monotone %s, midpoint %s width %.4f vs 2 ell "
               "%.4f (%.2f%%), %.0f s",
               r.sigma_lo, r.sigma_hi, r.width(), coarse, r.log.size(), log_is_monotone(r.log) ? "yes" : "no",
               to_string(r.midpoint_outcome.verdict), w, two_ell, 100 * gap, secs));
}

void spreading_speed_check() {
    const auto nl = Nonlinearity::logistic();
    const double alpha = 0.2;
    const auto t0 = Clock::now();
    const auto sw = solve_cstar(nl, alpha);
    SemiWaveOptions fine;
    fine.shoot.rtol = 1e-11;
    fine.bracket_tol = 1e-11;
    const auto sw2 = solve_cstar(nl, alpha, fine);
    const double stable = std::abs(sw.c_star - sw2.c_star);
    const auto tr = simulate(validate_initial(InitialData::cosine(1.0, 4.0)), nl, alpha, horizon(200.0));
    const double secs = seconds_since(t0);
    keep(tr);
    const bool spread = tr.termination == Termination::HorizonReached;
    const auto rep = spreading_speed(tr, sw.c_star);
    const bool ok = spread && rep.rel_err_right <= 0.02 && rep.rel_err_left <= 0.02 && sw.bracket_width <= 1e-10 &&
                    stable <= 1e-8 && secs < 300.0;
    report(6, "spreading speed", ok,
           fmt("c* %.10f (bracket %.1e, refinement shift %.1e), slopes %.5f / %.5f, errors %.2f%% / %.2f%%, %.1f s",
               sw.c_star, sw.bracket_width, stable, rep.slope_right, rep.slope_left, 100 * rep.rel_err_right,
               100 * rep.rel_err_left, secs));
}

void comparison_pairs() {
    struct Pair {
        double h0_lo, s_lo, h0_hi, s_hi;
    };
    const std::vector<Pair> pairs = {{1, 0.5, 1, 1},     {1, 1, 1, 2},       {1, 2, 1, 3.5},   {1, 3.5, 1, 4},
                                     {1, 3.7, 1, 3.75},  {0.5, 1, 1, 1},     {0.8, 2, 1.2, 2}, {1, 4, 1.5, 4},
                                     {0.5, 0.5, 1.5, 1}, {0.9, 3.6, 1, 3.8}};
    const auto nl = Nonlinearity::logistic();
    RunConfig rc = horizon(20.0);
    rc.keep_checkpoints = true;
    int ok_pairs = 0, checkpoints = 0;
    long violations = 0;
    for (const auto& p : pairs) {
        const auto lo = simulate(validate_initial(InitialData::cosine(p.h0_lo, p.s_lo)), nl, 0.4, rc);
        const auto hi = simulate(validate_initial(InitialData::cosine(p.h0_hi, p.s_hi)), nl, 0.4, rc);
        const auto rep = compare_runs(lo, hi);
        checkpoints += rep.checkpoints;
        violations += rep.violations;
        ok_pairs += rep.ok() && rep.checkpoints > 1;
        keep(lo);
        keep(hi);
        kept[kept.size() - 1].checkpoints.clear();
        kept[kept.size() - 2].checkpoints.clear();
    }
    report(8, "comparison principle", ok_pairs == static_cast<int>(pairs.size()),
           fmt("%d of %zu pairs ordered, %d shared checkpoints, %ld violations", ok_pairs, pairs.size(), checkpoints,
               violations));
}

void certificate_soundness() {
    int certified = 0, sound = 0;
    std::string bad;
    for (const auto& k : corpus::certificate_cases()) {
        const auto init = validate_initial(InitialData::cosine(k.h0, k.sigma));
        if (!vanishing_certificate(init, k.nl, k.alpha)) continue;
        ++certified;
        const auto tr = simulate(init, k.nl, k.alpha, horizon(200.0));
        keep(tr);
        const auto o = detect_outcome(tr, k.nl, classify_stationary(k.nl, k.alpha));
        if (o.verdict == Verdict::Vanishing) ++sound;
        else bad += " [" + k.name + "]";
    }
    report(9, "certificate soundness", certified > 0 && sound == certified,
           fmt("%d of 30 configs certified, %d simulated to vanishing%s", certified, sound, bad.c_str()));
}

void convergence_order() {
    const auto nl = Nonlinearity::logistic();
    std::vector<SolverState> st;
    for (int n : {200, 400, 800, 1600}) {
        RunConfig rc = horizon(0.5);
        rc.n = n;
        rc.dt_fixed = 2e-4;
        rc.regrid = false;
        const auto tr = simulate(validate_initial(InitialData::cosine(1.0, 1.0)), nl, 0.4, rc);
        keep(tr);
        st.push_back(tr.final_state);
    }
    // Richardson extrapolation of the two finest grids, compared at the 201 shared nodes.
    double e[3];
    for (int k = 0; k < 3; ++k) {
        e[k] = 0.0;
        for (int i = 0; i <= 200; ++i) {
            const double ref = (4.0 * st[3].u[8 * i] - st[2].u[4 * i]) / 3.0;
            e[k] = std::max(e[k], std::abs(st[k].u[(1 << k) * i] - ref));
        }
    }
    const double r1 = e[0] / e[1], r2 = e[1] / e[2];
    report(10, "convergence order", r1 >= 3.5 && r1 <= 4.5 && r2 >= 3.5 && r2 <= 4.5,
           fmt("errors %.3e / %.3e / %.3e, ratios %.3f and %.3f", e[0], e[1], e[2], r1, r2));
}

// Checked last, over every trajectory produced above.
void a_priori_bounds() {
    long samples = 0, violations = 0, monitor = 0;
    double worst_lower = INFINITY, worst_center = INFINITY;
    for (const auto& tr : kept) {
        monitor += tr.monitors.lower_bound + tr.monitors.center;
        for (const auto& s : tr.samples) {
            ++samples;
            const double lower = std::min(s.hprime + tr.alpha + 1e-6, tr.alpha + 1e-6 - s.gprime);
            const double center = 2 * tr.h0 + 10 * s.dx - std::abs(s.g + s.h);
            worst_lower = std::min(worst_lower, lower);
            worst_center = std::min(worst_center, center);
            violations += (lower <= 0.0) + (center <= 0.0);
        }
    }
    report(7, "a priori bounds", violations == 0 && monitor == 0,
           fmt("%zu trajectories, %ld samples, %ld sample violations, %ld step-monitor violations, worst margins "
               "%.2e (speed) %.2e (center)",
               kept.size(), samples, violations, monitor, worst_lower, worst_center));
}

}  // namespace

int main() {
    const std::vector<std::function<void()>> checks = {
        stationary_fidelity, quadrature_vs_shooting, stationarity_under_evolution, shrink_vanish_equivalence,
        sharp_threshold,     spreading_speed_check,  comparison_pairs,             certificate_soundness,
        convergence_order,   a_priori_bounds};
    for (const auto& c : checks) {
        try {
            c();
        } catch (const std::exception& e) {
            std::printf("FAIL    check aborted: %s\n", e.what());
            ++failures;
        }
    }
    std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
