#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "resfront/errors.hpp"
#include "resfront/interp.hpp"
#include "resfront/nonlinearity.hpp"

// Time integration of u_t = u_xx + f(u) on (g(t), h(t)) with u = 0 at both
// ends, g' = -u_x(g) + alpha and h' = -u_x(h) - alpha. The moving interval is
// mapped onto xi in [0, 1] by x = g + xi (h - g).

namespace resfront {

/// Initial profile sigma * phi on [-h0, h0]. Either `phi` holds samples on a
/// uniform grid of [-h0, h0], or `shape` gives phi pointwise (samples are
/// then generated on validation).
struct InitialData {
    double h0 = 1.0;
    double sigma = 1.0;
    std::vector<double> phi;
    std::function<double(double)> shape;
    std::optional<double> slope_left;   // phi'(-h0)
    std::optional<double> slope_right;  // phi'(h0)
    std::string label = "samples";

    static InitialData cosine(double h0, double sigma) {
        constexpr double half_pi = 1.5707963267948966;
        InitialData d;
        d.h0 = h0;
        d.sigma = sigma;
        d.shape = [h0](double x) { return std::abs(x) >= h0 ? 0.0 : std::cos(half_pi * x / h0); };
        d.slope_left = half_pi / h0;
        d.slope_right = -half_pi / h0;
        d.label = "cosine";
        return d;
    }

    static InitialData sampled(double h0, double sigma, std::vector<double> phi) {
        InitialData d;
        d.h0 = h0;
        d.sigma = sigma;
        d.phi = std::move(phi);
        return d;
    }
};

/// Admissible initial data, already multiplied by sigma.
struct CheckedInitial {
    double h0 = 1.0;
    double sigma = 1.0;
    std::vector<double> u0;  // sigma * phi on a uniform grid of [-h0, h0]
    std::function<double(double)> exact;  // sigma * phi pointwise, when known
    double slope_left = 0.0;
    double slope_right = 0.0;
    double sup = 0.0;
    double l1 = 0.0;
    double c1_norm = 0.0;  // sup |u0| + sup |u0'|
    std::string label;

    double operator()(double x) const {
        if (x <= -h0 || x >= h0) return 0.0;
        if (exact) return exact(x);
        return interp::cubic_on_interval(u0, -h0, h0, x);
    }
};

namespace solver_detail {

inline constexpr int kDefaultSamples = 4000;

// One-sided second-order slope at the left end of samples with spacing dx,
// taken with stride k.
inline double left_slope(const std::vector<double>& v, double dx, int k = 1) {
    return (-3.0 * v[0] + 4.0 * v[k] - v[2 * k]) / (2.0 * k * dx);
}

inline double right_slope(const std::vector<double>& v, double dx, int k = 1) {
    const std::size_t n = v.size() - 1;
    return (3.0 * v[n] - 4.0 * v[n - k] + v[n - 2 * k]) / (2.0 * k * dx);
}

}  // namespace solver_detail

/// Checks membership in the admissible class: zero at both ends, positive
/// inside, strictly positive slope at -h0 and strictly negative slope at h0.
/// A vanishing endpoint slope is recognised because its one-sided estimate
/// changes with the stencil width instead of settling.
inline CheckedInitial validate_initial(const InitialData& data) {
    if (!(data.h0 > 0.0) || !std::isfinite(data.h0)) throw ValidationError("h0 must be positive and finite");
    if (!(data.sigma > 0.0) || !std::isfinite(data.sigma)) throw ValidationError("sigma must be positive and finite");

    std::vector<double> phi = data.phi;
    if (phi.empty()) {
        if (!data.shape) throw ValidationError("initial data has neither samples nor a shape function");
        const int m = solver_detail::kDefaultSamples;
        phi.resize(m + 1);
        for (int i = 0; i <= m; ++i) phi[i] = data.shape(data.h0 * (2 * i - m) / m);
    }
    const std::size_t m = phi.size() - 1;
    if (m < 8) throw ValidationError("need at least 9 samples of phi");
    const double dx = 2.0 * data.h0 / static_cast<double>(m);

    double peak = 0.0;
    for (double v : phi) {
        if (!std::isfinite(v)) throw ValidationError("phi has a non-finite sample");
        peak = std::max(peak, std::abs(v));
    }
    if (!(peak > 0.0)) throw ValidationError("phi is identically zero");
    if (std::abs(phi.front()) > 1e-12 * peak) throw ValidationError("phi(-h0) must be 0");
    if (std::abs(phi.back()) > 1e-12 * peak) throw ValidationError("phi(h0) must be 0");
    phi.front() = 0.0;
    phi.back() = 0.0;
    for (std::size_t i = 1; i < m; ++i) {
        if (!(phi[i] > 0.0))
            throw ValidationError("phi must be positive in (-h0, h0); fails at x = " +
                                  std::to_string(-data.h0 + dx * static_cast<double>(i)));
    }

    const double sl1 = solver_detail::left_slope(phi, dx, 1), sl2 = solver_detail::left_slope(phi, dx, 2);
    const double sr1 = solver_detail::right_slope(phi, dx, 1), sr2 = solver_detail::right_slope(phi, dx, 2);
    const bool left_ok = sl1 > 0.0 && std::abs(sl2 - sl1) <= 0.5 * sl1;
    const bool right_ok = sr1 < 0.0 && std::abs(sr2 - sr1) <= 0.5 * std::abs(sr1);
    if (!left_ok || (data.slope_left && !(*data.slope_left > 0.0)))
        throw ValidationError("phi'(-h0) must be strictly positive");
    if (!right_ok || (data.slope_right && !(*data.slope_right < 0.0)))
        throw ValidationError("phi'(h0) must be strictly negative");

    CheckedInitial c;
    c.h0 = data.h0;
    c.sigma = data.sigma;
    c.label = data.label;
    c.u0.resize(m + 1);
    for (std::size_t i = 0; i <= m; ++i) c.u0[i] = data.sigma * phi[i];
    if (data.shape) {
        const double s = data.sigma;
        auto shape = data.shape;
        c.exact = [s, shape](double x) { return s * shape(x); };
    }
    c.slope_left = data.sigma * data.slope_left.value_or(sl1);
    c.slope_right = data.sigma * data.slope_right.value_or(sr1);
    double sup_slope = 0.0;
    for (std::size_t i = 0; i <= m; ++i) {
        c.sup = std::max(c.sup, c.u0[i]);
        double d;
        if (i == 0) d = solver_detail::left_slope(c.u0, dx);
        else if (i == m) d = solver_detail::right_slope(c.u0, dx);
        else d = (c.u0[i + 1] - c.u0[i - 1]) / (2.0 * dx);
        sup_slope = std::max(sup_slope, std::abs(d));
    }
    c.c1_norm = c.sup + sup_slope;
    for (std::size_t i = 0; i < m; ++i) c.l1 += 0.5 * dx * (c.u0[i] + c.u0[i + 1]);
    return c;
}

/// Grid values w(xi_i), xi_i = i / n, of the solution at time t together with
/// the boundary positions and the boundary speeds implied by w.
struct SolverState {
    double t = 0.0;
    double g = -1.0;
    double h = 1.0;
    std::vector<double> u;
    double gprime = 0.0;
    double hprime = 0.0;

    int n() const { return static_cast<int>(u.size()) - 1; }
    double width() const { return h - g; }
    double dx() const { return width() / n(); }
    double x(int i) const { return g + width() * i / n(); }
    double max_u() const { return u.empty() ? 0.0 : *std::max_element(u.begin(), u.end()); }
    double min_u() const { return u.empty() ? 0.0 : *std::min_element(u.begin(), u.end()); }
};

/// Boundary speeds from one-sided three-point slopes, using u = 0 at both ends.
inline std::pair<double, double> boundary_speeds(const std::vector<double>& u, double width, double alpha) {
    const int n = static_cast<int>(u.size()) - 1;
    const double dxi = 1.0 / n;
    const double wx0 = (4.0 * u[1] - u[2]) / (2.0 * dxi);
    const double wx1 = (u[n - 2] - 4.0 * u[n - 1]) / (2.0 * dxi);
    return {-wx0 / width + alpha, -wx1 / width - alpha};
}

inline void refresh_speeds(SolverState& s, double alpha) {
    std::tie(s.gprime, s.hprime) = boundary_speeds(s.u, s.width(), alpha);
}

/// State at t = 0 on n intervals.
inline SolverState initial_state(const CheckedInitial& init, int n, double alpha) {
    if (n < 4) throw PreconditionError("initial_state: need at least 4 intervals");
    SolverState s;
    s.g = -init.h0;
    s.h = init.h0;
    s.u.assign(n + 1, 0.0);
    for (int i = 1; i < n; ++i) s.u[i] = init(init.h0 * (2 * i - n) / n);
    refresh_speeds(s, alpha);
    return s;
}

/// Resamples the state onto n_new intervals with four-point cubic
/// interpolation in xi; the end values stay exactly zero.
inline SolverState regrid(const SolverState& s, int n_new, double alpha) {
    if (n_new < 4) throw PreconditionError("regrid: need at least 4 intervals");
    SolverState out = s;
    out.u.assign(n_new + 1, 0.0);
    const double ratio = static_cast<double>(s.n()) / n_new;
    for (int i = 1; i < n_new; ++i) out.u[i] = interp::cubic_uniform(s.u, i * ratio);
    refresh_speeds(out, alpha);
    return out;
}

namespace solver_detail {

// Backward-Euler solve of the linear part (diffusion plus convection with
// frozen boundary speeds) on the new interval, reaction taken explicitly.
inline SolverState advance(const SolverState& s, const Nonlinearity& nl, double alpha, double dt, double gp,
                           double hp) {
    const int n = s.n();
    const double dxi = 1.0 / n;
    SolverState out;
    out.t = s.t + dt;
    out.g = s.g + dt * gp;
    out.h = s.h + dt * hp;
    const double L = out.h - out.g;
    if (!(L > 0.0) || !std::isfinite(L))
        throw NumericalError("interval collapsed or became non-finite at t = " + std::to_string(out.t));

    const double r = dt / (L * L * dxi * dxi);
    std::vector<double> lower(n + 1), diag(n + 1), upper(n + 1), rhs(n + 1);
    for (int i = 1; i < n; ++i) {
        const double xi = static_cast<double>(i) / n;
        const double a = ((1.0 - xi) * gp + xi * hp) / L;
        double p = dt * a / (2.0 * dxi);
        rhs[i] = s.u[i] + dt * nl.f_extended(s.u[i]);
        if (std::abs(p) <= r) {
            lower[i] = -r + p;
            diag[i] = 1.0 + 2.0 * r;
            upper[i] = -r - p;
        } else {
            // Cell Peclet number above 2: upwind keeps the matrix monotone.
            const double q = dt * std::abs(a) / dxi;
            lower[i] = -r - (a < 0.0 ? q : 0.0);
            upper[i] = -r - (a > 0.0 ? q : 0.0);
            diag[i] = 1.0 + 2.0 * r + q;
        }
    }
    // Thomas algorithm on rows 1..n-1 with zero Dirichlet data.
    std::vector<double> cp(n + 1, 0.0), dp(n + 1, 0.0);
    for (int i = 1; i < n; ++i) {
        const double denom = diag[i] - (i > 1 ? lower[i] * cp[i - 1] : 0.0);
        if (!(std::abs(denom) > 0.0)) throw NumericalError("tridiagonal solve hit a zero pivot");
        cp[i] = upper[i] / denom;
        dp[i] = (rhs[i] - (i > 1 ? lower[i] * dp[i - 1] : 0.0)) / denom;
    }
    out.u.assign(n + 1, 0.0);
    for (int i = n - 1; i >= 1; --i) out.u[i] = dp[i] - (i < n - 1 ? cp[i] * out.u[i + 1] : 0.0);
    for (int i = 1; i < n; ++i)
        if (!std::isfinite(out.u[i])) throw NumericalError("non-finite solution value at t = " + std::to_string(out.t));
    refresh_speeds(out, alpha);
    return out;
}

}  // namespace solver_detail

/// One first-order IMEX step of size dt. With `predictor_corrector` the
/// boundary speeds are the average of those at the start and at a trial
/// end state (Heun on the boundary motion).
inline SolverState step(const SolverState& s, const Nonlinearity& nl, double alpha, double dt,
                        bool predictor_corrector = false) {
    if (!(dt > 0.0)) throw PreconditionError("step: dt must be positive");
    if (!(s.width() > 0.0)) throw PreconditionError("step: state is not live");
    SolverState out = solver_detail::advance(s, nl, alpha, dt, s.gprime, s.hprime);
    if (predictor_corrector) {
        out = solver_detail::advance(s, nl, alpha, dt, 0.5 * (s.gprime + out.gprime), 0.5 * (s.hprime + out.hprime));
    }
    return out;
}

struct RunConfig {
    int n = 400;
    int n_max = 12800;
    double dx_max = 0.1;
    double dx_min = 0.025;  // coarsen back toward n when the spacing falls below this
    bool regrid = true;

    double eps_shrink = 1e-4;
    double eps_vanish = 1e-4;
    double x_max = 400.0;
    double t_horizon = 500.0;

    double cfl = 0.4;        // fraction of 1 / max|f'(u)|
    double move_frac = 0.1;  // fraction of h - g the ends may sweep in one step
    double dt_max = 0.01;
    double dt_min = 1e-12;
    double dt_fixed = 0.0;   // > 0 forces a constant step
    bool predictor_corrector = false;

    double record_every = 0.05;
    double checkpoint_every = 1.0;
    std::vector<double> checkpoint_times;
    bool keep_checkpoints = true;

    bool stall_stop = false;
    double eps_stall = 1e-5;
    double stall_window = 5.0;

    bool widen_cap = true;
    double tol_bound = 1e-6;
    double tol_monotone = 1e-8;
};

enum class Termination { ShrinkVanish, HorizonReached, DomainOverflow, NumericalFailure };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::ShrinkVanish: return "shrink_vanish";
        case Termination::HorizonReached: return "horizon_reached";
        case Termination::DomainOverflow: return "domain_overflow";
        case Termination::NumericalFailure: return "numerical_failure";
    }
    return "?";
}

struct Sample {
    double t, g, h, gprime, hprime, max_u, dx;
};

struct Checkpoint {
    double t, g, h;
    std::vector<double> u;
};

struct MonitorReport {
    long steps = 0;
    long lower_bound = 0;      // h' > -alpha, g' < alpha
    long upper_bound = 0;      // h', -g' <= 2 M C1 - alpha
    long center = 0;           // |g + h| < 2 h0
    long positivity = 0;
    long monotonicity = 0;     // u monotone outside [-h0, h0]
    long checked_monotone = 0;
    double worst_lower_margin = std::numeric_limits<double>::infinity();
    double worst_upper_margin = std::numeric_limits<double>::infinity();
    double worst_center_margin = std::numeric_limits<double>::infinity();
    double last_C2 = 0.0;
    std::vector<std::string> notes;

    long violations() const { return lower_bound + upper_bound + center + positivity + monotonicity; }
};

struct Trajectory {
    std::vector<Sample> samples;
    std::vector<Checkpoint> checkpoints;
    Termination termination = Termination::HorizonReached;
    double t_star = std::numeric_limits<double>::quiet_NaN();
    double t_shrink = std::numeric_limits<double>::quiet_NaN();
    double t_vanish = std::numeric_limits<double>::quiet_NaN();
    double lag = std::numeric_limits<double>::quiet_NaN();
    bool stalled = false;
    bool floor_declared = false;  // ShrinkVanish declared at the dt floor
    std::string message;
    SolverState final_state;
    MonitorReport monitors;
    double h0 = 0.0;
    double alpha = 0.0;
    double sigma = 0.0;
    double running_max_u = 0.0;
    long steps = 0;
    int regrids = 0;
    std::string nonlinearity;
};

namespace solver_detail {

class Monitors {
public:
    Monitors(const Nonlinearity& nl, double alpha, const CheckedInitial& init, const RunConfig& cfg,
             MonitorReport& rep)
        : nl_(nl), alpha_(alpha), init_(init), cfg_(cfg), rep_(rep) {}

    void every_step(const SolverState& s, double c1) {
        ++rep_.steps;
        const double tol = cfg_.tol_bound;
        const double lower = std::min(s.hprime + alpha_, alpha_ - s.gprime);
        rep_.worst_lower_margin = std::min(rep_.worst_lower_margin, lower);
        if (!(lower > -tol)) note(rep_.lower_bound, s.t, "boundary speed below -alpha", lower);

        const double c2 = upper_bound(c1);
        rep_.last_C2 = c2;
        const double upper = c2 - std::max(s.hprime, -s.gprime);
        rep_.worst_upper_margin = std::min(rep_.worst_upper_margin, upper);
        if (!(upper >= -tol)) note(rep_.upper_bound, s.t, "boundary speed above 2 M C1 - alpha", upper);

        const double center = 2.0 * init_.h0 + 10.0 * s.dx() - std::abs(s.g + s.h);
        rep_.worst_center_margin = std::min(rep_.worst_center_margin, center);
        if (!(center > 0.0)) note(rep_.center, s.t, "|g + h| reached 2 h0", center);

        const double mx = s.max_u();
        const double mn = s.min_u();
        if (mn < -10.0 * std::numeric_limits<double>::epsilon() * mx)
            note(rep_.positivity, s.t, "negative grid value", mn);
    }

    void at_checkpoint(const SolverState& s) {
        const int n = s.n();
        if (s.g < -init_.h0) {
            ++rep_.checked_monotone;
            for (int i = 0; i < n && s.x(i + 1) <= -init_.h0; ++i)
                if (s.u[i + 1] < s.u[i] - cfg_.tol_monotone) {
                    note(rep_.monotonicity, s.t, "u decreasing left of -h0", s.u[i + 1] - s.u[i]);
                    break;
                }
        }
        if (s.h > init_.h0) {
            ++rep_.checked_monotone;
            for (int i = n; i > 0 && s.x(i - 1) >= init_.h0; --i)
                if (s.u[i - 1] < s.u[i] - cfg_.tol_monotone) {
                    note(rep_.monotonicity, s.t, "u increasing right of h0", s.u[i - 1] - s.u[i]);
                    break;
                }
        }
    }

private:
    // C2 = 2 M C1 - alpha with M = max((alpha + sqrt(alpha^2 + 2 K1)) / 2, 4 |u0|_{C1} / (3 C1)).
    double upper_bound(double c1) {
        if (!(c1 <= cached_c1_)) {
            // K1 is refreshed on a 1% ladder; a larger C1 only loosens the bound.
            cached_c1_ = c1 * 1.01;
            const double cap = std::min(cached_c1_, nl_.domain_cap());
            cached_k1_ = lipschitz_bound(nl_, cap);
            if (cached_c1_ > nl_.domain_cap()) cached_k1_ = std::max(cached_k1_, tail_slope(cached_c1_));
        }
        const double M = std::max((alpha_ + std::sqrt(alpha_ * alpha_ + 2.0 * cached_k1_)) / 2.0,
                                  4.0 * init_.c1_norm / (3.0 * c1));
        return 2.0 * M * c1 - alpha_;
    }

    double tail_slope(double top) const {
        double k = 0.0;
        const double cap = nl_.domain_cap();
        for (int i = 0; i <= 256; ++i) k = std::max(k, std::abs(nl_.fprime_extended(cap + (top - cap) * i / 256)));
        return k;
    }

    void note(long& counter, double t, const char* what, double value) {
        ++counter;
        if (rep_.notes.size() < 16)
            rep_.notes.push_back(std::string(what) + " at t = " + std::to_string(t) + " (" + std::to_string(value) + ")");
    }

    const Nonlinearity& nl_;
    double alpha_;
    const CheckedInitial& init_;
    const RunConfig& cfg_;
    MonitorReport& rep_;
    double cached_c1_ = -1.0;
    double cached_k1_ = 0.0;
};

inline Sample sample_of(const SolverState& s) {
    return {s.t, s.g, s.h, s.gprime, s.hprime, s.max_u(), s.dx()};
}

}  // namespace solver_detail

/// Reaction term the solver actually uses: closed forms are trusted up to
/// twice the initial peak so that barrier-level values stay in range.
inline Nonlinearity effective_nonlinearity(const Nonlinearity& nl, const CheckedInitial& init, const RunConfig& cfg) {
    if (cfg.widen_cap && nl.is_closed_form() && 2.0 * init.sup > nl.domain_cap())
        return nl.with_domain_cap(2.0 * init.sup);
    return nl;
}

/// Runs the front-fixed scheme until the interval shrinks with u vanishing,
/// the horizon passes, an end leaves [-x_max, x_max], or the numerics fail.
inline Trajectory simulate(const CheckedInitial& init, const Nonlinearity& nl_in, double alpha, const RunConfig& cfg) {
    if (!(alpha > 0.0)) throw PreconditionError("simulate: alpha must be positive");
    if (cfg.n < 4) throw ValidationError("n must be at least 4");
    const Nonlinearity nl = effective_nonlinearity(nl_in, init, cfg);

    Trajectory tr;
    tr.h0 = init.h0;
    tr.alpha = alpha;
    tr.sigma = init.sigma;
    tr.nonlinearity = nl.describe();

    SolverState s = initial_state(init, cfg.n, alpha);
    solver_detail::Monitors mon(nl, alpha, init, cfg, tr.monitors);
    double c1 = std::max(init.sup, s.max_u());
    tr.running_max_u = c1;

    std::vector<double> ck_times = cfg.checkpoint_times;
    if (cfg.checkpoint_every > 0.0)
        for (long k = 1; k * cfg.checkpoint_every <= cfg.t_horizon * (1.0 + 1e-14); ++k)
            ck_times.push_back(k * cfg.checkpoint_every);
    std::sort(ck_times.begin(), ck_times.end());
    ck_times.erase(std::remove_if(ck_times.begin(), ck_times.end(),
                                  [&](double t) { return !(t > 0.0 && t <= cfg.t_horizon); }),
                   ck_times.end());
    ck_times.erase(std::unique(ck_times.begin(), ck_times.end()), ck_times.end());
    std::size_t next_ck = 0;
    long next_rec = 1;

    auto checkpoint = [&](const SolverState& st) {
        mon.at_checkpoint(st);
        if (cfg.keep_checkpoints) tr.checkpoints.push_back({st.t, st.g, st.h, st.u});
    };

    tr.samples.push_back(solver_detail::sample_of(s));
    mon.every_step(s, c1);
    checkpoint(s);

    std::optional<double> shrink_since, vanish_since, stall_since;
    auto finish = [&](Termination term, std::string msg = {}) {
        tr.termination = term;
        tr.message = std::move(msg);
        tr.final_state = s;
        if (tr.samples.empty() || tr.samples.back().t < s.t) tr.samples.push_back(solver_detail::sample_of(s));
        return tr;
    };

    while (true) {
        if (s.h > cfg.x_max || s.g < -cfg.x_max) return finish(Termination::DomainOverflow);
        if (s.t >= cfg.t_horizon) return finish(Termination::HorizonReached);

        double dt;
        if (cfg.dt_fixed > 0.0) {
            dt = cfg.dt_fixed;
        } else {
            dt = cfg.dt_max;
            const double v = std::abs(s.gprime) + std::abs(s.hprime);
            if (v > 0.0) dt = std::min(dt, cfg.move_frac * s.width() / v);
            double fp = 0.0;
            for (int i = 1; i < s.n(); ++i) fp = std::max(fp, std::abs(nl.fprime_extended(s.u[i])));
            if (fp > 0.0) dt = std::min(dt, cfg.cfl / fp);
        }
        // Land exactly on record, checkpoint and horizon times.
        double target = std::min(cfg.t_horizon, cfg.record_every > 0.0 ? next_rec * cfg.record_every : cfg.t_horizon);
        if (next_ck < ck_times.size()) target = std::min(target, ck_times[next_ck]);
        bool lands = false;
        if (s.t + dt >= target - 1e-12 * std::max(1.0, target)) {
            dt = target - s.t;
            lands = true;
        }
        if (!(dt >= cfg.dt_min)) {
            if (lands && dt > 0.0) {
                // Event closer than the floor: snap to it.
                s.t = target;
            } else if (s.width() <= 10.0 * cfg.eps_shrink) {
                tr.floor_declared = true;
                tr.t_star = s.t;
                tr.t_shrink = shrink_since.value_or(s.t);
                tr.t_vanish = vanish_since.value_or(s.t);
                tr.lag = std::abs(tr.t_shrink - tr.t_vanish);
                return finish(Termination::ShrinkVanish, "declared at the time-step floor");
            } else {
                return finish(Termination::NumericalFailure, "time step fell below dt_min");
            }
        } else {
            try {
                SolverState next = step(s, nl, alpha, dt, cfg.predictor_corrector);
                if (lands) next.t = target;
                s = std::move(next);
            } catch (const NumericalError& e) {
                return finish(Termination::NumericalFailure, e.what());
            }
            ++tr.steps;
        }

        if (cfg.regrid) {
            while (s.dx() > cfg.dx_max && 2 * s.n() <= cfg.n_max) {
                s = regrid(s, 2 * s.n(), alpha);
                ++tr.regrids;
            }
            while (s.dx() < cfg.dx_min && s.n() % 2 == 0 && s.n() / 2 >= cfg.n) {
                s = regrid(s, s.n() / 2, alpha);
                ++tr.regrids;
            }
        }

        const double mx = s.max_u();
        c1 = std::max(c1, mx);
        tr.running_max_u = c1;
        mon.every_step(s, c1);

        if (cfg.record_every > 0.0 && s.t >= next_rec * cfg.record_every - 1e-12) {
            tr.samples.push_back(solver_detail::sample_of(s));
            while (next_rec * cfg.record_every <= s.t + 1e-12) ++next_rec;
        }
        while (next_ck < ck_times.size() && ck_times[next_ck] <= s.t + 1e-12) {
            checkpoint(s);
            ++next_ck;
        }

        if (s.width() <= cfg.eps_shrink) {
            if (!shrink_since) shrink_since = s.t;
        } else {
            shrink_since.reset();
        }
        if (mx <= cfg.eps_vanish) {
            if (!vanish_since) vanish_since = s.t;
        } else {
            vanish_since.reset();
        }
        if (shrink_since && vanish_since) {
            tr.t_star = s.t;
            tr.t_shrink = *shrink_since;
            tr.t_vanish = *vanish_since;
            tr.lag = std::abs(*shrink_since - *vanish_since);
            return finish(Termination::ShrinkVanish);
        }

        if (cfg.stall_stop) {
            if (std::abs(s.gprime) + std::abs(s.hprime) <= cfg.eps_stall) {
                if (!stall_since) stall_since = s.t;
                if (s.t - *stall_since >= cfg.stall_window) {
                    tr.stalled = true;
                    return finish(Termination::HorizonReached, "boundaries stalled");
                }
            } else {
                stall_since.reset();
            }
        }
    }
}

inline Trajectory simulate(const InitialData& data, const Nonlinearity& nl, double alpha, const RunConfig& cfg) {
    return simulate(validate_initial(data), nl, alpha, cfg);
}

}  // namespace resfront
