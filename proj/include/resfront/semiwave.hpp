#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "resfront/errors.hpp"
#include "resfront/nonlinearity.hpp"
#include "resfront/ode.hpp"

// Semi-wave problem q'' - c q' + f(q) = 0 on z > 0 with q(0) = 0,
// q'(0) = c + alpha and q(+inf) = 1.

namespace resfront {

enum class ShotClass { Overshoot, Undershoot, Connect };

inline const char* to_string(ShotClass s) {
    switch (s) {
        case ShotClass::Overshoot: return "overshoot";
        case ShotClass::Undershoot: return "undershoot";
        case ShotClass::Connect: return "connect";
    }
    return "?";
}

struct ShootOptions {
    double rtol = 1e-10;
    double eps_over = 1e-8;
    double eps_under = 1e-8;
    double eps_connect = 1e-6;
    double z_max = 200.0;
};

struct ShotProfile {
    std::vector<double> z;
    std::vector<double> q;
    std::vector<double> qprime;
};

struct Shot {
    ShotClass kind = ShotClass::Undershoot;
    double z_end = 0.0;
    double q_end = 0.0;
    double qprime_end = 0.0;
    std::optional<ShotProfile> profile;  // Connect only
};

struct SemiWaveResult {
    double c_star = 0.0;
    double c_lo = 0.0;
    double c_hi = 0.0;
    double bracket_width = 0.0;
    ShotClass below = ShotClass::Undershoot;  // class of shots at c < c*
    ShotClass above = ShotClass::Overshoot;
    ShotProfile profile;
    double z_end = 0.0;
    double residual_at_one = 0.0;  // |q(z_end) - 1|
    int shots = 0;
};

struct SemiWaveOptions {
    ShootOptions shoot;
    double bracket_tol = 1e-10;
    double c_scan_start = 1e-3;
    double c_hi_start = 1.0;
    int max_scan = 60;
    double profile_dz = 1e-3;
};

namespace semiwave_detail {

inline ode::State<2> rhs(const Nonlinearity& nl, double c, const ode::State<2>& y) {
    return {y[1], c * y[1] - nl.f_extended(y[0])};
}

}  // namespace semiwave_detail

/// Forward shot from z = 0. Overshoot once q > 1 + eps_over, Undershoot once
/// q' < 0 with q < 1 - eps_under, Connect if neither happens before z_max and
/// (q, q') sits within eps_connect of (1, 0). A shot that reaches z_max
/// outside that window is labeled by the side of q = 1 it ended on.
inline Shot shoot(const Nonlinearity& nl, double alpha, double c, const ShootOptions& opt = {}) {
    if (!(alpha > 0.0)) throw PreconditionError("shoot: alpha must be positive");
    if (!(c >= 0.0)) throw PreconditionError("shoot: c must be non-negative");
    Shot shot;
    std::optional<ShotClass> hit;
    ode::Options o;
    o.rtol = opt.rtol;
    o.atol = opt.rtol * 1e-2;
    o.h_max = 0.5;
    auto rhs = [&](double, const ode::State<2>& y) { return semiwave_detail::rhs(nl, c, y); };
    auto observe = [&](double, const ode::State<2>& y) {
        if (y[0] > 1.0 + opt.eps_over) hit = ShotClass::Overshoot;
        else if (y[1] < 0.0 && y[0] < 1.0 - opt.eps_under) hit = ShotClass::Undershoot;
        return !hit;
    };
    const auto out = ode::dormand_prince<2>(rhs, 0.0, {0.0, c + alpha}, opt.z_max, o, observe);
    if (out.stop == ode::Stop::StepFailure)
        throw NumericalError("shoot: integrator step failure at z = " + std::to_string(out.t) +
                             " (q = " + std::to_string(out.y[0]) + ", q' = " + std::to_string(out.y[1]) +
                             ", c = " + std::to_string(c) + ")");
    shot.z_end = out.t;
    shot.q_end = out.y[0];
    shot.qprime_end = out.y[1];
    if (hit) {
        shot.kind = *hit;
        return shot;
    }
    if (std::abs(out.y[0] - 1.0) <= opt.eps_connect && std::abs(out.y[1]) <= opt.eps_connect) {
        shot.kind = ShotClass::Connect;
        ShotProfile p;
        // Dense record for the caller; the stop criteria above are unaffected.
        const int n = static_cast<int>(std::ceil(opt.z_max / 1e-2));
        ode::State<2> y{0.0, c + alpha};
        p.z.push_back(0.0);
        p.q.push_back(y[0]);
        p.qprime.push_back(y[1]);
        for (int i = 1; i <= n; ++i) {
            y = ode::rk4_step<2>(rhs, (i - 1) * 1e-2, y, 1e-2);
            p.z.push_back(i * 1e-2);
            p.q.push_back(y[0]);
            p.qprime.push_back(y[1]);
        }
        shot.profile = std::move(p);
        return shot;
    }
    shot.kind = out.y[0] >= 1.0 ? ShotClass::Overshoot : ShotClass::Undershoot;
    return shot;
}

namespace semiwave_detail {

// Profile at speed c on a uniform grid, truncated at the closest approach to
// the saddle (1, 0) among points with 0 < q < 1 and q' > 0.
inline ShotProfile truncated_profile(const Nonlinearity& nl, double alpha, double c, const SemiWaveOptions& opt) {
    auto rhs = [&](double, const ode::State<2>& y) { return semiwave_detail::rhs(nl, c, y); };
    const double dz = opt.profile_dz;
    const long n = static_cast<long>(std::ceil(opt.shoot.z_max / dz));
    ShotProfile p;
    ode::State<2> y{0.0, c + alpha};
    p.z.push_back(0.0);
    p.q.push_back(y[0]);
    p.qprime.push_back(y[1]);
    long best = 0;
    double best_d = std::hypot(1.0, y[1]);
    for (long i = 1; i <= n; ++i) {
        y = ode::rk4_step<2>(rhs, (i - 1) * dz, y, dz);
        if (!(y[0] > 0.0 && y[0] < 1.0 && y[1] > 0.0)) break;
        p.z.push_back(i * dz);
        p.q.push_back(y[0]);
        p.qprime.push_back(y[1]);
        const double d = std::hypot(1.0 - y[0], y[1]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    p.z.resize(best + 1);
    p.q.resize(best + 1);
    p.qprime.resize(best + 1);
    return p;
}

}  // namespace semiwave_detail

/// Speed c* and profile q* of the semi-wave by bisection on the shot class.
/// The bracket polarity is recorded, not assumed. The returned profile is
/// the forward solution at the bracket midpoint, cut where it passes closest
/// to (1, 0); beyond that point the saddle instability takes over.
inline SemiWaveResult solve_cstar(const Nonlinearity& nl, double alpha, const SemiWaveOptions& opt = {}) {
    const auto cls = classify_nonlinearity(nl);
    if (cls.kind == NonlinearityClass::Other)
        throw PreconditionError("solve_cstar: f must be monostable or bistable");
    if (!(alpha > 0.0)) throw PreconditionError("solve_cstar: alpha must be positive");
    const double a_max = std::sqrt(2.0 * nl.F(1.0));
    if (!(alpha < a_max))
        throw PreconditionError("solve_cstar: a semi-wave exists only for 0 < alpha < sqrt(2F(1)) = " +
                                std::to_string(a_max));

    SemiWaveResult res;
    auto classify = [&](double c) {
        ++res.shots;
        const auto s = shoot(nl, alpha, c, opt.shoot);
        return s.kind;
    };

    // Doubling scan up from c_hi_start; if every probe shares the class
    // found at c_scan_start, c* lies below the start and a halving scan
    // down from c_scan_start takes over.
    double c_lo = opt.c_scan_start;
    ShotClass k_lo = classify(c_lo);
    double c_hi = opt.c_hi_start;
    ShotClass k_hi = classify(c_hi);
    for (int i = 0; i < opt.max_scan / 3 && k_hi == k_lo; ++i) {
        c_lo = c_hi;
        c_hi *= 2.0;
        k_hi = classify(c_hi);
    }
    if (k_hi == k_lo) {
        c_hi = opt.c_scan_start;
        k_hi = k_lo;
        c_lo = c_hi;
        for (int i = 0; i < opt.max_scan && k_lo == k_hi; ++i) {
            c_hi = c_lo;
            c_lo /= 2.0;
            k_lo = classify(c_lo);
        }
    }
    if (k_lo == k_hi || k_lo == ShotClass::Connect || k_hi == ShotClass::Connect)
        throw NumericalError("solve_cstar: no sign-changing bracket found (alpha = " + std::to_string(alpha) + ")");
    if (c_lo > c_hi) std::swap(c_lo, c_hi), std::swap(k_lo, k_hi);
    res.below = k_lo;
    res.above = k_hi;

    while (c_hi - c_lo > opt.bracket_tol) {
        const double mid = 0.5 * (c_lo + c_hi);
        const auto k = classify(mid);
        if (k == ShotClass::Connect) {
            c_lo = c_hi = mid;
            break;
        }
        (k == k_lo ? c_lo : c_hi) = mid;
    }
    res.c_lo = c_lo;
    res.c_hi = c_hi;
    res.bracket_width = c_hi - c_lo;
    res.c_star = 0.5 * (c_lo + c_hi);
    res.profile = semiwave_detail::truncated_profile(nl, alpha, res.c_star, opt);
    res.z_end = res.profile.z.back();
    res.residual_at_one = std::abs(res.profile.q.back() - 1.0);
    return res;
}

}  // namespace resfront
