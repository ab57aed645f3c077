#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "resfront/nonlinearity.hpp"
#include "resfront/phase_plane.hpp"
#include "resfront/quadrature.hpp"
#include "resfront/solver.hpp"

namespace resfront {

enum class CertificateReason {
    AlphaAboveCritical,   // alpha > alpha0
    CriticalNotAttained,  // alpha = alpha0 and 2F < alpha0^2 everywhere
    BelowPlateau,         // alpha = alpha0 attained, u0 under a shifted plateau profile
    BelowStationary,      // u0 <= V_alpha(x + ell), not identical
    BelowTheta,           // bistable, sup u0 <= theta
    SmallMass,            // bistable, |u0|_1 <= theta sqrt(2 pi / (e K))
};

inline const char* to_string(CertificateReason r) {
    switch (r) {
        case CertificateReason::AlphaAboveCritical: return "alpha_above_critical";
        case CertificateReason::CriticalNotAttained: return "critical_not_attained";
        case CertificateReason::BelowPlateau: return "below_plateau";
        case CertificateReason::BelowStationary: return "below_stationary";
        case CertificateReason::BelowTheta: return "below_theta";
        case CertificateReason::SmallMass: return "small_mass";
    }
    return "?";
}

struct Certificate {
    CertificateReason reason;
    double margin = 0.0;  // slack in the fired inequality (positive means strict)
    std::string detail;
};

struct CertificateOptions {
    double critical_tol = 1e-12;  // relative window for alpha == alpha0
    int plateau_shifts = 64;      // b-grid size for the plateau comparison
    int plateau_table = 4000;     // nodes of the tabulated plateau profile
};

namespace certificate_detail {

// Increasing plateau profile v'' + f(v) = 0, v(0) = 0, v'(0) = alpha, which
// tends to B without reaching it. Tabulated as (x(v), v) for v up to
// B (1 - 1e-12); linear interpolation of this concave curve sits below it.
class PlateauProfile {
public:
    PlateauProfile(const Nonlinearity& nl, double alpha, double B, int nodes) : B_(B) {
        (void)alpha;  // alpha^2 = 2 F(B), so alpha^2 - 2 F(B - d) = 2 (F(B) - F(B - d))
        auto g = [&](double d) { return 1.0 / std::sqrt(std::max(2.0 * nl.F_below(B, d), 1e-300)); };
        v_.push_back(0.0);
        x_.push_back(0.0);
        // Nodes cluster geometrically toward B.
        double depth_prev = B;
        for (int k = 1; k <= nodes; ++k) {
            const double depth = B * std::pow(1e-12, static_cast<double>(k) / nodes);
            x_.push_back(x_.back() + quad::integrate(g, depth, depth_prev, 1e-12, 1e-12).value);
            v_.push_back(B - depth);
            depth_prev = depth;
        }
    }

    double operator()(double x) const {
        if (x <= 0.0) return 0.0;
        if (x >= x_.back()) return v_.back();
        const auto it = std::upper_bound(x_.begin(), x_.end(), x);
        const std::size_t j = static_cast<std::size_t>(it - x_.begin());
        const double w = (x - x_[j - 1]) / (x_[j] - x_[j - 1]);
        return v_[j - 1] + w * (v_[j] - v_[j - 1]);
    }

    double reach() const { return x_.back(); }
    double B() const { return B_; }

private:
    double B_;
    std::vector<double> x_, v_;
};

inline std::vector<double> sample_points(const CheckedInitial& init) {
    const std::size_t m = init.u0.size() - 1;
    std::vector<double> xs(m + 1);
    for (std::size_t i = 0; i <= m; ++i) xs[i] = init.h0 * (2.0 * static_cast<double>(i) - m) / m;
    return xs;
}

}  // namespace certificate_detail

/// K for the small-mass condition: max(f'(0)^+, max |f'| on [0, 1]).
inline double small_mass_K(const Nonlinearity& nl) {
    return std::max(std::max(nl.fprime(0.0), 0.0), lipschitz_bound(nl, std::min(1.0, nl.domain_cap())));
}

/// First satisfied sufficient condition for vanishing, checked in a fixed
/// order, or nothing. The answer is one-sided: nothing proves nothing.
inline std::optional<Certificate> vanishing_certificate(const CheckedInitial& init, const Nonlinearity& nl,
                                                        double alpha, const CertificateOptions& opt = {}) {
    const auto crit = critical_resistance(nl);
    const auto xs = certificate_detail::sample_points(init);

    if (crit.cond3) {
        const double a0 = crit.alpha0;
        const bool at_critical = std::abs(alpha - a0) <= opt.critical_tol * a0;
        if (alpha > a0 && !at_critical)
            return Certificate{CertificateReason::AlphaAboveCritical, alpha - a0,
                               "alpha = " + std::to_string(alpha) + " exceeds alpha0 = " + std::to_string(a0)};
        if (at_critical && crit.sup_at_cap)
            return Certificate{CertificateReason::CriticalNotAttained, 0.0,
                               "alpha equals alpha0 and sup F is approached only at the range limit"};
        if (at_critical) {
            const auto B = crossing_B(nl, alpha);
            if (B) {
                const certificate_detail::PlateauProfile P(nl, alpha, *B, opt.plateau_table);
                // u0 <= P(x + b) needs x + b >= 0 on the support, so b >= h0.
                const double span = std::max(P.reach(), 2.0 * init.h0);
                for (int k = 0; k <= opt.plateau_shifts; ++k) {
                    const double b = init.h0 + span * k / opt.plateau_shifts;
                    double margin = std::numeric_limits<double>::infinity();
                    for (std::size_t i = 0; i < xs.size(); ++i) margin = std::min(margin, P(xs[i] + b) - init.u0[i]);
                    if (margin >= 0.0)
                        return Certificate{CertificateReason::BelowPlateau, margin,
                                           "u0 lies under the plateau profile shifted by b = " + std::to_string(b)};
                }
            }
        }
        if (alpha < a0 && !at_critical) {
            const auto sc = classify_stationary(nl, alpha);
            if (sc.kind == StationaryCase::CompactSupport && init.h0 <= sc.ell.value()) {
                const StationaryShape V(nl, alpha);
                double margin = std::numeric_limits<double>::infinity();
                double gap = 0.0;
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    const double d = V(xs[i] + V.ell()) - init.u0[i];
                    margin = std::min(margin, d);
                    gap = std::max(gap, d);
                }
                if (margin >= 0.0 && gap > 0.0)
                    return Certificate{CertificateReason::BelowStationary, margin,
                                       "u0 <= V_alpha(x + ell) with ell = " + std::to_string(V.ell())};
            }
        }
    }

    const auto cls = classify_nonlinearity(nl);
    if (cls.kind == NonlinearityClass::Bistable) {
        if (init.sup <= cls.theta)
            return Certificate{CertificateReason::BelowTheta, cls.theta - init.sup,
                               "sup u0 = " + std::to_string(init.sup) + " <= theta = " + std::to_string(cls.theta)};
        const double K = small_mass_K(nl);
        const double bound = cls.theta * std::sqrt(2.0 * 3.14159265358979323846 / (std::exp(1.0) * K));
        if (init.l1 <= bound)
            return Certificate{CertificateReason::SmallMass, bound - init.l1,
                               "|u0|_1 = " + std::to_string(init.l1) + " <= " + std::to_string(bound)};
    }
    return std::nullopt;
}

}  // namespace resfront
