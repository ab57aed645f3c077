#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "resfront/errors.hpp"
#include "resfront/extended_real.hpp"
#include "resfront/nonlinearity.hpp"
#include "resfront/quadrature.hpp"

// Stationary problem v'' + f(v) = 0, v(0) = 0, v'(0) = alpha, solved through
// the first integral (v')^2 = alpha^2 - 2F(v).

namespace resfront {

struct CriticalResistance {
    double alpha0 = 0.0;   // sqrt(2 sup F), or 0 when sup F <= 0
    double sup_F = 0.0;
    double argmax = 0.0;   // smallest maximiser found
    bool cond3 = false;    // sup F > 0
    bool sup_at_cap = false;  // F still increasing at domain_cap: sup approached, not attained
};

enum class StationaryCase { CompactSupport, InfinitePlateau, Unbounded };

inline const char* to_string(StationaryCase c) {
    switch (c) {
        case StationaryCase::CompactSupport: return "compact_support";
        case StationaryCase::InfinitePlateau: return "infinite_plateau";
        case StationaryCase::Unbounded: return "unbounded";
    }
    return "?";
}

struct StationaryClass {
    double alpha = 0.0;
    double alpha0 = 0.0;
    StationaryCase kind = StationaryCase::Unbounded;
    double B = std::numeric_limits<double>::quiet_NaN();  // peak / plateau level
    ExtendedReal ell = ExtendedReal::infinity();          // half-width (CompactSupport)
    ExtendedReal ell_blowup = ExtendedReal::infinity();   // blow-up abscissa (Unbounded)
    bool blowup_is_lower_bound = false;
    bool cond3_holds = false;
    bool sup_at_cap = false;
};

struct StationaryProfile {
    double support_width = 0.0;  // 2 ell
    double peak = 0.0;           // B
    std::vector<double> x;
    std::vector<double> v;
};

namespace phase_detail {

inline constexpr double kScanStep = 1e-3;
inline constexpr double kTouchTol = 1e-12;
inline constexpr double kQuadTol = 1e-14;

template <class Visit>
void scan_grid(double cap, Visit&& visit) {
    const int steps = std::max(1000, static_cast<int>(std::ceil(cap / kScanStep)));
    for (int k = 1; k <= steps; ++k) {
        if (!visit(cap * (k - 1) / steps, cap * k / steps)) return;
    }
}

// Location of a local maximum of F inside [a, b], if f changes sign + -> -.
inline std::optional<double> local_max_of_F(const Nonlinearity& nl, double a, double b) {
    if (nl.f(a) > 0.0 && nl.f(b) <= 0.0)
        return detail::bisect_root([&](double v) { return nl.f(v); }, a, b);
    return std::nullopt;
}

}  // namespace phase_detail

/// sup of F over (0, domain_cap] and the critical resistance alpha0.
inline CriticalResistance critical_resistance(const Nonlinearity& nl) {
    CriticalResistance out;
    double best = 0.0, where = 0.0;
    phase_detail::scan_grid(nl.domain_cap(), [&](double a, double b) {
        if (auto m = phase_detail::local_max_of_F(nl, a, b)) {
            const double Fm = nl.F(*m);
            if (Fm > best) {
                best = Fm;
                where = *m;
            }
        }
        return true;
    });
    const double cap = nl.domain_cap();
    if (nl.f(cap) > 0.0 && nl.F(cap) > best) {
        best = nl.F(cap);
        where = cap;
        out.sup_at_cap = true;
    }
    out.sup_F = best;
    out.argmax = where;
    out.cond3 = best > 0.0;
    out.alpha0 = out.cond3 ? std::sqrt(2.0 * best) : 0.0;
    return out;
}

inline double alpha0(const Nonlinearity& nl) { return critical_resistance(nl).alpha0; }

/// B = min{ v > 0 : 2F(v) = alpha^2 }, or nothing when that set is empty.
///
/// Sign-bracketing scan with step 1e-3, plus a dedicated bracket at every
/// local maximum of F so that tangential contacts are caught; bisection to
/// 1e-12 relative followed by a Newton polish.
inline std::optional<double> crossing_B(const Nonlinearity& nl, double alpha) {
    if (!(alpha > 0.0)) throw PreconditionError("crossing_B: alpha must be positive");
    const double a2 = alpha * alpha;
    auto G = [&](double v) { return 2.0 * nl.F(v) - a2; };
    const double touch = phase_detail::kTouchTol * a2;

    auto polish = [&](double root, double lo, double hi) {
        for (int it = 0; it < 3; ++it) {
            const double slope = 2.0 * nl.f(root);
            if (slope <= 0.0) break;
            const double next = root - G(root) / slope;
            if (!(next >= lo && next <= hi)) break;
            root = next;
        }
        return root;
    };

    std::optional<double> found;
    phase_detail::scan_grid(nl.domain_cap(), [&](double a, double b) {
        if (auto m = phase_detail::local_max_of_F(nl, a, b)) {
            const double Gm = G(*m);
            if (std::abs(Gm) <= touch) {
                found = *m;
                return false;
            }
            if (Gm > 0.0) {
                const double r = detail::bisect_root(G, a, *m, 1e-12);
                found = polish(r, a, *m);
                return false;
            }
        }
        if (G(b) >= 0.0) {
            const double r = detail::bisect_root(G, a, b, 1e-12);
            found = polish(r, a, b);
            return false;
        }
        return true;
    });
    return found;
}

namespace phase_detail {

// Integrals of dr / sqrt(alpha^2 - 2F(r)) split at 0.9 B: plain quadrature
// below, r = B - s^2 above, which removes the (B - r)^(-1/2) singularity.
class FirstIntegral {
public:
    FirstIntegral(const Nonlinearity& nl, double alpha, double B)
        : nl_(nl), a2_(alpha * alpha), B_(B), v_split_(0.9 * B), s_split_(std::sqrt(0.1 * B)) {}

    double slope_sq(double v) const { return a2_ - 2.0 * nl_.F(v); }

    // x(v) for v in [0, v_split].
    double x_of_v(double v) const {
        auto g = [&](double r) { return 1.0 / std::sqrt(slope_sq(r)); };
        return quad::integrate(g, 0.0, v, kQuadTol, kQuadTol).value;
    }

    // Distance from the peak, ell - x, as a function of s = sqrt(B - v).
    double tail(double s) const {
        auto g = [&](double sigma) {
            return tail_integrand(sigma);
        };
        return quad::integrate(g, 0.0, s, kQuadTol, kQuadTol).value;
    }

    double tail_integrand(double s) const {
        if (s == 0.0) return 2.0 / std::sqrt(2.0 * nl_.f(B_));
        return 2.0 * s / std::sqrt(2.0 * nl_.F_below(B_, s * s));
    }

    double v_split() const { return v_split_; }
    double s_split() const { return s_split_; }
    double B() const { return B_; }

    // Tail integrals over [B - delta, B - delta/2] for 6 halvings of delta
    // starting at 0.1 B; the integral diverges when none of the 5 successive
    // ratios reaches 1.2.
    bool tail_diverges() const {
        auto g = [&](double r) { return 1.0 / std::sqrt(slope_sq(r)); };
        double delta = 0.1 * B_;
        double prev = quad::integrate(g, B_ - delta, B_ - delta / 2, 1e-13, 1e-10).value;
        for (int k = 0; k < 5; ++k) {
            delta /= 2.0;
            const double cur = quad::integrate(g, B_ - delta, B_ - delta / 2, 1e-13, 1e-10).value;
            if (prev / cur >= 1.2) return false;
            prev = cur;
        }
        return true;
    }

private:
    const Nonlinearity& nl_;
    double a2_;
    double B_;
    double v_split_;
    double s_split_;
};

}  // namespace phase_detail

/// ell = int_0^B dr / sqrt(alpha^2 - 2F(r)); +inf when the endpoint
/// singularity is non-integrable (tangential crossing f(B) = 0).
inline ExtendedReal half_width_ell(const Nonlinearity& nl, double alpha) {
    if (!(alpha > 0.0)) throw PreconditionError("half_width_ell: alpha must be positive");
    const auto B = crossing_B(nl, alpha);
    if (!B) throw PreconditionError("half_width_ell: 2F(v) = alpha^2 has no positive root (S is empty)");
    phase_detail::FirstIntegral fi(nl, alpha, *B);
    if (fi.tail_diverges()) return ExtendedReal::infinity();
    return ExtendedReal(fi.x_of_v(fi.v_split()) + fi.tail(fi.s_split()));
}

namespace phase_detail {

// Abscissa at which the unbounded profile leaves every bound, using the
// extended F past domain_cap. The far tail r = cap * e^y is integrated up to
// y = 80; a non-decaying integrand there means the abscissa is infinite.
inline void blowup_abscissa(const Nonlinearity& nl, double alpha, StationaryClass& sc) {
    const double a2 = alpha * alpha;
    const double cap = nl.domain_cap();
    auto near = [&](double r) { return 1.0 / std::sqrt(a2 - 2.0 * nl.F(r)); };
    const double inner = quad::integrate(near, 0.0, cap, 1e-10, 1e-10).value;

    bool crosses = false;
    auto far = [&](double y) {
        const double r = cap * std::exp(y);
        const double d = a2 - 2.0 * nl.F_extended(r);
        if (!(d > 0.0)) {
            crosses = true;
            return 0.0;
        }
        return r / std::sqrt(d);
    };
    constexpr double y_max = 80.0;
    const double last = far(y_max);
    if (crosses) {
        sc.ell_blowup = ExtendedReal(inner);
        sc.blowup_is_lower_bound = true;
        return;
    }
    if (last > 1e-12) {
        sc.ell_blowup = ExtendedReal::infinity();
        return;
    }
    const double outer = quad::integrate(far, 0.0, y_max, 1e-10, 1e-10).value;
    if (crosses) {
        sc.ell_blowup = ExtendedReal(inner);
        sc.blowup_is_lower_bound = true;
        return;
    }
    sc.ell_blowup = ExtendedReal(inner + outer);
}

}  // namespace phase_detail

/// Which kind of solution the stationary problem has for this alpha:
/// compact support on [0, 2 ell], a monotone plateau approaching B, or a
/// profile that blows up at a finite or infinite abscissa.
inline StationaryClass classify_stationary(const Nonlinearity& nl, double alpha) {
    if (!(alpha > 0.0)) throw PreconditionError("classify_stationary: alpha must be positive");
    const auto crit = critical_resistance(nl);
    StationaryClass sc;
    sc.alpha = alpha;
    sc.alpha0 = crit.alpha0;
    sc.cond3_holds = crit.cond3;
    sc.sup_at_cap = crit.sup_at_cap;

    const bool at_critical = crit.cond3 && std::abs(alpha - crit.alpha0) <= phase_detail::kTouchTol * crit.alpha0;
    if (!crit.cond3 || (alpha > crit.alpha0 && !at_critical) || (at_critical && crit.sup_at_cap)) {
        sc.kind = StationaryCase::Unbounded;
        phase_detail::blowup_abscissa(nl, alpha, sc);
        return sc;
    }
    const auto B = crossing_B(nl, alpha);
    if (!B) {
        sc.kind = StationaryCase::Unbounded;
        phase_detail::blowup_abscissa(nl, alpha, sc);
        return sc;
    }
    sc.B = *B;
    if (at_critical) {
        sc.kind = StationaryCase::InfinitePlateau;
        return sc;
    }
    sc.ell = half_width_ell(nl, alpha);
    sc.kind = sc.ell.is_finite() ? StationaryCase::CompactSupport : StationaryCase::InfinitePlateau;
    return sc;
}

/// Evaluates the compactly supported stationary profile V_alpha at any
/// abscissa by inverting x(v) node by node. V is zero outside [0, 2 ell].
class StationaryShape {
public:
    StationaryShape(const Nonlinearity& nl, double alpha) : nl_(nl), alpha_(alpha) {
        const auto sc = classify_stationary(nl_, alpha);
        if (sc.kind != StationaryCase::CompactSupport)
            throw PreconditionError(std::string("stationary profile needs compact support, got ") + to_string(sc.kind));
        B_ = sc.B;
        phase_detail::FirstIntegral fi(nl_, alpha_, B_);
        x_split_ = fi.x_of_v(fi.v_split());
        ell_ = x_split_ + fi.tail(fi.s_split());
    }

    double B() const { return B_; }
    double ell() const { return ell_; }
    double alpha() const { return alpha_; }
    const Nonlinearity& nonlinearity() const { return nl_; }

    double operator()(double x) const {
        if (x <= 0.0 || x >= 2.0 * ell_) return 0.0;
        const double y = x <= ell_ ? x : 2.0 * ell_ - x;
        return on_rising_half(y);
    }

    /// V on [0, ell], where it is strictly increasing.
    double on_rising_half(double y) const {
        if (y <= 0.0) return 0.0;
        if (y >= ell_) return B_;
        phase_detail::FirstIntegral fi(nl_, alpha_, B_);
        if (y <= x_split_) {
            // Newton on x(v) = y with bisection safeguard; dx/dv = 1 / sqrt(alpha^2 - 2F).
            double lo = 0.0, hi = fi.v_split();
            double v = std::min(alpha_ * y, 0.5 * (lo + hi));
            for (int it = 0; it < 100; ++it) {
                const double r = fi.x_of_v(v) - y;
                if (r > 0.0) hi = v; else lo = v;
                if (std::abs(r) <= 1e-15 * std::max(1.0, y) || hi - lo <= 1e-16 * B_) break;
                double next = v - r * std::sqrt(fi.slope_sq(v));
                if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
                v = next;
            }
            return v;
        }
        // Above the split: solve tail(s) = ell - y, then v = B - s^2.
        const double target = ell_ - y;
        double lo = 0.0, hi = fi.s_split();
        double s = std::min(target / fi.tail_integrand(0.0), hi);
        for (int it = 0; it < 100; ++it) {
            const double r = fi.tail(s) - target;
            if (r > 0.0) hi = s; else lo = s;
            if (std::abs(r) <= 1e-15 * std::max(1.0, ell_) || hi - lo <= 1e-17) break;
            double next = s - r / fi.tail_integrand(s);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            s = next;
        }
        return B_ - s * s;
    }

private:
    Nonlinearity nl_;
    double alpha_;
    double B_ = 0.0;
    double ell_ = 0.0;
    double x_split_ = 0.0;
};

/// Samples V_alpha on n + 1 uniform nodes of [0, 2 ell]. The right half is
/// the mirror image of the left, so symmetry is exact.
inline StationaryProfile profile_V(const Nonlinearity& nl, double alpha, int n) {
    if (n < 2) throw PreconditionError("profile_V: need at least 2 intervals");
    const StationaryShape shape(nl, alpha);
    StationaryProfile p;
    p.support_width = 2.0 * shape.ell();
    p.peak = shape.B();
    p.x.resize(n + 1);
    p.v.resize(n + 1);
    for (int i = 0; i <= n; ++i) p.x[i] = p.support_width * i / n;
    for (int i = 0; 2 * i <= n; ++i) {
        p.v[i] = 2 * i == n ? shape.B() : shape.on_rising_half(p.x[i]);
        p.v[n - i] = p.v[i];
    }
    return p;
}

}  // namespace resfront
