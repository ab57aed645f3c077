#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "resfront/errors.hpp"

namespace resfront {

/// f(u) = r u (1 - u).
struct Logistic {
    double r = 1.0;
};

/// f(u) = u (u - theta) (1 - u), theta in (0, 1).
struct CubicBistable {
    double theta = 0.25;
};

struct TableNode {
    double u;
    double f;
    double fprime;
};

/// Piecewise cubic Hermite interpolant of (u, f, f') triples. The first node
/// must sit at u = 0 with f = 0; the last node fixes the trusted range.
struct TabulatedC1 {
    std::vector<TableNode> nodes;
    std::vector<double> prefix;  // prefix[i] = integral of f over [0, nodes[i].u]
};

/// f identically zero.
struct Zero {};

enum class NonlinearityClass { Monostable, Bistable, Other };

struct Classification {
    NonlinearityClass kind = NonlinearityClass::Other;
    double theta = std::numeric_limits<double>::quiet_NaN();  // Bistable only
};

inline const char* to_string(NonlinearityClass c) {
    switch (c) {
        case NonlinearityClass::Monostable: return "monostable";
        case NonlinearityClass::Bistable: return "bistable";
        case NonlinearityClass::Other: return "other";
    }
    return "?";
}

/// Reaction term f together with its antiderivative F(u) = int_0^u f.
///
/// Immutable once built. The checked evaluators (f, fprime, F) reject
/// arguments outside [0, domain_cap]; the *_extended variants continue f
/// past the trusted range (linearly below 0, by the closed form or a C1
/// linear continuation above the cap) and are meant for numerical internals
/// that may wander marginally outside.
class Nonlinearity {
public:
    using Kind = std::variant<Logistic, CubicBistable, TabulatedC1, Zero>;
    static constexpr double kDefaultDomainCap = 5.0;

    static Nonlinearity logistic(double r = 1.0, double cap = kDefaultDomainCap) {
        if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("logistic: r must be a positive finite number");
        return Nonlinearity(Logistic{r}, cap);
    }

    static Nonlinearity cubic_bistable(double theta, double cap = kDefaultDomainCap) {
        if (!(theta > 0.0 && theta < 1.0)) throw ValidationError("cubic_bistable: theta must lie in (0, 1)");
        return Nonlinearity(CubicBistable{theta}, cap);
    }

    static Nonlinearity zero(double cap = kDefaultDomainCap) { return Nonlinearity(Zero{}, cap); }

    static Nonlinearity tabulated(std::vector<TableNode> nodes) {
        if (nodes.size() < 2) throw ValidationError("tabulated: need at least two nodes");
        if (nodes.front().u != 0.0) throw ValidationError("tabulated: first node must be at u = 0");
        if (nodes.front().f != 0.0) throw ValidationError("tabulated: f(0) must be 0");
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const auto& n = nodes[i];
            if (!std::isfinite(n.u) || !std::isfinite(n.f) || !std::isfinite(n.fprime))
                throw ValidationError("tabulated: non-finite entry at node " + std::to_string(i));
            if (i > 0 && !(n.u > nodes[i - 1].u))
                throw ValidationError("tabulated: u must be strictly increasing (node " + std::to_string(i) + ")");
        }
        TabulatedC1 t;
        t.prefix.resize(nodes.size(), 0.0);
        for (std::size_t i = 1; i < nodes.size(); ++i) {
            const auto& a = nodes[i - 1];
            const auto& b = nodes[i];
            const double h = b.u - a.u;
            t.prefix[i] = t.prefix[i - 1] + h * (a.f + b.f) / 2.0 + h * h * (a.fprime - b.fprime) / 12.0;
        }
        const double cap = nodes.back().u;
        t.nodes = std::move(nodes);
        return Nonlinearity(std::move(t), cap);
    }

    const Kind& kind() const { return kind_; }
    double domain_cap() const { return cap_; }
    bool is_closed_form() const { return !std::holds_alternative<TabulatedC1>(kind_); }

    /// Same reaction term with a different trusted range. Tabulated terms
    /// cannot be widened beyond their last node.
    Nonlinearity with_domain_cap(double cap) const {
        if (auto* t = std::get_if<TabulatedC1>(&kind_); t && cap > t->nodes.back().u)
            throw DomainError("tabulated nonlinearity cannot be widened beyond its last node");
        Nonlinearity copy = *this;
        copy.set_cap(cap);
        return copy;
    }

    std::string describe() const {
        std::ostringstream os;
        std::visit(
            [&](const auto& k) {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, Logistic>) os << "logistic(r=" << k.r << ")";
                else if constexpr (std::is_same_v<K, CubicBistable>) os << "cubic_bistable(theta=" << k.theta << ")";
                else if constexpr (std::is_same_v<K, TabulatedC1>) os << "tabulated(" << k.nodes.size() << " nodes)";
                else os << "zero";
            },
            kind_);
        os << " on [0, " << cap_ << "]";
        return os.str();
    }

    double f(double u) const { return f_extended(check(u)); }
    double fprime(double u) const { return fprime_extended(check(u)); }
    double F(double u) const { return F_extended(check(u)); }

    /// int_a^b f(s) ds, written to avoid cancellation when a and b are close.
    double F_between(double a, double b) const {
        check(a);
        check(b);
        return F_between_extended(a, b);
    }

    /// int_{top - depth}^{top} f(s) ds. Taylor-exact about `top` for the
    /// polynomial pieces, so tiny depths keep full relative precision.
    double F_below(double top, double depth) const {
        check(top);
        if (!(depth >= 0.0) || top - depth < -1e-12 * top)
            throw DomainError("F_below: depth must lie in [0, top]");
        if (auto* t = std::get_if<TabulatedC1>(&kind_)) {
            const std::size_t i = segment(*t, top);
            if (top - depth < t->nodes[i].u) return F_extended(top) - F_extended(std::max(0.0, top - depth));
        }
        const double d = depth;
        const auto [f0, f1, f2, f3] = derivatives(top);
        return d * (f0 - d * (f1 / 2.0 - d * (f2 / 6.0 - d * f3 / 24.0)));
    }

    double f_extended(double u) const {
        if (u < 0.0) return fprime_at_zero() * u;
        return std::visit(
            [&](const auto& k) -> double {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, Logistic>) return k.r * u * (1.0 - u);
                else if constexpr (std::is_same_v<K, CubicBistable>) return u * (u - k.theta) * (1.0 - u);
                else if constexpr (std::is_same_v<K, TabulatedC1>) return table_value(k, u);
                else return 0.0;
            },
            kind_);
    }

    double fprime_extended(double u) const {
        if (u < 0.0) return fprime_at_zero();
        return std::visit(
            [&](const auto& k) -> double {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, Logistic>) return k.r * (1.0 - 2.0 * u);
                else if constexpr (std::is_same_v<K, CubicBistable>)
                    return -3.0 * u * u + 2.0 * (1.0 + k.theta) * u - k.theta;
                else if constexpr (std::is_same_v<K, TabulatedC1>) return table_slope(k, u);
                else return 0.0;
            },
            kind_);
    }

    double F_extended(double u) const {
        if (u < 0.0) return 0.5 * fprime_at_zero() * u * u;
        return std::visit(
            [&](const auto& k) -> double {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, Logistic>) return k.r * u * u * (0.5 - u / 3.0);
                else if constexpr (std::is_same_v<K, CubicBistable>)
                    return u * u * (-u * u / 4.0 + (1.0 + k.theta) * u / 3.0 - k.theta / 2.0);
                else if constexpr (std::is_same_v<K, TabulatedC1>) return table_integral(k, u);
                else return 0.0;
            },
            kind_);
    }

    double F_between_extended(double a, double b) const {
        if (a < 0.0 || b < 0.0) return F_extended(b) - F_extended(a);
        return std::visit(
            [&](const auto& k) -> double {
                using K = std::decay_t<decltype(k)>;
                const double d = b - a;
                if constexpr (std::is_same_v<K, Logistic>)
                    return k.r * d * ((a + b) / 2.0 - (a * a + a * b + b * b) / 3.0);
                else if constexpr (std::is_same_v<K, CubicBistable>)
                    return d * (-(a + b) * (a * a + b * b) / 4.0 + (1.0 + k.theta) * (a * a + a * b + b * b) / 3.0 -
                                k.theta * (a + b) / 2.0);
                else if constexpr (std::is_same_v<K, TabulatedC1>) return table_integral(k, b) - table_integral(k, a);
                else return 0.0;
            },
            kind_);
    }

private:
    Nonlinearity(Kind k, double cap) : kind_(std::move(k)) { set_cap(cap); }

    void set_cap(double cap) {
        if (!(cap > 0.0) || !std::isfinite(cap)) throw ValidationError("domain_cap must be a positive finite number");
        cap_ = cap;
    }

    double check(double u) const {
        if (!(u >= 0.0 && u <= cap_)) {
            std::ostringstream os;
            os << "u = " << u << " outside trusted range [0, " << cap_ << "] of " << describe();
            throw DomainError(os.str());
        }
        return u;
    }

    double fprime_at_zero() const { return fprime_extended(0.0); }

    // f and its first three derivatives at u, within the polynomial piece containing u.
    std::array<double, 4> derivatives(double u) const {
        return std::visit(
            [&](const auto& k) -> std::array<double, 4> {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, Logistic>) {
                    return {k.r * u * (1.0 - u), k.r * (1.0 - 2.0 * u), -2.0 * k.r, 0.0};
                } else if constexpr (std::is_same_v<K, CubicBistable>) {
                    return {u * (u - k.theta) * (1.0 - u), -3.0 * u * u + 2.0 * (1.0 + k.theta) * u - k.theta,
                            -6.0 * u + 2.0 * (1.0 + k.theta), -6.0};
                } else if constexpr (std::is_same_v<K, TabulatedC1>) {
                    const std::size_t i = segment(k, u);
                    const auto& a = k.nodes[i];
                    const auto& b = k.nodes[i + 1];
                    const double h = b.u - a.u;
                    const double s = (u - a.u) / h;
                    const double c2 = (a.f * (12 * s - 6) + b.f * (-12 * s + 6)) / (h * h) +
                                      (a.fprime * (6 * s - 4) + b.fprime * (6 * s - 2)) / h;
                    const double c3 = (12 * a.f - 12 * b.f) / (h * h * h) + 6 * (a.fprime + b.fprime) / (h * h);
                    return {table_value(k, u), table_slope(k, u), c2, c3};
                } else {
                    return {0.0, 0.0, 0.0, 0.0};
                }
            },
            kind_);
    }

    static std::size_t segment(const TabulatedC1& t, double u) {
        auto it = std::upper_bound(t.nodes.begin(), t.nodes.end(), u,
                                   [](double v, const TableNode& n) { return v < n.u; });
        std::size_t i = static_cast<std::size_t>(it - t.nodes.begin());
        return i == 0 ? 0 : std::min(i - 1, t.nodes.size() - 2);
    }

    // Past the last node the table continues as the tangent line of f.
    static double table_value(const TabulatedC1& t, double u) {
        const auto& last = t.nodes.back();
        if (u > last.u) return last.f + last.fprime * (u - last.u);
        const std::size_t i = segment(t, u);
        const auto& a = t.nodes[i];
        const auto& b = t.nodes[i + 1];
        const double h = b.u - a.u;
        const double s = (u - a.u) / h;
        const double s2 = s * s, s3 = s2 * s;
        return a.f * (2 * s3 - 3 * s2 + 1) + h * a.fprime * (s3 - 2 * s2 + s) + b.f * (-2 * s3 + 3 * s2) +
               h * b.fprime * (s3 - s2);
    }

    static double table_slope(const TabulatedC1& t, double u) {
        const auto& last = t.nodes.back();
        if (u > last.u) return last.fprime;
        const std::size_t i = segment(t, u);
        const auto& a = t.nodes[i];
        const auto& b = t.nodes[i + 1];
        const double h = b.u - a.u;
        const double s = (u - a.u) / h;
        const double s2 = s * s;
        return (a.f * (6 * s2 - 6 * s) + b.f * (-6 * s2 + 6 * s)) / h + a.fprime * (3 * s2 - 4 * s + 1) +
               b.fprime * (3 * s2 - 2 * s);
    }

    static double table_integral(const TabulatedC1& t, double u) {
        const auto& last = t.nodes.back();
        if (u > last.u) {
            const double d = u - last.u;
            return t.prefix.back() + last.f * d + 0.5 * last.fprime * d * d;
        }
        const std::size_t i = segment(t, u);
        const auto& a = t.nodes[i];
        const auto& b = t.nodes[i + 1];
        const double h = b.u - a.u;
        const double s = (u - a.u) / h;
        const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
        const double partial = a.f * (s4 / 2 - s3 + s) + h * a.fprime * (s4 / 4 - 2 * s3 / 3 + s2 / 2) +
                               b.f * (-s4 / 2 + s3) + h * b.fprime * (s4 / 4 - s3 / 3);
        return t.prefix[i] + h * partial;
    }

    Kind kind_;
    double cap_ = kDefaultDomainCap;
};

inline double eval_f(const Nonlinearity& nl, double u) { return nl.f(u); }
inline double eval_F(const Nonlinearity& nl, double u) { return nl.F(u); }

/// max |f'(u)| over [0, cap]. Exact for the polynomial kinds; for tables,
/// 10^4 samples plus the interior extremum of each segment's quadratic f'.
inline double lipschitz_bound(const Nonlinearity& nl, double cap) {
    if (!(cap > 0.0 && cap <= nl.domain_cap()))
        throw DomainError("lipschitz_bound: cap must lie in (0, domain_cap]");
    return std::visit(
        [&](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Logistic>) {
                return std::max(std::abs(k.r), std::abs(k.r * (1.0 - 2.0 * cap)));
            } else if constexpr (std::is_same_v<K, CubicBistable>) {
                double best = std::max(std::abs(nl.fprime(0.0)), std::abs(nl.fprime(cap)));
                const double vertex = (1.0 + k.theta) / 3.0;
                if (vertex < cap) best = std::max(best, std::abs(nl.fprime(vertex)));
                return best;
            } else if constexpr (std::is_same_v<K, TabulatedC1>) {
                constexpr int samples = 10000;
                double best = 0.0;
                for (int i = 0; i <= samples; ++i) best = std::max(best, std::abs(nl.fprime(cap * i / samples)));
                for (std::size_t i = 0; i + 1 < k.nodes.size() && k.nodes[i].u < cap; ++i) {
                    const auto& a = k.nodes[i];
                    const auto& b = k.nodes[i + 1];
                    const double h = b.u - a.u;
                    const double A = 6.0 * (a.f - b.f) / h + 3.0 * (a.fprime + b.fprime);
                    const double Bc = 6.0 * (b.f - a.f) / h - 4.0 * a.fprime - 2.0 * b.fprime;
                    if (A == 0.0) continue;
                    const double s = -Bc / (2.0 * A);
                    const double u = a.u + s * h;
                    if (s > 0.0 && s < 1.0 && u <= cap) best = std::max(best, std::abs(nl.fprime(u)));
                }
                return best;
            } else {
                return 0.0;
            }
        },
        nl.kind());
}

namespace detail {

/// Bisection for a sign change of g on [a, b]; assumes g(a) g(b) <= 0.
template <class G>
double bisect_root(const G& g, double a, double b, double rel_tol = 1e-15) {
    double ga = g(a);
    if (ga == 0.0) return a;
    if (g(b) == 0.0) return b;
    for (int it = 0; it < 200 && (b - a) > rel_tol * std::max(std::abs(a), std::abs(b)); ++it) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const double gm = g(m);
        if (gm == 0.0) return m;
        if ((gm < 0.0) == (ga < 0.0)) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

/// Structural type of f: monostable, bistable (with its interior zero), or
/// neither. Sign conditions are checked on a 2048-point grid of
/// (0, domain_cap) together with the endpoint derivative signs, so a
/// pathological table can slip past the check.
inline Classification classify_nonlinearity(const Nonlinearity& nl) {
    constexpr int grid = 2048;
    constexpr double zero_tol = 1e-12;
    const double cap = nl.domain_cap();
    Classification out;
    if (cap <= 1.0) return out;
    if (std::abs(nl.f(1.0)) > zero_tol) return out;
    const double d0 = nl.fprime(0.0);
    const double d1 = nl.fprime(1.0);

    auto grid_point = [&](int k) { return cap * k / (grid + 1.0); };

    if (d0 > 0.0 && d1 < 0.0) {
        bool ok = true;
        for (int k = 1; k <= grid && ok; ++k) {
            const double u = grid_point(k);
            if (std::abs(u - 1.0) < zero_tol) continue;
            ok = (1.0 - u) * nl.f(u) > 0.0;
        }
        if (ok) out.kind = NonlinearityClass::Monostable;
        return out;
    }

    if (d0 < 0.0 && d1 < 0.0 && nl.F(1.0) > 0.0) {
        // Interior zero: the last sign change of f inside (0, 1).
        double prev_u = 0.0, theta = -1.0;
        double prev_f = std::numeric_limits<double>::quiet_NaN();
        for (int k = 1; k <= grid; ++k) {
            const double u = grid_point(k);
            if (u >= 1.0) break;
            const double fu = nl.f(u);
            if (std::isfinite(prev_f) && prev_f < 0.0 && fu >= 0.0)
                theta = detail::bisect_root([&](double v) { return nl.f(v); }, prev_u, u);
            prev_u = u;
            prev_f = fu;
        }
        if (!(theta > 0.0 && theta < 1.0)) return out;
        bool ok = true;
        for (int k = 1; k <= grid && ok; ++k) {
            const double u = grid_point(k);
            if (std::abs(u - theta) < 1e-9 || std::abs(u - 1.0) < zero_tol) continue;
            const double fu = nl.f(u);
            if (u < theta) ok = fu < 0.0;
            else if (u < 1.0) ok = fu > 0.0;
            else ok = fu < 0.0;
        }
        if (ok) {
            out.kind = NonlinearityClass::Bistable;
            out.theta = theta;
        }
    }
    return out;
}

/// Smallest u > 0 at which f changes sign from positive to negative: the
/// plateau a spreading solution settles on. Empty if there is none in range.
inline std::optional<double> spreading_plateau(const Nonlinearity& nl) {
    constexpr int grid = 4096;
    const double cap = nl.domain_cap();
    double prev_u = cap / grid;
    double prev_f = nl.f(prev_u);
    for (int k = 2; k <= grid; ++k) {
        const double u = cap * k / grid;
        const double fu = nl.f(u);
        if (prev_f > 0.0 && fu <= 0.0)
            return detail::bisect_root([&](double v) { return nl.f(v); }, prev_u, u);
        prev_u = u;
        prev_f = fu;
    }
    return std::nullopt;
}

}  // namespace resfront
