#pragma once

#include <cmath>
#include <limits>
#include <ostream>

#include "resfront/errors.hpp"

namespace resfront {

/// A non-negative quantity that may be +infinity (half-widths, critical
/// resistances, blow-up positions). Infinity is an explicit state, not a
/// large float.
class ExtendedReal {
public:
    constexpr ExtendedReal() = default;
    constexpr explicit ExtendedReal(double v) : value_(v) {}

    static constexpr ExtendedReal infinity() {
        ExtendedReal r;
        r.infinite_ = true;
        return r;
    }

    constexpr bool is_finite() const { return !infinite_; }
    constexpr bool is_infinite() const { return infinite_; }

    double value() const {
        if (infinite_) throw DomainError("ExtendedReal::value() called on +infinity");
        return value_;
    }

    /// Finite value, or +inf as an IEEE double for arithmetic that tolerates it.
    constexpr double as_double() const {
        return infinite_ ? std::numeric_limits<double>::infinity() : value_;
    }

    friend constexpr bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
        return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
    }
    friend constexpr bool operator<(const ExtendedReal& a, const ExtendedReal& b) {
        return a.as_double() < b.as_double();
    }

    friend std::ostream& operator<<(std::ostream& os, const ExtendedReal& x) {
        if (x.infinite_) return os << "inf";
        return os << x.value_;
    }

private:
    double value_ = 0.0;
    bool infinite_ = false;
};

}  // namespace resfront
