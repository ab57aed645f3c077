#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <utility>

#include "resfront/errors.hpp"

namespace resfront::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Options {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 1e-3;
    double h_min = 1e-14;
    double h_max = 1.0;
    std::size_t max_steps = 2'000'000;
};

enum class Stop { Reached, Observer, StepFailure };

template <std::size_t N>
struct Outcome {
    double t = 0.0;
    State<N> y{};
    Stop stop = Stop::Reached;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

namespace detail {

template <std::size_t N>
State<N> axpy(const State<N>& y, double h, std::initializer_list<std::pair<double, const State<N>*>> terms) {
    State<N> out = y;
    for (const auto& [c, k] : terms) {
        if (c == 0.0) continue;
        for (std::size_t i = 0; i < N; ++i) out[i] += h * c * (*k)[i];
    }
    return out;
}

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) with FSAL and a plain step-size controller.
/// `observe(t, y)` runs after every accepted step; returning false stops.
template <std::size_t N, class Rhs, class Observe>
Outcome<N> dormand_prince(const Rhs& rhs, double t0, State<N> y0, double t_end, const Options& opt, Observe&& observe) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    Outcome<N> out;
    out.t = t0;
    out.y = y0;
    double h = std::min(opt.h_init, t_end - t0);
    State<N> k1 = rhs(out.t, out.y);

    while (out.t < t_end) {
        if (out.accepted + out.rejected >= opt.max_steps) {
            out.stop = Stop::StepFailure;
            return out;
        }
        h = std::min(h, t_end - out.t);
        const double t = out.t;
        const State<N>& y = out.y;
        const State<N> k2 = rhs(t + c2 * h, detail::axpy<N>(y, h, {{a21, &k1}}));
        const State<N> k3 = rhs(t + c3 * h, detail::axpy<N>(y, h, {{a31, &k1}, {a32, &k2}}));
        const State<N> k4 = rhs(t + c4 * h, detail::axpy<N>(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const State<N> k5 =
            rhs(t + c5 * h, detail::axpy<N>(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const State<N> k6 =
            rhs(t + h, detail::axpy<N>(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
        const State<N> y5 = detail::axpy<N>(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        const State<N> k7 = rhs(t + h, y5);

        double err = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < N; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
            err += (e / sc) * (e / sc);
            finite = finite && std::isfinite(y5[i]);
        }
        err = std::sqrt(err / N);

        if (finite && err <= 1.0) {
            out.t = t + h;
            out.y = y5;
            k1 = k7;
            ++out.accepted;
            if (!observe(out.t, out.y)) {
                out.stop = Stop::Observer;
                return out;
            }
            const double grow = err == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(err, -0.2));
            h = std::min(opt.h_max, h * grow);
        } else {
            ++out.rejected;
            const double shrink = finite ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.25;
            h *= shrink;
            if (h < opt.h_min) {
                out.stop = Stop::StepFailure;
                return out;
            }
        }
    }
    out.stop = Stop::Reached;
    return out;
}

/// One classical RK4 step.
template <std::size_t N, class Rhs>
State<N> rk4_step(const Rhs& rhs, double t, const State<N>& y, double h) {
    const State<N> k1 = rhs(t, y);
    const State<N> k2 = rhs(t + h / 2, detail::axpy<N>(y, h, {{0.5, &k1}}));
    const State<N> k3 = rhs(t + h / 2, detail::axpy<N>(y, h, {{0.5, &k2}}));
    const State<N> k4 = rhs(t + h, detail::axpy<N>(y, h, {{1.0, &k3}}));
    return detail::axpy<N>(y, h, {{1.0 / 6, &k1}, {1.0 / 3, &k2}, {1.0 / 3, &k3}, {1.0 / 6, &k4}});
}

}  // namespace resfront::ode
