#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "resfront/phase_plane.hpp"

using namespace resfront;
using Catch::Approx;

namespace {

// Half-width by the first integral, x(B) = int_0^B dv / sqrt(alpha^2 - 2F(v)).
// With v = B - s^2 and alpha^2 = 2F(B) the integrand becomes the smooth
// 2 / sqrt(2 (F(B) - F(B - s^2)) / s^2), expanded by hand for the logistic F.
double ell_by_simpson(double B) {
    auto g = [&](double s) {
        const double d = s * s;
        const double q = (B - B * B) + d * (B - 0.5) - d * d / 3.0;
        return 2.0 / std::sqrt(2.0 * q);
    };
    return oracle::simpson(g, 0.0, std::sqrt(B), 1e-14);
}

double logistic_B(double alpha) {
    return oracle::bisect([&](double v) { return 2.0 * oracle::logistic_F(v) - alpha * alpha; }, 0.0, 1.0);
}

}  // namespace

TEST_CASE("critical resistance of the logistic and cubic families", "[phase_plane]") {
    const auto L = critical_resistance(Nonlinearity::logistic());
    CHECK(L.alpha0 == Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-12));
    CHECK(L.argmax == Approx(1.0).margin(1e-12));
    CHECK(L.cond3);
    CHECK_FALSE(L.sup_at_cap);
    for (double th : {0.1, 0.25, 0.4}) {
        const auto C = critical_resistance(Nonlinearity::cubic_bistable(th));
        CHECK(C.alpha0 == Approx(std::sqrt(2.0 * oracle::cubic_F(1.0, th))).epsilon(1e-12));
    }
    CHECK_FALSE(critical_resistance(Nonlinearity::zero()).cond3);
    CHECK(alpha0(Nonlinearity::logistic()) == Approx(0.577350269189626).epsilon(1e-13));
}

TEST_CASE("B solves alpha^2 = 2F(B) against brute-force bisection", "[phase_plane][oracle]") {
    for (double a : {0.05, 0.2, 0.4, 0.55}) {
        const auto B = crossing_B(Nonlinearity::logistic(), a);
        REQUIRE(B.has_value());
        CHECK(*B == Approx(logistic_B(a)).epsilon(1e-12));
    }
    CHECK(*crossing_B(Nonlinearity::logistic(), 0.4) == Approx(0.486663503923244).epsilon(1e-12));
    CHECK_FALSE(crossing_B(Nonlinearity::logistic(), 0.7).has_value());
}

TEST_CASE("ell matches two independent oracles", "[phase_plane][oracle]") {
    const auto nl = Nonlinearity::logistic();
    for (double a : {0.12, 0.25, 0.4, 0.5}) {
        const double ell = half_width_ell(nl, a).value();
        CHECK(ell == Approx(ell_by_simpson(logistic_B(a))).epsilon(1e-9));
        const auto shot = oracle::shoot_peak([](double v) { return v * (1 - v); }, a);
        CHECK(ell == Approx(shot.peak_x).epsilon(1e-7));
        CHECK(shot.peak_v == Approx(logistic_B(a)).epsilon(1e-7));
    }
    CHECK(half_width_ell(nl, 0.4).value() == Approx(2.05740696616544).epsilon(1e-11));
}

TEST_CASE("ell increases toward alpha0", "[phase_plane][property]") {
    const auto nl = Nonlinearity::logistic();
    double prev = 0.0;
    for (double a = 0.05; a < 0.57; a += 0.04) {
        const double e = half_width_ell(nl, a).value();
        CHECK(e > prev);
        prev = e;
    }
}

TEST_CASE("stationary classification cases", "[phase_plane]") {
    const auto L = Nonlinearity::logistic();
    const auto c = classify_stationary(L, 0.4);
    CHECK(c.kind == StationaryCase::CompactSupport);
    CHECK(c.B == Approx(0.486663503923244).epsilon(1e-12));
    CHECK(c.ell.value() == Approx(2.05740696616544).epsilon(1e-11));

    const auto p = classify_stationary(L, alpha0(L));
    CHECK(p.kind == StationaryCase::InfinitePlateau);
    CHECK(p.B == Approx(1.0).margin(1e-9));

    const auto u = classify_stationary(L, 0.7);
    CHECK(u.kind == StationaryCase::Unbounded);
    CHECK_FALSE(u.ell.is_finite());

    const auto z = classify_stationary(Nonlinearity::zero(), 0.5);
    CHECK(z.kind == StationaryCase::Unbounded);
    CHECK_FALSE(z.cond3_holds);
    CHECK_THROWS_AS(classify_stationary(L, 0.0), PreconditionError);
}

TEST_CASE("blow-up abscissa for f = 0 is infinite", "[phase_plane]") {
    // v'' = 0 gives v = alpha x, which never blows up.
    const auto z = classify_stationary(Nonlinearity::zero(), 0.3);
    CHECK_FALSE(z.ell_blowup.is_finite());
}

TEST_CASE("profile_V satisfies the ODE, first integral and symmetry", "[phase_plane][property]") {
    const auto nl = Nonlinearity::logistic();
    for (double a : {0.2, 0.4, 0.55}) {
        const auto p = profile_V(nl, a, 1000);
        const int n = 1000;
        CHECK(p.support_width == Approx(2.0 * half_width_ell(nl, a).value()));
        CHECK(p.v.front() == 0.0);
        CHECK(p.v.back() == 0.0);
        double sym = 0.0, fi = 0.0;
        for (int i = 0; i <= n; ++i) sym = std::max(sym, std::abs(p.v[i] - p.v[n - i]));
        for (int i = 1; i < n; ++i) {
            const double vp = oracle::derivative(p.x, p.v, i, 1);
            fi = std::max(fi, std::abs(vp * vp + 2 * oracle::logistic_F(p.v[i]) - a * a));
        }
        CHECK(sym <= 1e-10);
        CHECK(fi <= 1e-6);
        const double peak = *std::max_element(p.v.begin(), p.v.end());
        CHECK(peak == Approx(logistic_B(a)).epsilon(1e-6));
    }
}

TEST_CASE("StationaryShape is zero outside its support and symmetric", "[phase_plane]") {
    const StationaryShape V(Nonlinearity::logistic(), 0.4);
    CHECK(V(-0.1) == 0.0);
    CHECK(V(2 * V.ell() + 0.1) == 0.0);
    CHECK(V(V.ell()) == Approx(V.B()).epsilon(1e-12));
    for (double x : {0.1, 0.7, 1.5, 2.0}) CHECK(V(x) == Approx(V(2 * V.ell() - x)).margin(1e-13));
    // Near x = 0, V ~ alpha x.
    CHECK(V(1e-6) / 1e-6 == Approx(0.4).epsilon(1e-5));
}

TEST_CASE("bistable compact profiles agree with shooting", "[phase_plane][oracle]") {
    const auto nl = Nonlinearity::cubic_bistable(0.25);
    for (double a : {0.1, 0.2}) {
        const auto shot = oracle::shoot_peak([](double v) { return oracle::cubic_f(v, 0.25); }, a);
        CHECK(half_width_ell(nl, a).value() == Approx(shot.peak_x).epsilon(1e-7));
    }
}
