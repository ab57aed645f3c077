#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "resfront/nonlinearity.hpp"

using namespace resfront;
using Catch::Approx;

namespace {

Nonlinearity table_of(double (*f)(double), double (*fp)(double), double top, int n) {
    std::vector<TableNode> nodes;
    for (int i = 0; i <= n; ++i) {
        const double u = top * i / n;
        nodes.push_back({u, f(u), fp(u)});
    }
    return Nonlinearity::tabulated(nodes);
}

double logi(double u) { return u * (1.0 - u); }
double logi_p(double u) { return 1.0 - 2.0 * u; }

}  // namespace

TEST_CASE("logistic values match closed forms", "[nonlinearity]") {
    const auto nl = Nonlinearity::logistic();
    for (double u : {0.0, 0.1, 0.5, 0.9, 1.0, 2.5}) {
        CHECK(nl.f(u) == Approx(u * (1 - u)).margin(1e-15));
        CHECK(nl.fprime(u) == Approx(1 - 2 * u).margin(1e-15));
        CHECK(nl.F(u) == Approx(oracle::logistic_F(u)).margin(1e-15));
    }
    const auto r2 = Nonlinearity::logistic(2.0);
    CHECK(r2.f(0.25) == Approx(2 * 0.25 * 0.75));
}

TEST_CASE("F agrees with adaptive Simpson of f", "[nonlinearity][oracle]") {
    const auto cubic = Nonlinearity::cubic_bistable(0.3);
    for (double u : {0.05, 0.3, 0.77, 1.0, 1.8, 4.0}) {
        const double ref = oracle::simpson([&](double s) { return oracle::cubic_f(s, 0.3); }, 0.0, u);
        CHECK(cubic.F(u) == Approx(ref).margin(1e-12));
        CHECK(cubic.F(u) == Approx(oracle::cubic_F(u, 0.3)).margin(1e-13));
    }
}

TEST_CASE("F_between and F_below are consistent with F", "[nonlinearity]") {
    const auto nl = Nonlinearity::cubic_bistable(0.25);
    CHECK(nl.F_between(0.2, 0.9) == Approx(nl.F(0.9) - nl.F(0.2)).margin(1e-14));
    CHECK(nl.F_below(0.9, 0.4) == Approx(nl.F(0.9) - nl.F(0.5)).margin(1e-14));
    // Tiny depths keep full relative accuracy: F(B) - F(B - d) ~ f(B) d.
    const double d = 1e-10;
    CHECK(nl.F_below(0.9, d) == Approx(nl.f(0.9) * d - nl.fprime(0.9) * d * d / 2).epsilon(1e-12));
    CHECK_THROWS_AS(nl.F_below(0.5, 0.6), DomainError);
}

TEST_CASE("tabulated f reproduces a quadratic exactly", "[nonlinearity][tabulated]") {
    const auto t = table_of(logi, logi_p, 2.0, 8);
    for (double u : {0.0, 0.13, 0.5, 0.999, 1.37, 2.0}) {
        CHECK(t.f(u) == Approx(logi(u)).margin(1e-14));
        CHECK(t.fprime(u) == Approx(logi_p(u)).margin(1e-13));
        CHECK(t.F(u) == Approx(oracle::logistic_F(u)).margin(1e-14));
    }
    CHECK(t.domain_cap() == 2.0);
    CHECK_FALSE(t.is_closed_form());
}

TEST_CASE("tabulated F converges at fourth order for a non-polynomial f", "[nonlinearity][tabulated]") {
    auto f = [](double u) { return std::sin(3 * u) * u; };
    auto fp = [](double u) { return 3 * std::cos(3 * u) * u + std::sin(3 * u); };
    auto err = [&](int n) {
        std::vector<TableNode> nodes;
        for (int i = 0; i <= n; ++i) {
            const double u = 2.0 * i / n;
            nodes.push_back({u, f(u), fp(u)});
        }
        const auto t = Nonlinearity::tabulated(nodes);
        return std::abs(t.F(2.0) - oracle::simpson(f, 0.0, 2.0, 1e-15));
    };
    const double ratio = err(20) / err(40);
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
}

TEST_CASE("table validation rejects malformed input", "[nonlinearity][tabulated]") {
    CHECK_THROWS_AS(Nonlinearity::tabulated({{0, 0, 1}}), ValidationError);
    CHECK_THROWS_AS(Nonlinearity::tabulated({{0.1, 0, 1}, {1, 0, -1}}), ValidationError);
    CHECK_THROWS_AS(Nonlinearity::tabulated({{0, 0.5, 1}, {1, 0, -1}}), ValidationError);
    CHECK_THROWS_AS(Nonlinearity::tabulated({{0, 0, 1}, {0, 0, -1}}), ValidationError);
    CHECK_THROWS_AS(Nonlinearity::tabulated({{0, 0, 1}, {1, NAN, -1}}), ValidationError);
}

TEST_CASE("evaluation outside the trusted range throws", "[nonlinearity]") {
    const auto nl = Nonlinearity::logistic(1.0, 3.0);
    CHECK_THROWS_AS(nl.f(3.5), DomainError);
    CHECK_THROWS_AS(nl.F(-0.1), DomainError);
    CHECK_NOTHROW(nl.with_domain_cap(10.0).f(3.5));
    CHECK(eval_f(nl, 0.5) == nl.f(0.5));
    CHECK(eval_F(nl, 0.5) == nl.F(0.5));
}

TEST_CASE("classification of the standard families", "[nonlinearity]") {
    CHECK(classify_nonlinearity(Nonlinearity::logistic()).kind == NonlinearityClass::Monostable);
    const auto b = classify_nonlinearity(Nonlinearity::cubic_bistable(0.25));
    REQUIRE(b.kind == NonlinearityClass::Bistable);
    CHECK(b.theta == Approx(0.25).margin(1e-12));
    // theta >= 1/2 gives F(1) <= 0, so not bistable in the required sense.
    CHECK(classify_nonlinearity(Nonlinearity::cubic_bistable(0.6)).kind == NonlinearityClass::Other);
    CHECK(classify_nonlinearity(Nonlinearity::zero()).kind == NonlinearityClass::Other);
    CHECK(classify_nonlinearity(table_of(logi, logi_p, 3.0, 30)).kind == NonlinearityClass::Monostable);
}

TEST_CASE("lipschitz_bound dominates sampled difference quotients", "[nonlinearity][property]") {
    const std::vector<Nonlinearity> fam = {Nonlinearity::logistic(), Nonlinearity::logistic(3.0),
                                           Nonlinearity::cubic_bistable(0.1), Nonlinearity::cubic_bistable(0.45),
                                           table_of(logi, logi_p, 4.0, 13)};
    for (const auto& nl : fam)
        for (double cap : {0.3, 1.0, 2.5}) {
            const double K = lipschitz_bound(nl, cap);
            double worst = 0.0;
            for (int i = 0; i < 2000; ++i) {
                const double a = cap * i / 2000.0, b = cap * (i + 1) / 2000.0;
                worst = std::max(worst, std::abs(nl.f(b) - nl.f(a)) / (b - a));
            }
            CHECK(worst <= K * (1 + 1e-9));
            CHECK(K <= worst * 1.01 + 1e-12);
        }
    CHECK(lipschitz_bound(Nonlinearity::cubic_bistable(0.25), 1.0) == Approx(0.75));
    CHECK_THROWS_AS(lipschitz_bound(Nonlinearity::logistic(), 0.0), DomainError);
}

TEST_CASE("spreading plateau is the first + to - zero of f", "[nonlinearity]") {
    CHECK(*spreading_plateau(Nonlinearity::logistic()) == Approx(1.0).margin(1e-12));
    CHECK(*spreading_plateau(Nonlinearity::cubic_bistable(0.3)) == Approx(1.0).margin(1e-12));
    CHECK_FALSE(spreading_plateau(Nonlinearity::zero()).has_value());
}

TEST_CASE("describe names the family", "[nonlinearity]") {
    CHECK(Nonlinearity::logistic().describe().find("logistic") != std::string::npos);
    CHECK(Nonlinearity::cubic_bistable(0.2).describe().find("cubic") != std::string::npos);
}
