#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "resfront/io.hpp"

using namespace resfront;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("resfront_io_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("TOML subset parses tables, arrays and inline tables", "[io][toml]") {
    const auto j = io::parse_toml(R"(
# run settings
alpha = 0.3
h0 = 1_000
"quoted key" = "a \"b\"\n"
nonlinearity = { kind = "cubic_bistable", theta = 0.4 }

[horizons]
t_horizon = 50.0
checkpoint_times = [
  0.5,  # early
  1.5,
]
stall_stop = true

[output]
dir = 'lit\eral'
a.b.c = -2e-3
)");
    CHECK(j["alpha"].get<double>() == 0.3);
    CHECK(j["h0"].get<long>() == 1000);
    CHECK(j["quoted key"].get<std::string>() == "a \"b\"\n");
    CHECK(j["nonlinearity"]["kind"] == "cubic_bistable");
    CHECK(j["nonlinearity"]["theta"].get<double>() == 0.4);
    CHECK(j["horizons"]["checkpoint_times"].size() == 2);
    CHECK(j["horizons"]["checkpoint_times"][1].get<double>() == 1.5);
    CHECK(j["horizons"]["stall_stop"].get<bool>());
    CHECK(j["output"]["dir"] == "lit\\eral");
    CHECK(j["output"]["a"]["b"]["c"].get<double>() == -2e-3);
}

TEST_CASE("TOML errors carry the line number", "[io][toml]") {
    auto fails = [](const std::string& text, const std::string& needle) {
        try {
            io::parse_toml(text);
        } catch (const ValidationError& e) {
            return std::string(e.what()).find(needle) != std::string::npos;
        }
        return false;
    };
    CHECK(fails("a = 1\na = 2\n", "line 2"));
    CHECK(fails("a = 1\n\nb = \n", "line 3"));
    CHECK(fails("[[points]]\nx = 1\n", "line 1"));
    CHECK(fails("x = [1, 2\n", "line"));
    CHECK(fails("s = \"open\n", "line 1"));
}

TEST_CASE("TOML and JSON configs resolve to the same settings", "[io][config]") {
    const auto d = scratch_dir("formats");
    write(d / "a.toml", "alpha = 0.3\nsigma = 2.0\n[nonlinearity]\nkind = \"logistic\"\nr = 1.0\n[horizons]\nt_horizon = 40\n");
    write(d / "a.json",
          R"({"alpha": 0.3, "sigma": 2.0, "nonlinearity": {"kind": "logistic", "r": 1.0}, "horizons": {"t_horizon": 40}})");
    write(d / "a.cfg", "alpha = 0.3\nsigma = 2.0\n[nonlinearity]\nkind = \"logistic\"\nr = 1.0\n[horizons]\nt_horizon = 40\n");
    const auto a = io::resolved(io::load_settings(d / "a.toml"));
    CHECK(a == io::resolved(io::load_settings(d / "a.json")));
    CHECK(a == io::resolved(io::load_settings(d / "a.cfg")));
    CHECK(a["horizons"]["t_horizon"].get<double>() == 40.0);
}

TEST_CASE("unknown keys and bad values are rejected", "[io][config]") {
    using io::json;
    CHECK_THROWS_AS(io::parse_settings(json{{"alpah", 0.3}}), ValidationError);
    CHECK_THROWS_AS(io::parse_settings(json{{"horizons", {{"t_horizonn", 1.0}}}}), ValidationError);
    CHECK_THROWS_AS(io::parse_settings(json{{"nonlinearity", {{"kind", "quartic"}}}}), ValidationError);
    CHECK_THROWS_AS(io::parse_settings(json{{"alpha", -0.1}}), ValidationError);
    CHECK_THROWS_AS(io::parse_settings(json{{"sigma", 0.0}}), ValidationError);
    CHECK_THROWS_AS(io::parse_settings(json{{"n", 2}}), ValidationError);
    CHECK_THROWS_AS(io::parse_settings(json{{"alpha", "0.3"}}), ValidationError);
    CHECK_THROWS_AS(io::load_settings("/nonexistent/config.toml"), ValidationError);
}

TEST_CASE("resolved config parses back to itself", "[io][config][property]") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(0.05, 3.0);
    for (int k = 0; k < 20; ++k) {
        io::json cfg = {{"alpha", U(rng)}, {"h0", U(rng)}, {"sigma", U(rng)}, {"n", 50 + 10 * k},
                        {"nonlinearity", {{"kind", k % 2 ? "logistic" : "cubic_bistable"}}},
                        {"classifier", {{"width_tol", U(rng) / 10}}},
                        {"horizons", {{"checkpoint_times", {0.25, U(rng)}}}}};
        const auto once = io::resolved(io::parse_settings(cfg));
        CHECK(io::resolved(io::parse_settings(once)) == once);
    }
}

TEST_CASE("tabulated nonlinearity and phi from CSV", "[io][csv]") {
    const auto d = scratch_dir("csv");
    {
        std::ofstream out(d / "f.csv");
        out << "u,f,fprime\n";
        for (int i = 0; i <= 100; ++i) {
            const double u = 1.5 * i / 100;
            out << u << "," << u * (1 - u) << "," << 1 - 2 * u << "\n";
        }
    }
    const auto nl = io::make_nonlinearity({{"kind", "tabulated"}, {"csv", "f.csv"}}, d);
    CHECK(nl.f(0.3) == Approx(0.21).margin(1e-12));
    CHECK(nl.F(1.0) == Approx(1.0 / 6.0).margin(1e-12));
    write(d / "bad.csv", "0,0\n1,1\n");
    CHECK_THROWS_AS(io::make_nonlinearity({{"kind", "tabulated"}, {"csv", "bad.csv"}}, d), ValidationError);

    {
        std::ofstream one(d / "phi1.csv"), two(d / "phi2.csv");
        one << "# bump\nphi\n";
        for (int i = 0; i <= 40; ++i) {
            const double x = -1.0 + 2.0 * i / 40;
            const double p = std::cos(3.14159265358979323846 * x / 2);
            one << io::fmt(std::max(p, 0.0)) << "\n";
            two << io::fmt(x) << "," << io::fmt(std::max(p, 0.0)) << "\n";
        }
    }
    io::RunSettings s;
    s.base_dir = d;
    s.phi = "phi1.csv";
    const auto a = validate_initial(io::make_initial(s));
    s.phi = "phi2.csv";
    const auto b = validate_initial(io::make_initial(s));
    CHECK(a.sup == Approx(1.0));
    CHECK(a.l1 == Approx(b.l1));
    CHECK(a.l1 == Approx(4.0 / 3.14159265358979323846).epsilon(1e-3));
    s.h0 = 2.0;
    CHECK_THROWS_AS(io::make_initial(s), ValidationError);
}

TEST_CASE("trajectory JSON round-trips and re-classifies identically", "[io][trajectory]") {
    const auto nl = Nonlinearity::logistic();
    RunConfig rc;
    rc.t_horizon = 30.0;
    const auto tr = simulate(validate_initial(InitialData::cosine(1.0, 0.3)), nl, 0.4, rc);
    const auto j = io::trajectory_json(tr, {{"alpha", 0.4}});
    const auto back = io::trajectory_from_json(io::json::parse(j.dump()));
    CHECK(back.termination == tr.termination);
    CHECK(back.samples.size() == tr.samples.size());
    CHECK(back.final_state.u == tr.final_state.u);
    const auto sc = classify_stationary(nl, 0.4);
    const auto o1 = detect_outcome(tr, nl, sc), o2 = detect_outcome(back, nl, sc);
    CHECK(o1.verdict == Verdict::Vanishing);
    CHECK(io::to_json(o1) == io::to_json(o2));
    CHECK_THROWS_AS(io::trajectory_from_json({{"termination", "melted"}}), ValidationError);
    CHECK_THROWS_AS(io::trajectory_from_json({{"termination", "horizon_reached"}}), ValidationError);
}

TEST_CASE("CSV output starts with the config line", "[io][csv]") {
    const auto d = scratch_dir("out");
    io::write_csv(d / "x.csv", {{"alpha", 0.4}}, {"a", "b"}, {{1.0, 0.1}, {2.0, 1e-300}});
    std::ifstream in(d / "x.csv");
    std::string l1, l2, l3;
    std::getline(in, l1);
    std::getline(in, l2);
    std::getline(in, l3);
    CHECK(l1 == R"(# config: {"alpha":0.4})");
    CHECK(l2 == "a,b");
    CHECK(l3 == "1,0.10000000000000001");
    const auto rows = io::read_csv_rows(d / "x.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][1] == 1e-300);
}
