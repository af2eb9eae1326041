#include <cmath>
#include <cstdio>
#include <string>

#include "doctest.h"
#include "shen/config.hpp"

using namespace shen;
using config::parse_config;

namespace {

constexpr double kPi = 3.14159265358979323846;

bool mentions(const config::ParseResult& r, const std::string& needle) {
    for (const auto& e : r.errors)
        if (e.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("defaults parse clean and round-trip byte for byte") {
    const auto r = parse_config("{}");
    REQUIRE(r.ok());
    const std::string emitted = r.config.canonical_json();
    const auto r2 = parse_config(emitted);
    REQUIRE(r2.ok());
    CHECK(r2.config.canonical_json() == emitted);
    CHECK(r2.config.hash() == r.config.hash());
    CHECK(r.config.observation_site() == 64);  // center of n = 128
    CHECK(r.config.steps() == 128);
}

TEST_CASE("every preset round-trips through its own emission") {
    const auto names = config::preset_names();
    CHECK(names.size() == 9);
    for (const auto& name : names) {
        CAPTURE(name);
        const auto c = config::preset(name);
        CHECK(c.paths == 10000);
        const std::string emitted = c.canonical_json();
        const auto r = parse_config(emitted);
        REQUIRE_MESSAGE(r.ok(), r.error_text());
        CHECK(r.config.canonical_json() == emitted);
        CHECK(r.config.hash() == c.hash());
        CHECK_NOTHROW(r.config.solver().validate());
    }
    CHECK_THROWS(config::preset("cubic-white"));
    CHECK_THROWS(config::preset("linear-cauchy"));
}

TEST_CASE("unknown keys are named in the error") {
    const auto r = parse_config(R"({"dz": 0.1})");
    CHECK(!r.ok());
    CHECK(mentions(r, "unknown key 'dz'"));
    const auto r2 = parse_config(R"({"grid": {"n": 64, "len": 8}})");
    CHECK(mentions(r2, "grid: unknown key 'len'"));
}

TEST_CASE("planar white noise is rejected with the divergence trace") {
    const auto r = parse_config(
        R"({"grid": {"dim": 2, "n": 64, "L": 16}, "dt": 1.5625e-2, "T": 0.5})");
    CHECK(!r.ok());
    CHECK(mentions(r, "Dalang integral diverges"));
    CHECK(mentions(r, "cutoff/value"));
    CHECK(mentions(r, "increment ratio"));

    // The same grid with a integrable Riesz kernel is accepted.
    const auto r2 = parse_config(
        R"({"grid": {"dim": 2, "n": 64, "L": 16}, "measure": {"family": "riesz", "eta": 1.0},
            "dt": 1.5625e-2, "T": 0.5})");
    REQUIRE_MESSAGE(r2.ok(), r2.error_text());
    CHECK(r2.config.measure.dim == 2);
    CHECK(r2.config.observation_site() == 32 * 64 + 32);
}

TEST_CASE("time step guard reports the violated bound") {
    const auto r = parse_config(R"({"dt": 0.05, "T": 0.5})");
    CHECK(!r.ok());
    CHECK(mentions(r, "stability guard"));
    CHECK(mentions(r, "0.00390625"));  // h^2/4 for n = 128, L = 16

    CHECK(!parse_config(R"({"dt": -0.1})").ok());
    CHECK(mentions(parse_config(R"({"dt": -0.1})"), "dt: must be positive"));
}

TEST_CASE("all violations are reported, not just the first") {
    const auto r = parse_config(
        R"({"grid": {"dim": 3, "n": 100, "L": -2}, "coefficients": "cubic",
            "paths": 0, "dt": -1, "T": 0.3333})");
    CHECK(!r.ok());
    CHECK(r.errors.size() >= 6);
    CHECK(mentions(r, "grid.dim"));
    CHECK(mentions(r, "power of two"));
    CHECK(mentions(r, "grid.L"));
    CHECK(mentions(r, "unknown preset 'cubic'"));
    CHECK(mentions(r, "paths"));
    CHECK(mentions(r, "dt"));
}

TEST_CASE("horizon must be an integer number of steps") {
    CHECK(mentions(parse_config(R"({"dt": 3e-3, "T": 0.5})"),
                   "integer multiple"));
    const auto ok = parse_config(R"({"dt": 2.5e-3, "T": 0.5})");
    REQUIRE(ok.ok());
    CHECK(ok.config.steps() == 200);
}

TEST_CASE("measure parameters are family-checked") {
    CHECK(mentions(parse_config(R"({"measure": {"family": "white", "eta": 0.5}})"),
                   "white takes no parameter"));
    CHECK(mentions(parse_config(R"({"measure": {"family": "riesz"}})"),
                   "measure.eta: required"));
    CHECK(mentions(parse_config(R"({"measure": {"family": "riesz", "eta": 1.5}})"),
                   "measure"));  // eta >= dim rejected by validation
    CHECK(mentions(parse_config(R"({"measure": {"family": "gauss"}})"),
                   "unknown family 'gauss'"));
    CHECK(mentions(parse_config(R"({"measure": {"family": "bessel"}})"),
                   "measure.order: required"));
    CHECK(mentions(parse_config(R"({"measure": {"family": "expcov"}})"),
                   "measure.scale: required"));
}

TEST_CASE("initial data builders") {
    config::ExperimentConfig c;

    c.u0_type = "constant";
    c.u0_value = 0.0;
    CHECK(c.build_u0().empty());
    c.u0_value = 0.7;
    auto f = c.build_u0();
    REQUIRE(f.size() == c.grid.sites());
    for (double v : f) CHECK(v == 0.7);

    c.u0_type = "sine";
    c.u0_value = 2.0;
    c.u0_mode = 3;
    f = c.build_u0();
    for (std::size_t j : {std::size_t{0}, std::size_t{5}, std::size_t{97}}) {
        const double x = c.grid.coord(j)[0];
        CHECK(f[j] == doctest::Approx(2.0 * std::sin(2.0 * kPi * 3.0 * x / c.grid.L))
                          .epsilon(1e-14));
    }

    c.u0_type = "delta";
    c.u0_value = 1.5;
    c.u0_site = 40;
    f = c.build_u0();
    CHECK(f[40] == doctest::Approx(1.5 / c.grid.cell()).epsilon(1e-14));
    CHECK(f[41] == 0.0);

    c.u0_type = "levels";
    CHECK_THROWS(c.build_u0());

    CHECK(mentions(parse_config(R"({"u0": {"type": "delta", "site": 4000}})"),
                   "u0.site: outside the grid"));
    CHECK(mentions(parse_config(R"({"u0": {"type": "file"}})"),
                   "u0.path: required"));
    CHECK(mentions(parse_config(R"({"x_obs": 4000})"), "x_obs: outside the grid"));
}

TEST_CASE("file loading surfaces IO and syntax problems") {
    const auto missing = config::load_config_file("/nonexistent/config.json");
    CHECK(!missing.ok());
    CHECK(mentions(missing, "cannot open"));

    CHECK(mentions(parse_config("{not json"), "json:"));
    CHECK(mentions(parse_config("[1,2]"), "top level must be an object"));
}

TEST_CASE("distinct configurations hash differently") {
    const auto a = parse_config("{}").config;
    auto b = parse_config(R"({"seed": 2})").config;
    CHECK(a.hash() != b.hash());
    auto c = parse_config(R"({"measure": {"family": "riesz", "eta": 0.5}})").config;
    CHECK(a.hash() != c.hash());
}
