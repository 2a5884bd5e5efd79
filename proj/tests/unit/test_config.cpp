#include "qdc/cli/config.hpp"
#include "qdc/cli/scenarios.hpp"

#include <doctest.h>

#include <algorithm>

using namespace qdc::cli;

namespace {

ValidationResult check(const std::string& text) { return validate_config_text(text, scenario_names()); }

bool mentions(const ValidationResult& r, const std::string& needle) {
    return std::any_of(r.errors.begin(), r.errors.end(),
                       [&](const ConfigError& e) { return e.to_string().find(needle) != std::string::npos; });
}

const char* kValid = R"(# detuning study
[scenario]
name = dprf
seed = 7

[params]
two_kappa = 2.51 meV   ; cavity FWHM
g = 135 ueV
t1f = 0.1 ns
emitter_levels = 3

[drive]
pulse_fwhm = 13000 fs
area = 1 pi

[scan]
tp_over_t1 = 0.1, 0.5, 57.3 %
delta_tau = 0.01, 0.1 ns
)";

}  // namespace

TEST_CASE("empty file lists the required fields") {
    const ValidationResult r = check("");
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].line == 0);
    CHECK(r.errors[0].message.find("missing required fields") != std::string::npos);
    CHECK(r.errors[0].message.find("scenario.name") != std::string::npos);
    CHECK_FALSE(r.config.has_value());
}

TEST_CASE("negative pulse duration is a single unit-violation error") {
    const ValidationResult r = check("[scenario]\nname = rabi\n[drive]\npulse_fwhm = -3 ps\n");
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].line == 4);
    CHECK(r.errors[0].field == "drive.pulse_fwhm");
}

TEST_CASE("units convert to canonical values") {
    const ValidationResult r = check(kValid);
    REQUIRE(r.ok());
    const ScenarioConfig& c = *r.config;
    CHECK(c.scenario() == "dprf");
    CHECK(c.seed() == 7);
    CHECK(c.number("params.two_kappa", 0.0) == doctest::Approx(2510.0));
    CHECK(c.number("params.t1f", 0.0) == doctest::Approx(100.0));
    CHECK(c.number("drive.pulse_fwhm", 0.0) == doctest::Approx(13.0));
    CHECK(c.number("drive.area", 0.0) == doctest::Approx(3.14159265358979));
    const auto tp = c.list("scan.tp_over_t1", {});
    REQUIRE(tp.size() == 3);
    CHECK(tp[2] == doctest::Approx(0.573));
    const auto dt = c.list("scan.delta_tau", {});
    REQUIRE(dt.size() == 2);
    CHECK(dt[1] == doctest::Approx(100.0));
    CHECK(c.number("params.g2_missing", 4.5) == 4.5);
}

TEST_CASE("all errors are collected with line and column") {
    const ValidationResult r = check(
        "[scenario]\n"
        "name = nosuch\n"
        "colour = blue\n"
        "[params]\n"
        "g = 135 ps\n"
        "g = 10 ueV\n"
        "[drive]\n"
        "target = laser\n"
        "this line is junk\n");
    CHECK(r.errors.size() >= 5);
    CHECK(mentions(r, "see 'qdcavity list'"));
    CHECK(mentions(r, "scenario.colour"));
    CHECK(mentions(r, "duplicate"));
    CHECK(std::is_sorted(r.errors.begin(), r.errors.end(),
                         [](const ConfigError& a, const ConfigError& b) { return a.line < b.line; }));
    const auto unit = std::find_if(r.errors.begin(), r.errors.end(), [](const ConfigError& e) { return e.line == 5; });
    REQUIRE(unit != r.errors.end());
    CHECK(unit->column > 1);
    CHECK(unit->field == "params.g");
}

TEST_CASE("cross-field checks") {
    CHECK(mentions(check("[scenario]\nname = relaxation\n[params]\nt1f = 100 ps\n"), "emitter_levels"));
    CHECK(mentions(check("[scenario]\nname = visibility\n[hom]\nR = 0.5\nT = 0.6\n"), "R + T"));
    CHECK(check("[scenario]\nname = visibility\n[hom]\nR = 0.52\nT = 0.48\n").ok());
}

TEST_CASE("valid files round-trip through serialize and normalize") {
    const ValidationResult r = check(kValid);
    REQUIRE(r.ok());
    CHECK(serialize(*r.config) == normalize(kValid));
    // The canonical form is a fixed point.
    const std::string canon = serialize(*r.config);
    const ValidationResult again = check(canon);
    REQUIRE(again.ok());
    CHECK(serialize(*again.config) == canon);
    CHECK(normalize(canon) == canon);

    for (const auto& name : scenario_names()) {
        const std::string text = serialize(default_config(name));
        const ValidationResult d = check(text);
        REQUIRE(d.ok());
        CHECK(serialize(*d.config) == normalize(text));
    }
}

TEST_CASE("numbers format as shortest round-trip decimals") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(2510.0) == "2510");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}
