#include "qdc/cavityqed.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

using namespace qdc;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kHbar = 1.054571817e-34;
constexpr double kEps0 = 8.8541878128e-12;
constexpr double kC = 2.99792458e8;
constexpr double kE = 1.602176634e-19;
constexpr double kDebye = 3.33564095198e-30;

}  // namespace

TEST_CASE("ideal Purcell factor") {
    CHECK(ideal_purcell(540.0, 0.63) == doctest::Approx(3.0 * 540.0 / (4.0 * kPi * kPi * 0.63)));
    CHECK(ideal_purcell(540.0, 0.63) == doctest::Approx(65.135).epsilon(1e-4));
    CHECK(ideal_purcell(1080.0, 0.63) == doctest::Approx(2.0 * ideal_purcell(540.0, 0.63)));
    CHECK_THROWS_AS(ideal_purcell(0.0, 0.63), std::invalid_argument);
    CHECK_THROWS_AS(ideal_purcell(540.0, -1.0), std::invalid_argument);
}

TEST_CASE("Purcell factor with detuning and overlap") {
    const CavityDesign d;
    const EmitterConstants e = EmitterConstants::from_lifetime(971.0);
    const double lw = 1.354e6 / 540.0;
    CHECK(d.two_kappa_ueV() == doctest::Approx(lw));
    const double f0 = ideal_purcell(540.0, 0.63) * 0.81 * 0.81;
    CHECK(purcell_factor(d, e) == doctest::Approx(f0));
    // Half maximum at half the cavity linewidth.
    CHECK(purcell_factor(d, e, lw / 2.0) == doctest::Approx(f0 / 2.0));
    CHECK(purcell_factor(d, e, -lw / 2.0) == doctest::Approx(f0 / 2.0));
    CHECK(t1_of_detuning(d, e, 0.0) == doctest::Approx(971.0 / f0));
    CHECK(t1_of_detuning(d, e, 0.0) == doctest::Approx(22.7).epsilon(0.03));
    CavityDesign inconsistent = d;
    inconsistent.linewidth_2kappa = 1.2 * lw;
    CHECK_THROWS_AS(purcell_factor(inconsistent, e), std::invalid_argument);
}

TEST_CASE("dipole moment and coupling strength") {
    const double gamma = 1.0 / 971.0;  // 1/ps
    const double w = 1.354 * kE / kHbar;
    const double mu_si = std::sqrt(3.0 * kPi * kHbar * kEps0 * gamma * 1e12 * kC * kC * kC / (3.4 * w * w * w));
    const double mu = dipole_moment(gamma, 1.354, 3.4);
    CHECK(mu == doctest::Approx(mu_si / kDebye).epsilon(1e-12));
    CHECK(mu == doctest::Approx(27.2).epsilon(0.01));

    const double lambda = 2.0 * kPi * kC / w;
    const double V = 0.63 * std::pow(lambda / 3.4, 3);
    const double g_si = std::sqrt(w * mu_si * mu_si / (2.0 * kHbar * kEps0 * 3.4 * 3.4 * V));
    const double g = coupling_strength(1.354, mu, 1.0, 3.4, 0.63);
    CHECK(g == doctest::Approx(g_si * kHbar / kE * 1e6).epsilon(1e-12));
    CHECK(g == doctest::Approx(166.0).epsilon(0.01));
    CHECK(coupling_strength(1.354, mu, 0.81, 3.4, 0.63) == doctest::Approx(0.81 * g));
    CHECK(coupling_strength(1.354, mu, 1.0, 3.4, 4.0 * 0.63) == doctest::Approx(g / 2.0));
}

TEST_CASE("strong coupling criterion") {
    const auto weak = strong_coupling_check(135.0, 2510.0, 0.68);
    CHECK(weak.regime == CouplingRegime::weak);
    CHECK_FALSE(weak.strong());
    CHECK(weak.threshold_Q == doctest::Approx(1.354e6 / (4.0 * 135.0 + 0.68)));
    CHECK(strong_coupling_check(135.0, 400.0, 0.68).strong());
    // 16 g^2 = (2 kappa - gamma1')^2 exactly.
    CHECK(strong_coupling_check(100.0, 401.0, 1.0).regime == CouplingRegime::boundary);
    CHECK_THROWS_AS(strong_coupling_check(135.0, 0.0, 0.68), std::invalid_argument);
}

TEST_CASE("RRS fraction") {
    CHECK(rrs_fraction(24.6, 49.2, 0.0) == doctest::Approx(1.0));
    CHECK(rrs_fraction(24.6, 30.0, 0.0) == doctest::Approx(30.0 / 49.2));
    // Half of the zero-power value at Omega^2 T1 T2 = 1.
    const double om = 1.0 / std::sqrt(24.6 * 49.2);
    CHECK(rrs_fraction(24.6, 49.2, om) == doctest::Approx(0.5));
    double prev = 2.0;
    for (double o = 0.0; o < 0.2; o += 0.01) {
        const double f = rrs_fraction(24.6, 40.0, o);
        CHECK(f < prev);
        prev = f;
    }
    CHECK_THROWS_AS(rrs_fraction(24.6, 60.0, 0.01), std::domain_error);
    CHECK_THROWS_AS(rrs_fraction(24.6, 40.0, -0.01), std::invalid_argument);
}

TEST_CASE("damped Rabi frequency") {
    CHECK_FALSE(damped_rabi(0.01, 0.1, 0.02).has_value());
    const auto r = damped_rabi(0.5, 0.1, 0.02);
    REQUIRE(r.has_value());
    CHECK(*r == doctest::Approx(std::sqrt(0.25 - 0.04 * 0.04)));
    CHECK(*damped_rabi(0.3, 0.05, 0.05) == doctest::Approx(0.3));
    CHECK(*damped_rabi(0.04, 0.1, 0.02) == doctest::Approx(0.0));
}

TEST_CASE("DPRF intensity and two-photon probability") {
    CHECK(dprf_intensity(0.0, 22.7) == 0.0);
    CHECK(dprf_intensity(std::numeric_limits<double>::infinity(), 22.7) == 2.0);
    CHECK(dprf_intensity(22.7, 22.7) == doctest::Approx(2.0 * (1.0 - std::exp(-1.0))));
    CHECK(p2_probability(0.0, 22.7) == 0.0);
    CHECK(p2_probability(5.0 * 22.7, 22.7) == doctest::Approx(1.0 - std::exp(-5.0)));
    CHECK(dprf_intensity(40.0, 22.7) == doctest::Approx(2.0 * p2_probability(40.0, 22.7)));
    CHECK_THROWS_AS(dprf_intensity(-1.0, 22.7), std::invalid_argument);
    CHECK_THROWS_AS(p2_probability(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("coupling efficiencies") {
    const auto e = coupling_efficiencies(540.0, 1109.0, 4.0, 43.0);
    CHECK(e.cavity_waveguides_total == doctest::Approx(1.0 - 540.0 / 1109.0));
    CHECK(e.main_waveguide == doctest::Approx(0.8 * (1.0 - 540.0 / 1109.0)));
    CHECK(e.secondary_waveguide == doctest::Approx(0.2 * (1.0 - 540.0 / 1109.0)));
    CHECK(e.beta == doctest::Approx(43.0 / 44.0));
    CHECK(e.qd_waveguide == doctest::Approx(e.beta * e.main_waveguide));
    CHECK(coupling_efficiencies(540.0, 1109.0, 4.0, std::numeric_limits<double>::infinity()).beta == 1.0);
    CHECK_THROWS_AS(coupling_efficiencies(540.0, 500.0, 4.0, 43.0), std::invalid_argument);
}

TEST_CASE("count-rate budget") {
    BrightnessBudget b;
    CHECK(count_rate_budget(b) == doctest::Approx(76.2e6 * 0.40 * std::pow(10.0, -0.17) * 0.20));
    b.waveguide_length = 0.0;
    CHECK(count_rate_budget(b) == doctest::Approx(76.2e6 * 0.40 * 0.20));
    b.detector_efficiency = 1.5;
    CHECK_THROWS_AS(count_rate_budget(b), std::invalid_argument);
}
