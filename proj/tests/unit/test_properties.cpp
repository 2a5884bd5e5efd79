#include "qdc/cli/config.hpp"
#include "qdc/cli/scenarios.hpp"
#include "qdc/dynamics.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace qdc;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::map<std::string, std::string> run_to(const std::string& text, const std::filesystem::path& dir) {
    // Sections may not repeat, so the output directory goes right after the header.
    std::string t = text;
    t.insert(t.find('\n') + 1, "output_dir = " + dir.string() + "\n");
    const auto r = cli::validate_config_text(t, cli::scenario_names());
    REQUIRE(r.ok());
    const cli::ScenarioReport rep = cli::run_scenario(*r.config);
    std::map<std::string, std::string> csv;
    for (const auto& f : rep.files) {
        const std::filesystem::path p(f);
        if (p.extension() == ".csv") csv[p.filename().string()] = slurp(p);
    }
    return csv;
}

}  // namespace

TEST_CASE("trace, positivity and normalization over random parameter draws") {
    std::mt19937_64 rng(20190501);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto draw = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
    for (int k = 0; k < 100; ++k) {
        SystemParams p = SystemParams::from_energies_ueV(draw(300.0, 4000.0), draw(0.0, 300.0), draw(0.2, 5.0),
                                                         draw(-400.0, 400.0), draw(-400.0, 400.0));
        const int levels = u(rng) < 0.3 ? 3 : 2;
        p.space = make_space(levels, 1 + k % 3);
        if (levels == 3) p.relax = Relaxation{draw(5.0, 200.0)};
        p.validate();
        const DriveField d =
            DriveField::pulse_train({make_pulse(draw(0.0, 3.0 * units::pi), draw(1.0, 20.0))}, DriveTarget::emitter);
        const auto times = linspace(0.0, d.pulses_end() + 100.0, 41);
        // Positivity holds to the integration tolerance, so tighten it below the check.
        EvolveOptions o;
        o.ode = {1e-10, 1e-12};
        const EvolutionResult r = evolve(ground_density(p.space), p, d, times, o);
        INFO("draw " << k);
        CHECK(r.max_trace_error < 1e-8);
        CHECK(r.min_eigenvalue > -1e-8);
        for (Eigen::Index i = 0; i < r.populations.rows(); ++i) {
            CHECK(r.populations.row(i).sum() == doctest::Approx(1.0).epsilon(1e-8));
        }
        CHECK(r.cavity_photons.minCoeff() > -1e-8);
    }
}

TEST_CASE("fixed seed gives byte-identical CSV output") {
    const auto base = std::filesystem::temp_directory_path() / "qdc_determinism";
    std::filesystem::remove_all(base);
    const std::string mc = "[scenario]\nname = dprf_mc\nseed = 11\n[trajectories]\nn = 300\njobs = 1\n";
    const auto a = run_to(mc, base / "a");
    const auto b = run_to(mc, base / "b");
    // Worker count does not change results.
    const auto c = run_to("[scenario]\nname = dprf_mc\nseed = 11\n[trajectories]\nn = 300\njobs = 3\n", base / "c");
    REQUIRE_FALSE(a.empty());
    CHECK(a == b);
    CHECK(a == c);
    const auto d = run_to("[scenario]\nname = dprf_mc\nseed = 12\n[trajectories]\nn = 300\njobs = 1\n", base / "d");
    CHECK(a != d);

    const std::string vis = "[scenario]\nname = visibility\n";
    CHECK(run_to(vis, base / "e") == run_to(vis, base / "f"));
    std::filesystem::remove_all(base);
}
