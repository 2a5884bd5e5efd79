// qdcavity - run, list and validate quantum-dot cavity scenarios

#include "qdc/cli/config.hpp"
#include "qdc/cli/output.hpp"
#include "qdc/cli/scenarios.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

namespace {

enum Exit { kOk = 0, kValidation = 2, kNumerical = 3, kTargetMiss = 4 };

using namespace qdc::cli;

int print_errors(const std::string& source, const ValidationResult& r) {
    for (const auto& e : r.errors) std::cerr << source << ": " << e.to_string() << "\n";
    return kValidation;
}

void set_override(ScenarioConfig& cfg, const std::string& key, Quantity q, double number, const std::string& text = {}) {
    FieldValue v;
    v.quantity = q;
    v.number = number;
    v.text = text;
    cfg.fields[key] = v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum-dot cavity single-photon source simulations"};
    app.set_version_flag("--version", std::string("qdcavity ") + kVersion);
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a scenario and write its data files");
    std::string config_path, scenario;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;
    std::string out_dir, format;
    bool quiet = false;
    run->add_option("--config", config_path, "scenario configuration file")->check(CLI::ExistingFile);
    run->add_option("--scenario", scenario, "run a registered scenario with default settings");
    run->add_option("--seed", seed, "master seed");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
    run->add_option("--jobs", jobs, "parallel trajectory workers")->check(CLI::Range(1u, 1024u));
    run->add_flag("--quiet", quiet, "only set the exit status");

    auto* list = app.add_subcommand("list", "list registered scenarios");

    auto* validate = app.add_subcommand("validate", "check a configuration file");
    std::string validate_path;
    bool print_canonical = false;
    validate->add_option("--config", validate_path, "configuration file")->required();
    validate->add_flag("--canonical", print_canonical, "print the canonical form of a valid file");

    CLI11_PARSE(app, argc, argv);

    const auto names = scenario_names();

    if (list->parsed()) {
        for (const auto& s : scenario_registry()) {
            std::cout << s.name << "\t" << s.description << " (budget " << s.runtime_budget_s << " s)\n";
        }
        return kOk;
    }

    if (validate->parsed()) {
        const ValidationResult r = validate_config(validate_path, names);
        if (!r.ok()) return print_errors(validate_path, r);
        if (print_canonical) std::cout << serialize(*r.config);
        else std::cout << validate_path << ": ok (scenario " << r.config->scenario() << ")\n";
        return kOk;
    }

    ScenarioConfig cfg;
    if (!config_path.empty() == !scenario.empty()) {
        std::cerr << "run: give exactly one of --config or --scenario\n";
        return kValidation;
    }
    if (!config_path.empty()) {
        const ValidationResult r = validate_config(config_path, names);
        if (!r.ok()) return print_errors(config_path, r);
        cfg = *r.config;
    } else {
        if (!find_scenario(scenario)) {
            std::cerr << "run: unknown scenario '" << scenario << "' (see 'qdcavity list')\n";
            return kValidation;
        }
        cfg = default_config(scenario);
    }
    if (seed) set_override(cfg, "scenario.seed", Quantity::integer, static_cast<double>(*seed));
    if (jobs) set_override(cfg, "trajectories.jobs", Quantity::integer, *jobs);
    if (!out_dir.empty()) set_override(cfg, "scenario.output_dir", Quantity::text, 0.0, out_dir);
    if (!format.empty()) set_override(cfg, "scenario.format", Quantity::text, 0.0, format);

    try {
        const ScenarioReport rep = run_scenario(cfg);
        if (!quiet) std::cout << rep.to_text();
        return rep.targets_met() ? kOk : kTargetMiss;
    } catch (const std::invalid_argument& e) {
        std::cerr << "run " << cfg.scenario() << ": invalid input: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "run " << cfg.scenario() << ": numerical failure: " << e.what() << "\n";
        return kNumerical;
    }
}
