// scenarios.hpp - named experiments, their headline numbers and reports

#pragma once

#include "qdc/cli/config.hpp"
#include "qdc/cli/output.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qdc::cli {

// Accepted interval for a headline value.
struct Target {
    double lo = 0.0;
    double hi = 0.0;
    std::string source;  // what the interval represents

    static Target around(double value, double tolerance, std::string source);
    static Target relative(double value, double rel_tolerance, std::string source);
    bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

struct Headline {
    std::string name;
    double value = 0.0;
    double error = 0.0;  // 0 when not applicable
    std::string unit;
    std::optional<Target> target;

    bool passed() const noexcept { return !target || target->contains(value); }
};

struct ScenarioOutput {
    std::vector<Headline> headlines;
    std::vector<Table> tables;

    // Value of a headline by name; throws std::out_of_range if absent.
    const Headline& headline(const std::string& name) const;
};

struct ScenarioInfo {
    std::string name;
    std::string description;
    double runtime_budget_s = 0.0;  // single core, default configuration
    std::function<ScenarioOutput(const ScenarioConfig&)> run;
};

const std::vector<ScenarioInfo>& scenario_registry();
const ScenarioInfo* find_scenario(const std::string& name);
std::vector<std::string> scenario_names();

struct ScenarioReport {
    std::string scenario;
    std::string input_echo;  // canonical configuration text
    std::vector<Headline> headlines;
    std::vector<std::filesystem::path> files;
    double duration_s = 0.0;
    std::string version = kVersion;
    std::uint64_t seed = 0;

    bool targets_met() const noexcept;
    std::string to_text() const;
    std::string to_json() const;
};

// Runs the scenario named in `config`, writes its tables under
// scenario.output_dir (default "out") and a <scenario>_report.json next to them.
ScenarioReport run_scenario(const ScenarioConfig& config);

// Runs without writing files.
ScenarioOutput compute_scenario(const ScenarioConfig& config);

// Minimal configuration for a scenario with every other field at its default.
ScenarioConfig default_config(const std::string& scenario);

}  // namespace qdc::cli
