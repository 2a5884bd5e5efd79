// config.hpp - sectioned key = value scenario configuration with unit checking
//
//   [params]
//   g = 135 ueV
//   two_kappa = 2.51 meV
//
//   [drive]
//   pulse_fwhm = 13 ps

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qdc::cli {

enum class Quantity { energy, time, rate, angle, power, frequency, length, loss, dimensionless, integer, text, list };

struct FieldSpec {
    std::string key;  // "section.name"
    Quantity quantity;
    std::string description;
    bool required = false;
    std::optional<double> min;  // inclusive unless min_exclusive
    bool min_exclusive = false;
    std::optional<double> max;
    std::vector<std::string> choices;  // text fields
    Quantity element = Quantity::dimensionless;  // list elements
};

const std::vector<FieldSpec>& field_specs();
const FieldSpec* find_field(const std::string& key);
// Canonical unit of a quantity ("ueV", "ps", ...); empty when dimensionless.
std::string canonical_unit(Quantity q);

struct ConfigError {
    int line = 0;  // 0 when the error is not tied to a line
    int column = 0;
    std::string field;
    std::string message;
    std::string to_string() const;
};

struct FieldValue {
    Quantity quantity = Quantity::dimensionless;
    double number = 0.0;  // canonical units
    std::vector<double> list;
    Quantity element = Quantity::dimensionless;
    std::string text;
};

struct ScenarioConfig {
    std::map<std::string, FieldValue> fields;

    bool has(const std::string& key) const { return fields.count(key) != 0; }
    double number(const std::string& key, double fallback) const;
    long integer(const std::string& key, long fallback) const;
    std::string text(const std::string& key, const std::string& fallback) const;
    std::vector<double> list(const std::string& key, const std::vector<double>& fallback) const;

    std::string scenario() const { return text("scenario.name", ""); }
    std::uint64_t seed() const { return static_cast<std::uint64_t>(integer("scenario.seed", 20190501)); }
};

struct ValidationResult {
    std::optional<ScenarioConfig> config;
    std::vector<ConfigError> errors;
    bool ok() const noexcept { return errors.empty(); }
};

// Collects every error rather than stopping at the first.
ValidationResult validate_config_text(const std::string& text, const std::vector<std::string>& scenario_names);
ValidationResult validate_config(const std::filesystem::path& path, const std::vector<std::string>& scenario_names);

// Canonical text of a validated configuration: sections and keys sorted,
// values in canonical units.
std::string serialize(const ScenarioConfig& config);

// Lexical canonical form of a configuration text: comments and blank lines
// dropped, sections and keys sorted, numbers converted to canonical units.
std::string normalize(const std::string& text);

std::string format_number(double v);

}  // namespace qdc::cli
