#include "qdc/cli/output.hpp"

#include "qdc/cli/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace qdc::cli {

namespace {

std::string cell(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return format_number(v);
}

}  // namespace

std::size_t Table::rows() const { return columns.empty() ? 0 : columns.front().values.size(); }

void Table::validate() const {
    if (name.empty()) throw std::invalid_argument("Table: empty name");
    for (const auto& c : columns) {
        if (c.values.size() != rows()) {
            throw std::invalid_argument("Table '" + name + "': column '" + c.name + "' has " +
                                        std::to_string(c.values.size()) + " rows, expected " +
                                        std::to_string(rows()));
        }
    }
}

void write_csv(std::ostream& os, const Table& table, const OutputMeta& meta) {
    table.validate();
    os << "# scenario: " << meta.scenario << "\n";
    os << "# table: " << table.name << "\n";
    os << "# version: " << meta.version << "\n";
    os << "# seed: " << meta.seed << "\n";
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        const auto& c = table.columns[j];
        os << (j ? "," : "") << c.name;
        if (!c.unit.empty()) os << " [" << c.unit << "]";
    }
    os << "\n";
    for (std::size_t i = 0; i < table.rows(); ++i) {
        for (std::size_t j = 0; j < table.columns.size(); ++j) os << (j ? "," : "") << cell(table.columns[j].values[i]);
        os << "\n";
    }
}

void write_json(std::ostream& os, const Table& table, const OutputMeta& meta) {
    table.validate();
    nlohmann::ordered_json j;
    j["scenario"] = meta.scenario;
    j["table"] = table.name;
    j["version"] = meta.version;
    j["seed"] = meta.seed;
    auto cols = nlohmann::ordered_json::array();
    for (const auto& c : table.columns) {
        nlohmann::ordered_json col;
        col["name"] = c.name;
        col["unit"] = c.unit;
        auto vals = nlohmann::ordered_json::array();
        for (double v : c.values) {
            if (std::isfinite(v)) vals.push_back(v);
            else vals.push_back(nullptr);
        }
        col["values"] = std::move(vals);
        cols.push_back(std::move(col));
    }
    j["columns"] = std::move(cols);
    os << j.dump(2) << "\n";
}

std::filesystem::path write_table(const Table& table, const OutputMeta& meta, const std::filesystem::path& dir,
                                  const std::string& format) {
    if (format != "csv" && format != "json") throw std::invalid_argument("write_table: unknown format '" + format + "'");
    std::filesystem::create_directories(dir);
    const auto path = dir / (meta.scenario + "_" + table.name + "." + format);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    if (format == "csv") write_csv(out, table, meta);
    else write_json(out, table, meta);
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
    return path;
}

}  // namespace qdc::cli
