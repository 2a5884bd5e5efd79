// output.hpp - tabular scenario output as CSV or JSON

#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace qdc::cli {

inline constexpr const char* kVersion = "0.1.0";

struct Column {
    std::string name;
    std::string unit;  // empty for dimensionless
    std::vector<double> values;
};

struct Table {
    std::string name;
    std::vector<Column> columns;

    std::size_t rows() const;
    // Throws unless every column has the same length.
    void validate() const;
};

struct OutputMeta {
    std::string scenario;
    std::string version = kVersion;
    std::uint64_t seed = 0;
};

// '#'-prefixed metadata block, then a "name [unit]" header row and the data.
void write_csv(std::ostream& os, const Table& table, const OutputMeta& meta);
void write_json(std::ostream& os, const Table& table, const OutputMeta& meta);

// Writes <dir>/<scenario>_<table>.<format> and returns the path.
std::filesystem::path write_table(const Table& table, const OutputMeta& meta, const std::filesystem::path& dir,
                                  const std::string& format);

}  // namespace qdc::cli
