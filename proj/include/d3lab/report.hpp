#pragma once

// Tabular report emission. Every float is printed with 12 significant digits
// so that fixtures compare as text.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace d3lab::report {

using Cell = std::variant<std::int64_t, double, std::string>;

std::string format_number(double v);
std::string format_cell(const Cell& c);
// Rounds to 12 significant digits so JSON and CSV carry the same value.
double round12(double v);

class Table {
public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add_row(std::vector<Cell> row);
    const std::vector<std::string>& columns() const noexcept { return columns_; }
    const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }

    void write_csv(std::ostream& os) const;
    // {"metadata": ..., "columns": [...], "rows": [{col: value}, ...]}
    nlohmann::ordered_json to_json(const nlohmann::ordered_json& metadata) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

}  // namespace d3lab::report
