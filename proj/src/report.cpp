#include "d3lab/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>

#include "d3lab/error.hpp"

namespace d3lab::report {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
    return buf;
}

double round12(double v) {
    if (!std::isfinite(v)) return v;
    return std::strtod(format_number(v).c_str(), nullptr);
}

std::string format_cell(const Cell& c) {
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
    return std::get<std::string>(c);
}

void Table::add_row(std::vector<Cell> row) {
    if (row.size() != columns_.size()) throw DomainError("report row width does not match header");
    rows_.push_back(std::move(row));
}

void Table::write_csv(std::ostream& os) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
    os << '\n';
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i]);
        os << '\n';
    }
}

nlohmann::ordered_json Table::to_json(const nlohmann::ordered_json& metadata) const {
    nlohmann::ordered_json out;
    out["metadata"] = metadata;
    out["columns"] = columns_;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : rows_) {
        nlohmann::ordered_json r = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            const Cell& c = row[i];
            if (const auto* iv = std::get_if<std::int64_t>(&c))
                r[columns_[i]] = *iv;
            else if (const auto* d = std::get_if<double>(&c))
                r[columns_[i]] = std::isfinite(*d) ? nlohmann::ordered_json(round12(*d)) : nlohmann::ordered_json(format_number(*d));
            else
                r[columns_[i]] = std::get<std::string>(c);
        }
        rows.push_back(std::move(r));
    }
    out["rows"] = std::move(rows);
    return out;
}

}  // namespace d3lab::report
