#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace cvqit {

inline constexpr const char* kVersion = "cvqit 0.1.0";

// rectangular numeric table; a NaN cell is written as "infeasible"
struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    nlohmann::json meta = nlohmann::json::object();

    explicit ResultTable(std::vector<std::string> cols = {}) : columns(std::move(cols)) {}
    void add_row(std::vector<double> row);

    std::string to_csv() const;
    nlohmann::json to_json() const;
    static ResultTable from_csv(const std::string& text);
};

// 17 significant digits, '.' decimal separator
std::string format_number(double v);
// RFC-4180 quoting: fields with commas, quotes or line breaks are quoted, quotes doubled
std::string csv_field(const std::string& s);
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace cvqit
