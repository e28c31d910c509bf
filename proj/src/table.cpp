#include "cvqit/table.hpp"

#include "cvqit/core.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace cvqit {

void ResultTable::add_row(std::vector<double> row) {
    if (row.size() != columns.size()) throw DimensionError("ResultTable: row width does not match header");
    rows.push_back(std::move(row));
}

std::string format_number(double v) {
    if (std::isnan(v)) return "infeasible";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string ResultTable::to_csv() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << csv_field(columns[i]);
    os << "\r\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_number(r[i]);
        os << "\r\n";
    }
    return os.str();
}

nlohmann::json ResultTable::to_json() const {
    nlohmann::json j;
    j["columns"] = columns;
    auto data = nlohmann::json::array();
    for (const auto& r : rows) {
        auto row = nlohmann::json::array();
        for (double v : r) row.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(format_number(v)));
        data.push_back(row);
    }
    j["rows"] = data;
    j["meta"] = meta;
    return j;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> out;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') field += '"', ++i;
                else quoted = false;
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = any = true;
        } else if (c == ',') {
            row.push_back(field), field.clear(), any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            row.push_back(field), field.clear();
            out.push_back(row), row.clear();
            any = false;
        } else {
            field += c, any = true;
        }
    }
    if (quoted) throw PreconditionError("parse_csv: unterminated quoted field");
    if (any || !field.empty()) row.push_back(field), out.push_back(row);
    return out;
}

static double parse_cell(const std::string& s) {
    if (s == "infeasible") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw PreconditionError("ResultTable: non-numeric cell '" + s + "'");
    return v;
}

ResultTable ResultTable::from_csv(const std::string& text) {
    auto rows = parse_csv(text);
    if (rows.empty()) throw PreconditionError("ResultTable: empty CSV");
    ResultTable t(rows.front());
    for (std::size_t i = 1; i < rows.size(); ++i) {
        std::vector<double> r;
        for (const auto& s : rows[i]) r.push_back(parse_cell(s));
        t.add_row(r);
    }
    return t;
}

}  // namespace cvqit
