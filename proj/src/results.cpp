#include "twostep/results.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "twostep/errors.hpp"

namespace twostep {

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

struct CsvCell {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(double v) const { return std::isnan(v) ? std::string() : format_double(v); }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(const std::string& v) const { return csv_field(v); }
};

struct JsonCell {
    nlohmann::json operator()(std::monostate) const { return nullptr; }
    nlohmann::json operator()(double v) const {
        if (!std::isfinite(v)) {
            return nullptr;
        }
        // Same 12 significant digits as the CSV writer.
        return std::strtod(format_double(v).c_str(), nullptr);
    }
    nlohmann::json operator()(std::int64_t v) const { return v; }
    nlohmann::json operator()(const std::string& v) const { return v; }
};

}  // namespace

void ResultTable::add(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
        throw DimensionMismatch("result row has " + std::to_string(row.size()) +
                                " cells, header has " + std::to_string(columns.size()));
    }
    rows.push_back(std::move(row));
}

OutputFormat parse_format(std::string_view name) {
    if (name == "csv") {
        return OutputFormat::csv;
    }
    if (name == "json") {
        return OutputFormat::json;
    }
    throw ValidationError("format", "expected csv or json, got '" + std::string(name) + "'");
}

OutputFormat format_for_path(std::string_view path) {
    constexpr std::string_view ext = ".json";
    if (path.size() >= ext.size() && path.substr(path.size() - ext.size()) == ext) {
        return OutputFormat::json;
    }
    return OutputFormat::csv;
}

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

void write_csv(std::ostream& out, const ResultTable& table) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out << (c ? "," : "") << csv_field(table.columns[c]);
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << (c ? "," : "") << std::visit(CsvCell{}, row[c]);
        }
        out << '\n';
    }
}

void write_json(std::ostream& out, const ResultTable& table) {
    auto array = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t c = 0; c < row.size(); ++c) {
            obj[table.columns[c]] = std::visit(JsonCell{}, row[c]);
        }
        array.push_back(std::move(obj));
    }
    out << array.dump(2) << '\n';
}

void write_results(std::ostream& out, const ResultTable& table, OutputFormat format) {
    if (format == OutputFormat::json) {
        write_json(out, table);
    } else {
        write_csv(out, table);
    }
}

void save_results(const ResultTable& table, const std::string& path, OutputFormat format) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
    write_results(out, table, format);
    if (!out) {
        throw Error("failed while writing '" + path + "'");
    }
}

}  // namespace twostep
