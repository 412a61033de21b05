#ifndef TWOSTEP_RESULTS_HPP
#define TWOSTEP_RESULTS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace twostep {

/// One table cell. monostate serializes as an empty CSV field or JSON null,
/// as does a NaN double.
using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

/// Column-ordered result table shared by every command.
struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    /// Appends a row; throws DimensionMismatch when its width differs from
    /// the header.
    void add(std::vector<Cell> row);
};

enum class OutputFormat { csv, json };

/// "csv" or "json"; throws ValidationError("format") otherwise.
OutputFormat parse_format(std::string_view name);

/// json when the path ends in ".json", csv otherwise.
OutputFormat format_for_path(std::string_view path);

/// Doubles with 12 significant digits, LF line endings, RFC 4180 quoting.
void write_csv(std::ostream& out, const ResultTable& table);

/// Array of objects keyed by column name.
void write_json(std::ostream& out, const ResultTable& table);

void write_results(std::ostream& out, const ResultTable& table, OutputFormat format);

/// Writes to `path`, replacing it.
void save_results(const ResultTable& table, const std::string& path, OutputFormat format);

/// "%.12g" rendering used by the CSV writer.
std::string format_double(double value);

}  // namespace twostep

#endif  // TWOSTEP_RESULTS_HPP
