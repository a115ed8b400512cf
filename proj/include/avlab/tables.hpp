#pragma once

#include <string>
#include <vector>

namespace avlab {

// Column-named table of text cells. Numbers are stored in their shortest round-trip form, so a table
// written and read back compares equal cell by cell.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    // Index of a column, or -1.
    int column(const std::string& name) const;
    // Throws std::out_of_range for unknown columns.
    const std::string& cell(std::size_t row, const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;

    bool operator==(const Table& o) const { return columns == o.columns && rows == o.rows; }
};

// Row keyed by column name; unset cells read "nan".
class Row {
public:
    explicit Row(const Table& t) : t_(&t), cells_(t.columns.size(), "nan") {}
    Row& set(const std::string& name, const std::string& value);
    Row& set(const std::string& name, const char* value) { return set(name, std::string(value)); }
    Row& set(const std::string& name, double value);
    Row& set(const std::string& name, int value);
    Row& set(const std::string& name, bool value);
    const std::vector<std::string>& cells() const { return cells_; }

private:
    const Table* t_;
    std::vector<std::string> cells_;
};

// Shortest text that parses back to the same double ("nan", "inf", "-inf" for non-finite values).
std::string format_double(double v);
double parse_double(const std::string& s);

std::string write_csv(const Table& t);
// RFC 4180 quoting; throws std::runtime_error on ragged rows or unterminated quotes.
Table read_csv(const std::string& text);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace avlab
