#include "avlab/tables.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace avlab {

int Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    return -1;
}

const std::string& Table::cell(std::size_t row, const std::string& name) const {
    const int c = column(name);
    if (c < 0) throw std::out_of_range("unknown column '" + name + "'");
    return rows.at(row).at(static_cast<std::size_t>(c));
}

double Table::number(std::size_t row, const std::string& name) const { return parse_double(cell(row, name)); }

Row& Row::set(const std::string& name, const std::string& value) {
    const int c = t_->column(name);
    if (c < 0) throw std::out_of_range("unknown column '" + name + "'");
    cells_[static_cast<std::size_t>(c)] = value;
    return *this;
}

Row& Row::set(const std::string& name, double value) { return set(name, format_double(value)); }
Row& Row::set(const std::string& name, int value) { return set(name, std::to_string(value)); }
Row& Row::set(const std::string& name, bool value) { return set(name, std::string(value ? "1" : "0")); }

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

namespace {

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

void write_line(std::ostringstream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        os << quote(cells[i]);
    }
    os << '\n';
}

}  // namespace

std::string write_csv(const Table& t) {
    std::ostringstream os;
    write_line(os, t.columns);
    for (const auto& r : t.rows) {
        if (r.size() != t.columns.size()) throw std::runtime_error("ragged table row");
        write_line(os, r);
    }
    return os.str();
}

Table read_csv(const std::string& text) {
    std::vector<std::vector<std::string>> lines;
    std::vector<std::string> cur;
    std::string field;
    bool in_quotes = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            in_quotes = true;
            any = true;
        } else if (c == ',') {
            cur.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            cur.push_back(std::move(field));
            field.clear();
            lines.push_back(std::move(cur));
            cur.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (in_quotes) throw std::runtime_error("unterminated quoted CSV field");
    if (any || !field.empty()) {
        cur.push_back(std::move(field));
        lines.push_back(std::move(cur));
    }
    Table t;
    if (lines.empty()) return t;
    t.columns = std::move(lines.front());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].size() != t.columns.size())
            throw std::runtime_error("CSV row " + std::to_string(i) + " has " + std::to_string(lines[i].size()) +
                                     " cells, expected " + std::to_string(t.columns.size()));
        t.rows.push_back(std::move(lines[i]));
    }
    return t;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace avlab
