#include "cli/csv.hpp"

#include "cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vnc::cli {

std::string format_number(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    if (v == 0.0) {
        return "0";
    }
    char buf[64];
    const auto fmt = std::abs(v) < 1e-3 ? std::chars_format::scientific : std::chars_format::fixed;
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, fmt);
    if (ec != std::errc()) {
        throw NumericalError("cannot format number");
    }
    return std::string(buf, ptr);
}

void CsvTable::add_row(std::vector<std::string> row)
{
    if (row.size() != header.size()) {
        throw std::logic_error("CSV row width differs from header");
    }
    rows.push_back(std::move(row));
}

std::string CsvTable::str() const
{
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k > 0) {
                out += ',';
            }
            out += cells[k];
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows) {
        line(r);
    }
    return out;
}

void CsvTable::write(const std::string& path) const
{
    write_text(path, str());
}

int CsvTable::column(const std::string& name) const
{
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (header[k] == name) {
            return static_cast<int>(k);
        }
    }
    return -1;
}

std::vector<double> CsvTable::numbers(const std::string& name) const
{
    const int col = column(name);
    if (col < 0) {
        throw UsageError("CSV has no column '" + name + "'");
    }
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back(parse_number(r[col], name));
    }
    return out;
}

CsvTable parse_csv(const std::string& text, const std::string& origin)
{
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size()) {
            throw UsageError(origin + ":" + std::to_string(number) + ": expected " +
                             std::to_string(t.header.size()) + " fields");
        }
        t.rows.push_back(std::move(cells));
    }
    if (t.header.empty()) {
        throw UsageError(origin + ": empty CSV");
    }
    return t;
}

CsvTable read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot read " + path);
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_csv(text.str(), path);
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw UsageError("cannot write " + path);
    }
    out << text;
    if (!out) {
        throw NumericalError("write failed for " + path);
    }
}

} // namespace vnc::cli
