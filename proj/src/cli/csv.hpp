// Plain CSV with a header row. Numbers are written locale-free in their
// shortest round-trip form, scientific below 1e-3.
#ifndef VNC_CLI_CSV_HPP
#define VNC_CLI_CSV_HPP

#include <string>
#include <vector>

namespace vnc::cli {

std::string format_number(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    std::string str() const;
    void write(const std::string& path) const;

    int column(const std::string& name) const; // -1 when absent
    std::vector<double> numbers(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text, const std::string& origin = "csv");
CsvTable read_csv(const std::string& path);

void write_text(const std::string& path, const std::string& text);

} // namespace vnc::cli

#endif // VNC_CLI_CSV_HPP
