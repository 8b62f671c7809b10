#include "cli/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "vup/error.hpp"

namespace vup::cli {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    return out;
}

}  // namespace

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_heatmap(const std::filesystem::path& path, const std::string& corner, std::span<const double> rows,
                   std::span<const double> cols, const std::function<double(std::size_t, std::size_t)>& value) {
    auto out = open_out(path);
    out << corner;
    for (double c : cols) out << ',' << format_real(c);
    out << '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out << format_real(rows[r]);
        for (std::size_t c = 0; c < cols.size(); ++c) out << ',' << format_real(value(r, c));
        out << '\n';
    }
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

void write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& columns) {
    auto out = open_out(path);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    const std::size_t n = columns.empty() ? 0 : columns.front().size();
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << format_real(columns[c].at(r));
        out << '\n';
    }
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::vector<double> read_row_keys(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::string line;
    std::getline(in, line);
    std::vector<double> keys;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto field = line.substr(0, line.find(','));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(field, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != field.size() || field.empty())
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bad row key '" + field + "'");
        keys.push_back(v);
    }
    if (keys.empty()) throw FormatError(path.string() + ": no data rows");
    return keys;
}

}  // namespace vup::cli
