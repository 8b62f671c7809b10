#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace vup::cli {

std::string format_real(double v);

/// First row: corner label then column keys; then one row per bin center.
/// value(r, c) supplies the body.
void write_heatmap(const std::filesystem::path& path, const std::string& corner, std::span<const double> rows,
                   std::span<const double> cols, const std::function<double(std::size_t, std::size_t)>& value);

/// Equal-length columns under a header.
void write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& columns);

/// First column of a heatmap file, skipping the header row.
std::vector<double> read_row_keys(const std::filesystem::path& path);

}  // namespace vup::cli
