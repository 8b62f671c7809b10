#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "vup/propagation.hpp"

namespace vup {

inline constexpr char kMatrixMagic[4] = {'V', 'U', 'P', 'M'};
inline constexpr std::uint32_t kMatrixFormatVersion = 1;

// Binary sidecar, all fields little-endian:
//   "VUPM" | version u32 | N u64 | K u64 | y_min f64 | y_max f64 | N x u32 bin index
void write_model_matrix(std::ostream& out, const SparseModelMatrix& matrix);
void write_model_matrix(const std::filesystem::path& path, const SparseModelMatrix& matrix);

/// Reads a sidecar. The result carries no grid; attach provenance from the
/// JSON manifest. Throws FormatError on any structural problem.
SparseModelMatrix read_model_matrix(std::istream& in);
SparseModelMatrix read_model_matrix(const std::filesystem::path& path);

}  // namespace vup
