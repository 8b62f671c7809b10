#include "vup/matrix_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <vector>
#include <ostream>
#include <string>

#include "vup/error.hpp"

namespace vup {

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_unsigned_v<T>);
    std::array<char, sizeof(T)> buf;
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((value >> (8 * i)) & 0xff);
    out.write(buf.data(), buf.size());
}

template <typename T>
T get_le(std::istream& in, const char* field) {
    std::array<unsigned char, sizeof(T)> buf;
    if (!in.read(reinterpret_cast<char*>(buf.data()), buf.size()))
        throw FormatError(std::string("model matrix: truncated while reading ") + field);
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(buf[i]) << (8 * i);
    return value;
}

void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& in, const char* field) { return std::bit_cast<double>(get_le<std::uint64_t>(in, field)); }

}  // namespace

void write_model_matrix(std::ostream& out, const SparseModelMatrix& matrix) {
    out.write(kMatrixMagic, 4);
    put_le<std::uint32_t>(out, kMatrixFormatVersion);
    put_le<std::uint64_t>(out, matrix.inputs());
    put_le<std::uint64_t>(out, matrix.outputs());
    put_f64(out, matrix.binning().lower());
    put_f64(out, matrix.binning().upper());
    const auto bins = matrix.bin_of();
    std::vector<char> payload(bins.size() * 4);
    for (std::size_t j = 0; j < bins.size(); ++j)
        for (std::size_t b = 0; b < 4; ++b) payload[4 * j + b] = static_cast<char>((bins[j] >> (8 * b)) & 0xff);
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw Error("model matrix: write failed");
}

void write_model_matrix(const std::filesystem::path& path, const SparseModelMatrix& matrix) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    write_model_matrix(out, matrix);
}

SparseModelMatrix read_model_matrix(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4)) throw FormatError("model matrix: truncated header");
    if (std::memcmp(magic, kMatrixMagic, 4) != 0) throw FormatError("model matrix: bad magic (expected \"VUPM\")");
    const auto version = get_le<std::uint32_t>(in, "version");
    if (version != kMatrixFormatVersion)
        throw FormatError("model matrix: unsupported format version " + std::to_string(version));
    const auto n = get_le<std::uint64_t>(in, "N");
    const auto k = get_le<std::uint64_t>(in, "K");
    const double y_min = get_f64(in, "y_min");
    const double y_max = get_f64(in, "y_max");
    if (n == 0 || n > std::numeric_limits<std::uint32_t>::max()) throw FormatError("model matrix: invalid N");
    if (k == 0 || k > std::numeric_limits<std::uint32_t>::max()) throw FormatError("model matrix: invalid K");
    if (!std::isfinite(y_min) || !std::isfinite(y_max) || y_min > y_max)
        throw FormatError("model matrix: invalid output range");
    if (y_min == y_max && k != 1) throw FormatError("model matrix: degenerate range requires K = 1");

    if (const auto here = in.tellg(); here != std::streampos(-1)) {
        in.seekg(0, std::ios::end);
        const auto remaining = static_cast<std::uint64_t>(in.tellg() - here);
        in.seekg(here);
        if (remaining < n * 4) throw FormatError("model matrix: truncated while reading bin indices");
    }
    std::vector<unsigned char> payload(n * 4);
    if (!in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size())))
        throw FormatError("model matrix: truncated while reading bin indices");
    std::vector<std::uint32_t> bin_of(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::uint32_t r = static_cast<std::uint32_t>(payload[4 * j]) |
                                static_cast<std::uint32_t>(payload[4 * j + 1]) << 8 |
                                static_cast<std::uint32_t>(payload[4 * j + 2]) << 16 |
                                static_cast<std::uint32_t>(payload[4 * j + 3]) << 24;
        if (r >= k) throw FormatError("model matrix: bin index " + std::to_string(r) + " >= K");
        bin_of[j] = r;
    }
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError("model matrix: trailing bytes after payload");
    return SparseModelMatrix(std::move(bin_of), OutputBinning(y_min, y_max, k));
}

SparseModelMatrix read_model_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    return read_model_matrix(in);
}

}  // namespace vup
