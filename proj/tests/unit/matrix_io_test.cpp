#include <gtest/gtest.h>

#include <sstream>

#include "vup/error.hpp"
#include "vup/matrix_io.hpp"

using namespace vup;

namespace {

SparseModelMatrix sample_matrix() {
    auto grid = std::make_shared<const Grid>(GridSpec{{{"x", Role::x, -5, 5, 30}, {"a", Role::alpha, -1, 1, 10}}});
    return build_model_matrix(builtin("ipsa2d"), grid, 50);
}

std::string serialized(const SparseModelMatrix& m) {
    std::ostringstream os;
    write_model_matrix(os, m);
    return os.str();
}

SparseModelMatrix parse(const std::string& bytes) {
    std::istringstream is(bytes);
    return read_model_matrix(is);
}

}  // namespace

TEST(MatrixIo, RoundTripIsExact) {
    const auto m = sample_matrix();
    const auto bytes = serialized(m);
    EXPECT_EQ(bytes.size(), 4u + 4 + 8 + 8 + 8 + 8 + 4 * m.inputs());
    const auto back = parse(bytes);
    EXPECT_EQ(back.binning(), m.binning());
    EXPECT_TRUE(std::equal(back.bin_of().begin(), back.bin_of().end(), m.bin_of().begin(), m.bin_of().end()));
    EXPECT_EQ(serialized(back), bytes);
}

TEST(MatrixIo, HeaderIsLittleEndian) {
    const auto bytes = serialized(sample_matrix());
    EXPECT_EQ(bytes.substr(0, 4), "VUPM");
    EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1u);
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 300u % 256);
    EXPECT_EQ(static_cast<unsigned char>(bytes[9]), 300u / 256);
}

TEST(MatrixIo, CorruptionIsRejected) {
    const auto good = serialized(sample_matrix());
    auto bad = good;
    bad[0] = 'X';
    EXPECT_THROW(parse(bad), FormatError);
    bad = good;
    bad[4] = 9;
    EXPECT_THROW(parse(bad), FormatError);
    EXPECT_THROW(parse(good.substr(0, good.size() - 1)), FormatError);
    EXPECT_THROW(parse(good.substr(0, 10)), FormatError);
    EXPECT_THROW(parse(good + "x"), FormatError);
    bad = good;
    bad[40] = static_cast<char>(0xff);
    bad[41] = static_cast<char>(0xff);
    EXPECT_THROW(parse(bad), FormatError);
    bad = good;
    for (int i = 16; i < 24; ++i) bad[i] = static_cast<char>(0x7f);
    EXPECT_THROW(parse(bad), FormatError);
}
