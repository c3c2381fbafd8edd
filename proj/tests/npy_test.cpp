#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "latentedit/dataset.hpp"
#include "test_util.hpp"

using namespace latentedit;
using testutil::TempDir;

namespace {

void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Header bytes assembled directly from the format definition.
std::vector<unsigned char> hand_header(const std::string& descr, const std::string& shape) {
    std::string dict = "{'descr': '" + descr + "', 'fortran_order': False, 'shape': " + shape + ", }";
    while ((10 + dict.size() + 1) % 64 != 0) dict.push_back(' ');
    dict.push_back('\n');
    std::vector<unsigned char> b = {0x93, 'N', 'U', 'M', 'P', 'Y', 0x01, 0x00};
    b.push_back(static_cast<unsigned char>(dict.size() & 0xff));
    b.push_back(static_cast<unsigned char>(dict.size() >> 8));
    b.insert(b.end(), dict.begin(), dict.end());
    return b;
}

void append_le(std::vector<unsigned char>& b, std::uint64_t bits, int width) {
    for (int i = 0; i < width; ++i) b.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xff));
}

}  // namespace

TEST(Npy, HandEncodedFloat64) {
    TempDir dir;
    auto bytes = hand_header("<f8", "(2, 3)");
    // IEEE-754 bit patterns of 1.0 .. 6.0
    for (std::uint64_t bits : {0x3FF0000000000000ULL, 0x4000000000000000ULL, 0x4008000000000000ULL,
                               0x4010000000000000ULL, 0x4014000000000000ULL, 0x4018000000000000ULL})
        append_le(bytes, bits, 8);
    write_bytes(dir / "a.npy", bytes);

    const Matrix m = npy::read_matrix(dir / "a.npy");
    ASSERT_EQ(m.rows(), 2);
    ASSERT_EQ(m.cols(), 3);
    for (int i = 0; i < 6; ++i) EXPECT_EQ(m.data()[i], i + 1.0);
    EXPECT_EQ(m(1, 0), 4.0);
}

TEST(Npy, HandEncodedFloat32IsPromoted) {
    TempDir dir;
    auto bytes = hand_header("<f4", "(3, 2)");
    for (std::uint64_t bits : {0x3F800000ULL, 0x40000000ULL, 0x40400000ULL, 0x40800000ULL, 0x40A00000ULL, 0x3E800000ULL})
        append_le(bytes, bits, 4);
    write_bytes(dir / "a.npy", bytes);

    const Matrix m = npy::read_matrix(dir / "a.npy");
    ASSERT_EQ(m.rows(), 3);
    EXPECT_EQ(m(0, 0), 1.0);
    EXPECT_EQ(m(1, 1), 4.0);
    EXPECT_EQ(m(2, 1), 0.25);
}

TEST(Npy, ZipMagicIsRejected) {
    TempDir dir;
    write_bytes(dir / "z.npy", {'P', 'K', 0x03, 0x04, 0, 0, 0, 0, 0, 0, 0, 0});
    EXPECT_THROW_CODE(npy::read_matrix(dir / "z.npy"), ErrorCode::BadMagic);
}

TEST(Npy, UnsupportedLayouts) {
    TempDir dir;
    write_bytes(dir / "be.npy", hand_header(">f8", "(1, 1)"));
    EXPECT_THROW_CODE(npy::read_matrix(dir / "be.npy"), ErrorCode::UnsupportedDtype);
    write_bytes(dir / "i4.npy", hand_header("<i4", "(1, 1)"));
    EXPECT_THROW_CODE(npy::read_matrix(dir / "i4.npy"), ErrorCode::UnsupportedDtype);
    write_bytes(dir / "r3.npy", hand_header("<f8", "(1, 1, 1)"));
    EXPECT_THROW_CODE(npy::read_matrix(dir / "r3.npy"), ErrorCode::UnsupportedRank);
    write_bytes(dir / "r1.npy", hand_header("<f8", "(4,)"));
    EXPECT_THROW_CODE(npy::read_matrix(dir / "r1.npy"), ErrorCode::UnsupportedRank);

    auto v2 = hand_header("<f8", "(1, 1)");
    v2[6] = 2;
    write_bytes(dir / "v2.npy", v2);
    EXPECT_THROW_CODE(npy::read_matrix(dir / "v2.npy"), ErrorCode::UnsupportedDtype);
}

TEST(Npy, TruncatedPayload) {
    TempDir dir;
    auto bytes = hand_header("<f8", "(2, 2)");
    append_le(bytes, 0, 8);
    write_bytes(dir / "t.npy", bytes);
    EXPECT_THROW_CODE(npy::read_matrix(dir / "t.npy"), ErrorCode::TruncatedFile);
    write_bytes(dir / "h.npy", {0x93, 'N', 'U', 'M', 'P', 'Y', 1, 0, 0x40, 0, '{'});
    EXPECT_THROW_CODE(npy::read_matrix(dir / "h.npy"), ErrorCode::TruncatedFile);
}

TEST(Npy, SingleZeroIsHeaderPlusEightBytes) {
    TempDir dir;
    npy::write_matrix(Matrix::Zero(1, 1), dir / "z.npy");
    std::ifstream in(dir / "z.npy", std::ios::binary);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto header = hand_header("<f8", "(1, 1)");
    ASSERT_EQ(header.size() % 64, 0u);
    ASSERT_EQ(bytes.size(), header.size() + 8u);
    EXPECT_EQ(bytes[header.size() - 1], '\n');
    for (std::size_t i = header.size(); i < bytes.size(); ++i) EXPECT_EQ(bytes[i], 0);
    EXPECT_EQ(std::vector<unsigned char>(bytes.begin(), bytes.begin() + static_cast<long>(header.size())), header);
}

TEST(Npy, RoundTripIsBitExact) {
    TempDir dir;
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> dim(1, 40);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix m = testutil::random_matrix(rng, dim(rng), dim(rng), 1e3);
        m(0, 0) = -0.0;
        npy::write_matrix(m, dir / "r.npy");
        const Matrix back = npy::read_matrix(dir / "r.npy");
        ASSERT_EQ(back.rows(), m.rows());
        ASSERT_EQ(back.cols(), m.cols());
        EXPECT_EQ(std::memcmp(back.data(), m.data(), sizeof(double) * static_cast<std::size_t>(m.size())), 0);
        EXPECT_EQ(npy::serialize(back), npy::serialize(m));
    }
}

TEST(Npy, UnwritablePath) {
    EXPECT_THROW_CODE(npy::write_matrix(Matrix::Zero(1, 1), "/nonexistent-dir/for/sure/x.npy"), ErrorCode::IoError);
}

TEST(Dataset, LoadsPairedFiles) {
    TempDir dir;
    std::mt19937_64 rng(1);
    npy::write_matrix(testutil::random_matrix(rng, 10, 512), dir / "w.npy");
    npy::write_matrix(testutil::random_matrix(rng, 10, 40), dir / "a.npy");
    const PairedDataset ds = load_dataset(dir / "w.npy", dir / "a.npy");
    EXPECT_EQ(ds.size(), 10);
    EXPECT_EQ(ds.latent_dim(), 512);
    EXPECT_EQ(ds.num_attributes(), 40);
}

TEST(Dataset, RowCountMismatch) {
    TempDir dir;
    npy::write_matrix(Matrix::Zero(10, 8), dir / "w.npy");
    npy::write_matrix(Matrix::Zero(9, 3), dir / "a.npy");
    EXPECT_THROW_CODE(load_dataset(dir / "w.npy", dir / "a.npy"), ErrorCode::RowCountMismatch);
}

TEST(Dataset, MissingFileIsIoError) {
    TempDir dir;
    EXPECT_THROW_CODE(load_dataset(dir / "nope.npy", dir / "a.npy"), ErrorCode::IoError);
}
