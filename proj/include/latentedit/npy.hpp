#pragma once

// Minimal .npy v1.0 reader/writer for 2-D float matrices.
//
// Reader accepts '<f4' and '<f8' in C order; writer always emits '<f8'.
// Header layout: magic "\x93NUMPY", version 1.0, u16 little-endian header
// length, ASCII dict, padded with spaces so that the payload starts at a
// multiple of 64 bytes, terminated by '\n'.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "latentedit/types.hpp"

namespace latentedit::npy {

namespace detail {

inline constexpr std::array<unsigned char, 6> kMagic = {0x93, 'N', 'U', 'M', 'P', 'Y'};

template <typename T>
T load_le(const unsigned char* p) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(p[i]) << (8 * i);
    return std::bit_cast<T>(u);
}

inline void store_le(double v, unsigned char* out) {
    auto u = std::bit_cast<std::uint64_t>(v);
    for (std::size_t i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
}

// Value of `key` in a python-literal dict, up to the next ',' at depth 0 or '}'.
inline std::string dict_value(const std::string& header, const std::string& key) {
    const std::string quoted1 = "'" + key + "'";
    const std::string quoted2 = "\"" + key + "\"";
    auto pos = header.find(quoted1);
    std::size_t klen = quoted1.size();
    if (pos == std::string::npos) {
        pos = header.find(quoted2);
        klen = quoted2.size();
    }
    if (pos == std::string::npos) fail(ErrorCode::UnsupportedDtype, "header lacks key " + key);
    pos = header.find(':', pos + klen);
    if (pos == std::string::npos) fail(ErrorCode::UnsupportedDtype, "malformed header near " + key);
    ++pos;
    int depth = 0;
    std::size_t end = pos;
    for (; end < header.size(); ++end) {
        char c = header[end];
        if (c == '(' || c == '[') ++depth;
        if (c == ')' || c == ']') --depth;
        if (depth == 0 && (c == ',' || c == '}')) break;
    }
    std::string v = header.substr(pos, end - pos);
    auto first = v.find_first_not_of(" \t");
    auto last = v.find_last_not_of(" \t");
    return first == std::string::npos ? std::string{} : v.substr(first, last - first + 1);
}

inline std::vector<std::int64_t> parse_shape(const std::string& text) {
    if (text.size() < 2 || text.front() != '(' || text.back() != ')')
        fail(ErrorCode::UnsupportedRank, "shape is not a tuple: " + text);
    std::vector<std::int64_t> dims;
    std::string inner = text.substr(1, text.size() - 2);
    std::size_t i = 0;
    while (i < inner.size()) {
        while (i < inner.size() && (inner[i] == ' ' || inner[i] == ',')) ++i;
        if (i >= inner.size()) break;
        std::size_t j = i;
        while (j < inner.size() && inner[j] >= '0' && inner[j] <= '9') ++j;
        if (j == i) fail(ErrorCode::UnsupportedRank, "bad shape entry in " + text);
        dims.push_back(std::stoll(inner.substr(i, j - i)));
        i = j;
    }
    return dims;
}

}  // namespace detail

/// Decodes an in-memory .npy image. Values are promoted to double.
inline Matrix parse(const std::vector<unsigned char>& bytes) {
    using namespace detail;
    if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
        fail(ErrorCode::BadMagic, "not an .npy file");
    if (bytes.size() < 10) fail(ErrorCode::TruncatedFile, "header preamble cut short");
    if (bytes[6] != 1 || bytes[7] != 0)
        fail(ErrorCode::UnsupportedDtype,
             "only .npy v1.0 is supported (got v" + std::to_string(bytes[6]) + "." + std::to_string(bytes[7]) + ")");
    const std::size_t header_len = static_cast<std::size_t>(bytes[8]) | (static_cast<std::size_t>(bytes[9]) << 8);
    if (bytes.size() < 10 + header_len) fail(ErrorCode::TruncatedFile, "header dict cut short");
    const std::string header(bytes.begin() + 10, bytes.begin() + 10 + static_cast<std::ptrdiff_t>(header_len));

    std::string descr = dict_value(header, "descr");
    if (descr.size() >= 2 && (descr.front() == '\'' || descr.front() == '"')) descr = descr.substr(1, descr.size() - 2);
    std::size_t width = 0;
    if (descr == "<f8") width = 8;
    else if (descr == "<f4") width = 4;
    else fail(ErrorCode::UnsupportedDtype, "dtype " + descr);

    if (dict_value(header, "fortran_order") != "False")
        fail(ErrorCode::UnsupportedDtype, "fortran_order arrays are not supported");

    const auto shape = parse_shape(dict_value(header, "shape"));
    if (shape.size() != 2) fail(ErrorCode::UnsupportedRank, "expected a 2-D array, got rank " + std::to_string(shape.size()));

    const auto rows = static_cast<Index>(shape[0]);
    const auto cols = static_cast<Index>(shape[1]);
    const std::size_t count = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    const std::size_t offset = 10 + header_len;
    if (bytes.size() < offset + count * width) fail(ErrorCode::TruncatedFile, "payload cut short");

    Matrix m(rows, cols);
    double* out = m.data();
    const unsigned char* in = bytes.data() + offset;
    if (width == 8) {
        for (std::size_t i = 0; i < count; ++i) out[i] = load_le<double>(in + 8 * i);
    } else {
        for (std::size_t i = 0; i < count; ++i) out[i] = static_cast<double>(load_le<float>(in + 4 * i));
    }
    return m;
}

/// Encodes `m` as an .npy v1.0 '<f8' C-order image.
inline std::vector<unsigned char> serialize(const Matrix& m) {
    std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (" + std::to_string(m.rows()) + ", " +
                       std::to_string(m.cols()) + "), }";
    const std::size_t unpadded = 10 + dict.size() + 1;
    const std::size_t total = (unpadded + 63) / 64 * 64;
    dict.append(total - unpadded, ' ');
    dict.push_back('\n');

    std::vector<unsigned char> out(10 + dict.size() + static_cast<std::size_t>(m.size()) * 8);
    std::copy(detail::kMagic.begin(), detail::kMagic.end(), out.begin());
    out[6] = 1;
    out[7] = 0;
    out[8] = static_cast<unsigned char>(dict.size() & 0xff);
    out[9] = static_cast<unsigned char>((dict.size() >> 8) & 0xff);
    std::memcpy(out.data() + 10, dict.data(), dict.size());
    unsigned char* payload = out.data() + 10 + dict.size();
    for (Index i = 0; i < m.size(); ++i) detail::store_le(m.data()[i], payload + 8 * static_cast<std::size_t>(i));
    return out;
}

inline Matrix read_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return parse(bytes);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + std::string(e.what()));
    }
}

inline void write_matrix(const Matrix& m, const std::filesystem::path& path) {
    const auto bytes = serialize(m);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::IoError, "short write to " + path.string());
}

/// Column vector stored as an n x 1 matrix.
inline void write_vector(const Vector& v, const std::filesystem::path& path) {
    write_matrix(Matrix(v), path);
}

inline Vector read_vector(const std::filesystem::path& path) {
    Matrix m = read_matrix(path);
    if (m.cols() != 1 && m.rows() != 1) fail(ErrorCode::DimensionMismatch, path.string() + " is not a vector");
    return Eigen::Map<const Vector>(m.data(), m.size());
}

}  // namespace latentedit::npy
