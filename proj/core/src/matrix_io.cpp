#include "fastata/matrix_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace fastata {

namespace {

static_assert(std::numeric_limits<double>::is_iec559);

void put_u64(std::ostream& out, std::uint64_t v) {
    std::array<char, 8> b{};
    for (std::size_t i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffU);
    out.write(b.data(), b.size());
}

std::uint64_t get_u64(std::istream& in) {
    std::array<unsigned char, 8> b{};
    in.read(reinterpret_cast<char*>(b.data()), b.size());
    if (!in) throw std::runtime_error("binary matrix: truncated header or payload");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

MatrixFormat resolve(const std::filesystem::path& path, MatrixFormat format) {
    if (format != MatrixFormat::automatic) return format;
    return path.extension() == ".bin" ? MatrixFormat::binary : MatrixFormat::text;
}

}  // namespace

void write_text(std::ostream& out, MatrixView a) {
    out << a.rows() << ' ' << a.cols() << '\n';
    out.precision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (j != 0) out << ' ';
            out << a(i, j);
        }
        out << '\n';
    }
}

DenseMatrix read_text(std::istream& in) {
    std::size_t m = 0;
    std::size_t n = 0;
    if (!(in >> m >> n)) throw std::runtime_error("text matrix: missing 'm n' header");
    DenseMatrix a(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!(in >> a(i, j))) {
                throw std::runtime_error("text matrix: bad or missing value at (" +
                                         std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
    }
    return a;
}

void write_binary(std::ostream& out, MatrixView a) {
    put_u64(out, a.rows());
    put_u64(out, a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) put_u64(out, std::bit_cast<std::uint64_t>(a(i, j)));
}

DenseMatrix read_binary(std::istream& in) {
    const auto m = get_u64(in);
    const auto n = get_u64(in);
    DenseMatrix a(m, n);
    for (double& v : a.data()) v = std::bit_cast<double>(get_u64(in));
    return a;
}

DenseMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format) {
    const auto fmt = resolve(path, format);
    std::ifstream in(path, fmt == MatrixFormat::binary ? std::ios::binary : std::ios::in);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return fmt == MatrixFormat::binary ? read_binary(in) : read_text(in);
}

void save_matrix(const std::filesystem::path& path, MatrixView a, MatrixFormat format) {
    const auto fmt = resolve(path, format);
    std::ofstream out(path, fmt == MatrixFormat::binary ? std::ios::binary : std::ios::out);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    if (fmt == MatrixFormat::binary) {
        write_binary(out, a);
    } else {
        write_text(out, a);
    }
}

}  // namespace fastata
