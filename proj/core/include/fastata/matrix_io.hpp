#ifndef FASTATA_MATRIX_IO_HPP
#define FASTATA_MATRIX_IO_HPP

#include <filesystem>
#include <iosfwd>

#include "fastata/matrix.hpp"

namespace fastata {

// Text format: first line "m n", then m lines of n space-separated decimals.
// Binary format: u64 LE m, u64 LE n, then m*n IEEE-754 binary64 LE, row-major.

void write_text(std::ostream& out, MatrixView a);
DenseMatrix read_text(std::istream& in);

void write_binary(std::ostream& out, MatrixView a);
DenseMatrix read_binary(std::istream& in);

enum class MatrixFormat { automatic, text, binary };

/// `automatic` picks binary for a ".bin" extension and text otherwise.
/// Throws std::runtime_error on I/O or parse failure.
DenseMatrix load_matrix(const std::filesystem::path& path,
                        MatrixFormat format = MatrixFormat::automatic);
void save_matrix(const std::filesystem::path& path, MatrixView a,
                 MatrixFormat format = MatrixFormat::automatic);

}  // namespace fastata

#endif  // FASTATA_MATRIX_IO_HPP
