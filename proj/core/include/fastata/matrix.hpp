#ifndef FASTATA_MATRIX_HPP
#define FASTATA_MATRIX_HPP

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fastata {

/// Thrown when a caller breaks an operation's precondition (dimension
/// mismatch, empty operand, inconsistent blocks, ...).
class contract_error : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class DenseMatrix;

/// Read-only rectangular window into row-major storage.
///
/// A view never owns its data; the backing DenseMatrix must outlive it.
/// Element (i, j) of the view is element (row_off + i, col_off + j) of the
/// base matrix, addressed through `row_stride`.
class MatrixView {
  public:
    MatrixView() = default;
    MatrixView(const double* data, std::size_t rows, std::size_t cols, std::size_t row_stride)
        : data_(data), rows_(rows), cols_(cols), stride_(row_stride) {}

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t row_stride() const noexcept { return stride_; }
    [[nodiscard]] bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const noexcept {
        return data_[i * stride_ + j];
    }
    [[nodiscard]] const double* row(std::size_t i) const noexcept { return data_ + i * stride_; }

    /// Sub-window starting at (r0, c0). Throws contract_error if it would
    /// leave this view.
    [[nodiscard]] MatrixView block(std::size_t r0, std::size_t c0, std::size_t rows,
                                   std::size_t cols) const;

  private:
    const double* data_ = nullptr;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t stride_ = 0;
};

/// Owning row-major matrix of doubles; element (i, j) lives at i * cols + j.
class DenseMatrix {
  public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    /// Row-list construction, e.g. `DenseMatrix({{1, 2}, {3, 4}})`.
    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

    /// Deep copy of an arbitrary view.
    static DenseMatrix from_view(MatrixView v);
    static DenseMatrix identity(std::size_t n);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    [[nodiscard]] double& operator()(std::size_t i, std::size_t j) noexcept {
        return data_[i * cols_ + j];
    }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const noexcept {
        return data_[i * cols_ + j];
    }

    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    [[nodiscard]] double* row(std::size_t i) noexcept { return data_.data() + i * cols_; }
    [[nodiscard]] const double* row(std::size_t i) const noexcept {
        return data_.data() + i * cols_;
    }

    [[nodiscard]] MatrixView view() const noexcept {
        return {data_.data(), rows_, cols_, cols_};
    }
    operator MatrixView() const noexcept { return view(); }  // NOLINT(google-explicit-constructor)

    /// Releases the storage; used to hand a payload to a message without a copy.
    [[nodiscard]] std::vector<double> take_data() && { return std::move(data_); }

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Half-split of an m x n matrix: the (1,1) block takes the ceilings.
struct SplitDims {
    std::size_t m1 = 0, m2 = 0, n1 = 0, n2 = 0;

    static SplitDims of(std::size_t m, std::size_t n) noexcept {
        return {(m + 1) / 2, m / 2, (n + 1) / 2, n / 2};
    }
    friend bool operator==(const SplitDims&, const SplitDims&) = default;
};

struct Quadrants {
    SplitDims dims;
    MatrixView a11, a12, a21, a22;
};

/// Zero-copy split of `a` into its four quadrants.
[[nodiscard]] Quadrants split_quadrants(MatrixView a);

/// Cache-oblivious out-of-place transpose. Recursively halves the larger
/// dimension down to kTransposeTile x kTransposeTile tiles.
inline constexpr std::size_t kTransposeTile = 16;
[[nodiscard]] DenseMatrix transpose(MatrixView a);

[[nodiscard]] DenseMatrix add(MatrixView a, MatrixView b);
[[nodiscard]] DenseMatrix sub(MatrixView a, MatrixView b);
/// out += a, elementwise. Dimensions must agree.
void add_in_place(DenseMatrix& out, MatrixView a);

/// Symmetric n x n matrix stored as its lower triangle, row by row.
/// Entry (i, j) with i >= j lives at i(i+1)/2 + j; (i, j) with i < j reads (j, i).
class PackedLowerTriangular {
  public:
    PackedLowerTriangular() = default;
    explicit PackedLowerTriangular(std::size_t n) : n_(n), data_(packed_size(n), 0.0) {}
    PackedLowerTriangular(std::size_t n, std::vector<double> data);

    static constexpr std::size_t packed_size(std::size_t n) noexcept { return n * (n + 1) / 2; }
    static constexpr std::size_t offset(std::size_t i, std::size_t j) noexcept {
        return i * (i + 1) / 2 + j;
    }

    [[nodiscard]] std::size_t n() const noexcept { return n_; }
    [[nodiscard]] double at(std::size_t i, std::size_t j) const noexcept {
        return i >= j ? data_[offset(i, j)] : data_[offset(j, i)];
    }
    /// Writable lower-triangle entry; requires i >= j.
    [[nodiscard]] double& lower(std::size_t i, std::size_t j) noexcept {
        return data_[offset(i, j)];
    }

    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    [[nodiscard]] std::vector<double> take_data() && { return std::move(data_); }

    /// Full symmetric matrix.
    [[nodiscard]] DenseMatrix unpack() const;
    /// Lower triangle of a square matrix; the upper part is ignored.
    static PackedLowerTriangular pack(MatrixView full);

    PackedLowerTriangular& operator+=(const PackedLowerTriangular& other);

    friend bool operator==(const PackedLowerTriangular&, const PackedLowerTriangular&) = default;

  private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// Assembles C = [C11 .; C21 C22] from its blocks (C12 is implied by symmetry).
/// C11 is n1 x n1, C21 is n2 x n1, C22 is n2 x n2; only lower parts of the
/// diagonal blocks are read.
[[nodiscard]] PackedLowerTriangular pack_lower(MatrixView c11, MatrixView c21, MatrixView c22);
/// Same, with the diagonal blocks already packed.
[[nodiscard]] PackedLowerTriangular pack_lower(const PackedLowerTriangular& c11, MatrixView c21,
                                               const PackedLowerTriangular& c22);

[[nodiscard]] double frobenius_norm(MatrixView a);
[[nodiscard]] double frobenius_norm(const PackedLowerTriangular& c);
/// Frobenius norm of the full symmetric difference a - b.
[[nodiscard]] double frobenius_distance(const PackedLowerTriangular& a,
                                        const PackedLowerTriangular& b);

[[nodiscard]] std::string shape_string(std::size_t rows, std::size_t cols);

}  // namespace fastata

#endif  // FASTATA_MATRIX_HPP
