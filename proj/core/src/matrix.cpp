#include "fastata/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace fastata {

namespace {

void require_same_shape(MatrixView a, MatrixView b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw contract_error(std::string(op) + ": shape mismatch " +
                             shape_string(a.rows(), a.cols()) + " vs " +
                             shape_string(b.rows(), b.cols()));
    }
}

// Writes src^t into dst (dst has src.cols() rows, addressed with dst_stride).
void transpose_rec(MatrixView src, double* dst, std::size_t dst_stride) {
    const std::size_t rows = src.rows();
    const std::size_t cols = src.cols();
    if (rows <= kTransposeTile && cols <= kTransposeTile) {
        for (std::size_t i = 0; i < rows; ++i) {
            const double* s = src.row(i);
            for (std::size_t j = 0; j < cols; ++j) dst[j * dst_stride + i] = s[j];
        }
        return;
    }
    if (rows >= cols) {
        const std::size_t h = rows / 2;
        transpose_rec(src.block(0, 0, h, cols), dst, dst_stride);
        transpose_rec(src.block(h, 0, rows - h, cols), dst + h, dst_stride);
    } else {
        const std::size_t h = cols / 2;
        transpose_rec(src.block(0, 0, rows, h), dst, dst_stride);
        transpose_rec(src.block(0, h, rows, cols - h), dst + h * dst_stride, dst_stride);
    }
}

template <typename Op>
DenseMatrix elementwise(MatrixView a, MatrixView b, Op op) {
    DenseMatrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* x = a.row(i);
        const double* y = b.row(i);
        double* z = out.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) z[j] = op(x[j], y[j]);
    }
    return out;
}

}  // namespace

std::string shape_string(std::size_t rows, std::size_t cols) {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

MatrixView MatrixView::block(std::size_t r0, std::size_t c0, std::size_t rows,
                             std::size_t cols) const {
    if (r0 + rows > rows_ || c0 + cols > cols_) {
        throw contract_error("block " + shape_string(rows, cols) + " at (" + std::to_string(r0) +
                             "," + std::to_string(c0) + ") exceeds view " +
                             shape_string(rows_, cols_));
    }
    if (rows == 0 || cols == 0) return {data_, rows, cols, stride_};
    return {data_ + r0 * stride_ + c0, rows, cols, stride_};
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) {
        throw contract_error("DenseMatrix: " + std::to_string(data_.size()) +
                             " values for shape " + shape_string(rows, cols));
    }
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw contract_error("DenseMatrix: ragged row list");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

DenseMatrix DenseMatrix::from_view(MatrixView v) {
    DenseMatrix out(v.rows(), v.cols());
    for (std::size_t i = 0; i < v.rows(); ++i) std::copy_n(v.row(i), v.cols(), out.row(i));
    return out;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
    return out;
}

Quadrants split_quadrants(MatrixView a) {
    const auto d = SplitDims::of(a.rows(), a.cols());
    return {d, a.block(0, 0, d.m1, d.n1), a.block(0, d.n1, d.m1, d.n2),
            a.block(d.m1, 0, d.m2, d.n1), a.block(d.m1, d.n1, d.m2, d.n2)};
}

DenseMatrix transpose(MatrixView a) {
    DenseMatrix out(a.cols(), a.rows());
    if (!a.empty()) transpose_rec(a, out.row(0), out.cols());
    return out;
}

DenseMatrix add(MatrixView a, MatrixView b) {
    require_same_shape(a, b, "add");
    return elementwise(a, b, [](double x, double y) { return x + y; });
}

DenseMatrix sub(MatrixView a, MatrixView b) {
    require_same_shape(a, b, "sub");
    return elementwise(a, b, [](double x, double y) { return x - y; });
}

void add_in_place(DenseMatrix& out, MatrixView a) {
    require_same_shape(out.view(), a, "add_in_place");
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* x = a.row(i);
        double* z = out.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) z[j] += x[j];
    }
}

PackedLowerTriangular::PackedLowerTriangular(std::size_t n, std::vector<double> data)
    : n_(n), data_(std::move(data)) {
    if (data_.size() != packed_size(n)) {
        throw contract_error("PackedLowerTriangular: " + std::to_string(data_.size()) +
                             " values for order " + std::to_string(n));
    }
}

DenseMatrix PackedLowerTriangular::unpack() const {
    DenseMatrix out(n_, n_);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            out(i, j) = data_[offset(i, j)];
            out(j, i) = data_[offset(i, j)];
        }
    }
    return out;
}

PackedLowerTriangular PackedLowerTriangular::pack(MatrixView full) {
    if (full.rows() != full.cols()) {
        throw contract_error("pack: matrix is not square: " +
                             shape_string(full.rows(), full.cols()));
    }
    PackedLowerTriangular out(full.rows());
    for (std::size_t i = 0; i < full.rows(); ++i)
        std::copy_n(full.row(i), i + 1, out.data_.data() + offset(i, 0));
    return out;
}

PackedLowerTriangular& PackedLowerTriangular::operator+=(const PackedLowerTriangular& other) {
    if (other.n_ != n_) {
        throw contract_error("packed +=: order mismatch " + std::to_string(n_) + " vs " +
                             std::to_string(other.n_));
    }
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
}

namespace {

void check_block_dims(std::size_t n1, std::size_t c21_rows, std::size_t c21_cols, std::size_t n2) {
    const std::size_t n = n1 + n2;
    if (c21_rows != n2 || c21_cols != n1 || n1 != (n + 1) / 2 || n2 != n / 2) {
        throw contract_error("pack_lower: inconsistent blocks C11 " + shape_string(n1, n1) +
                             ", C21 " + shape_string(c21_rows, c21_cols) + ", C22 " +
                             shape_string(n2, n2));
    }
}

}  // namespace

PackedLowerTriangular pack_lower(MatrixView c11, MatrixView c21, MatrixView c22) {
    if (c11.rows() != c11.cols() || c22.rows() != c22.cols()) {
        throw contract_error("pack_lower: diagonal blocks must be square");
    }
    check_block_dims(c11.rows(), c21.rows(), c21.cols(), c22.rows());
    return pack_lower(PackedLowerTriangular::pack(c11), c21, PackedLowerTriangular::pack(c22));
}

PackedLowerTriangular pack_lower(const PackedLowerTriangular& c11, MatrixView c21,
                                 const PackedLowerTriangular& c22) {
    const std::size_t n1 = c11.n();
    const std::size_t n2 = c22.n();
    check_block_dims(n1, c21.rows(), c21.cols(), n2);
    PackedLowerTriangular out(n1 + n2);
    auto dst = out.data();
    // Rows of the (1,1) block are contiguous in both layouts.
    std::copy(c11.data().begin(), c11.data().end(), dst.begin());
    for (std::size_t i = 0; i < n2; ++i) {
        double* row = dst.data() + PackedLowerTriangular::offset(n1 + i, 0);
        std::copy_n(c21.row(i), n1, row);
        std::copy_n(c22.data().data() + PackedLowerTriangular::offset(i, 0), i + 1, row + n1);
    }
    return out;
}

double frobenius_norm(MatrixView a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

double frobenius_norm(const PackedLowerTriangular& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.n(); ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = c.at(i, j);
            s += (i == j ? 1.0 : 2.0) * v * v;
        }
    }
    return std::sqrt(s);
}

double frobenius_distance(const PackedLowerTriangular& a, const PackedLowerTriangular& b) {
    if (a.n() != b.n()) {
        throw contract_error("frobenius_distance: order mismatch " + std::to_string(a.n()) +
                             " vs " + std::to_string(b.n()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.n(); ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double d = a.at(i, j) - b.at(i, j);
            s += (i == j ? 1.0 : 2.0) * d * d;
        }
    }
    return std::sqrt(s);
}

}  // namespace fastata
