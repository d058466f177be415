#include "fastata/strassen.hpp"

#include <algorithm>

namespace fastata {

namespace {

void require_inner(MatrixView a, MatrixView b, const char* op) {
    if (a.cols() != b.rows()) {
        throw contract_error(std::string(op) + ": inner dimensions differ, " +
                             shape_string(a.rows(), a.cols()) + " times " +
                             shape_string(b.rows(), b.cols()));
    }
}

std::size_t even(std::size_t x) noexcept { return x & ~std::size_t{1}; }

struct Core {
    MatrixView a11, a12, a21, a22;
    MatrixView b11, b12, b21, b22;
};

Core core_quadrants(MatrixView a, MatrixView b) {
    const std::size_t p = even(a.rows()) / 2;
    const std::size_t q = even(a.cols()) / 2;
    const std::size_t r = even(b.cols()) / 2;
    return {a.block(0, 0, p, q), a.block(0, q, p, q), a.block(p, 0, p, q), a.block(p, q, p, q),
            b.block(0, 0, q, r), b.block(0, r, q, r), b.block(q, 0, q, r), b.block(q, r, q, r)};
}

DenseMatrix hasa_rec(MatrixView a, MatrixView b, std::size_t threshold, MultCounter* counter) {
    if (strassen_step::is_base_case(a.rows(), a.cols(), b.cols(), threshold)) {
        return classical_mult(a, b, counter);
    }
    std::array<DenseMatrix, 7> m;
    for (int i = 0; i < 7; ++i) {
        const auto ops = strassen_step::product_operands(a, b, i);
        m[i] = hasa_rec(ops.left, ops.right, threshold, counter);
    }
    return strassen_step::combine(a, b, strassen_step::accumulate_blocks(m), counter);
}

}  // namespace

DenseMatrix classical_mult(MatrixView a, MatrixView b, MultCounter* counter) {
    require_inner(a, b, "classical_mult");
    const std::size_t p = a.rows();
    const std::size_t q = a.cols();
    const std::size_t r = b.cols();
    DenseMatrix c(p, r);
    for (std::size_t i = 0; i < p; ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (std::size_t k = 0; k < q; ++k) {
            const double aik = ai[k];
            const double* bk = b.row(k);
            for (std::size_t j = 0; j < r; ++j) ci[j] += aik * bk[j];
        }
    }
    if (counter != nullptr) counter->scalar_mults += static_cast<std::uint64_t>(p) * q * r;
    return c;
}

DenseMatrix hasa(MatrixView a, MatrixView b, const HasaConfig& cfg, MultCounter* counter) {
    require_inner(a, b, "hasa");
    if (cfg.base_threshold == 0) throw contract_error("hasa: base_threshold must be >= 1");
    return hasa_rec(a, b, cfg.base_threshold, cfg.count_mults ? counter : nullptr);
}

std::uint64_t strassen_mult_count(std::size_t p, std::size_t q, std::size_t r,
                                  std::size_t base_threshold) {
    if (strassen_step::is_base_case(p, q, r, base_threshold)) {
        return static_cast<std::uint64_t>(p) * q * r;
    }
    const std::uint64_t pe = even(p);
    const std::uint64_t qe = even(q);
    std::uint64_t total = 7 * strassen_mult_count(pe / 2, qe / 2, even(r) / 2, base_threshold);
    if (q % 2 != 0) total += pe * even(r);
    if (r % 2 != 0) total += pe * q;
    if (p % 2 != 0) total += static_cast<std::uint64_t>(q) * r;
    return total;
}

namespace strassen_step {

bool is_base_case(std::size_t p, std::size_t q, std::size_t r,
                  std::size_t base_threshold) noexcept {
    return std::min({p, q, r}) <= base_threshold;
}

std::array<std::size_t, 3> product_dims(std::size_t p, std::size_t q, std::size_t r) noexcept {
    return {even(p) / 2, even(q) / 2, even(r) / 2};
}

Operands product_operands(MatrixView a, MatrixView b, int index) {
    const Core c = core_quadrants(a, b);
    switch (index) {
        case 0: return {add(c.a11, c.a22), add(c.b11, c.b22)};
        case 1: return {add(c.a21, c.a22), DenseMatrix::from_view(c.b11)};
        case 2: return {DenseMatrix::from_view(c.a11), sub(c.b12, c.b22)};
        case 3: return {DenseMatrix::from_view(c.a22), sub(c.b21, c.b11)};
        case 4: return {add(c.a11, c.a12), DenseMatrix::from_view(c.b22)};
        case 5: return {sub(c.a21, c.a11), add(c.b11, c.b12)};
        case 6: return {sub(c.a12, c.a22), add(c.b21, c.b22)};
        default: throw contract_error("strassen product index out of range: " + std::to_string(index));
    }
}

const std::array<std::vector<Term>, 4>& block_terms() {
    // D11 = M1 + M4 - M5 + M7, D12 = M3 + M5, D21 = M2 + M4, D22 = M1 - M2 + M3 + M6
    static const std::array<std::vector<Term>, 4> terms{{
        {{0, 1.0}, {3, 1.0}, {4, -1.0}, {6, 1.0}},
        {{2, 1.0}, {4, 1.0}},
        {{1, 1.0}, {3, 1.0}},
        {{0, 1.0}, {1, -1.0}, {2, 1.0}, {5, 1.0}},
    }};
    return terms;
}

std::array<DenseMatrix, 4> accumulate_blocks(const std::array<DenseMatrix, 7>& m) {
    std::array<DenseMatrix, 4> d;
    for (std::size_t blk = 0; blk < 4; ++blk) {
        const auto& terms = block_terms()[blk];
        DenseMatrix acc = m[terms.front().product];
        for (std::size_t t = 1; t < terms.size(); ++t) {
            const auto& src = m[terms[t].product];
            auto dst = acc.data();
            auto s = src.data();
            if (terms[t].sign > 0) {
                for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += s[k];
            } else {
                for (std::size_t k = 0; k < dst.size(); ++k) dst[k] -= s[k];
            }
        }
        d[blk] = std::move(acc);
    }
    return d;
}

DenseMatrix combine(MatrixView a, MatrixView b, const std::array<DenseMatrix, 4>& blocks,
                    MultCounter* counter) {
    const std::size_t p = a.rows();
    const std::size_t q = a.cols();
    const std::size_t r = b.cols();
    const std::size_t pe = even(p);
    const std::size_t qe = even(q);
    const std::size_t re = even(r);
    const std::size_t ph = pe / 2;
    const std::size_t rh = re / 2;

    DenseMatrix c(p, r);
    for (std::size_t i = 0; i < ph; ++i) {
        std::copy_n(blocks[0].row(i), rh, c.row(i));
        std::copy_n(blocks[1].row(i), rh, c.row(i) + rh);
        std::copy_n(blocks[2].row(i), rh, c.row(ph + i));
        std::copy_n(blocks[3].row(i), rh, c.row(ph + i) + rh);
    }

    if (q != qe) {
        // Rank-1 contribution of the stripped last column of A / row of B.
        const double* bq = b.row(q - 1);
        for (std::size_t i = 0; i < pe; ++i) {
            const double aiq = a(i, q - 1);
            double* ci = c.row(i);
            for (std::size_t j = 0; j < re; ++j) ci[j] += aiq * bq[j];
        }
        if (counter != nullptr) counter->scalar_mults += static_cast<std::uint64_t>(pe) * re;
    }
    if (r != re) {
        const auto col = classical_mult(a.block(0, 0, pe, q), b.block(0, r - 1, q, 1), counter);
        for (std::size_t i = 0; i < pe; ++i) c(i, r - 1) = col(i, 0);
    }
    if (p != pe) {
        const auto row = classical_mult(a.block(p - 1, 0, 1, q), b, counter);
        std::copy_n(row.row(0), r, c.row(p - 1));
    }
    return c;
}

}  // namespace strassen_step

}  // namespace fastata
