#include "fastata/ata.hpp"

#include <algorithm>

namespace fastata {

namespace {

PackedLowerTriangular ata_rec(MatrixView a, const AtaConfig& cfg, MultCounter* counter) {
    if (ata_step::is_base_case(a.rows(), a.cols(), cfg.base_threshold)) {
        return ata_base(a, counter);
    }
    const auto q = split_quadrants(a);
    auto s1 = ata_rec(q.a11, cfg, counter);
    auto s2 = ata_rec(q.a21, cfg, counter);
    auto s3 = ata_rec(q.a12, cfg, counter);
    auto s4 = ata_rec(q.a22, cfg, counter);
    const HasaConfig hcfg{cfg.base_threshold, counter != nullptr};
    auto s5 = hasa(transpose(q.a12), q.a11, hcfg, counter);
    auto s6 = hasa(transpose(q.a22), q.a21, hcfg, counter);
    return ata_step::combine(std::move(s1), s2, std::move(s3), s4, std::move(s5), s6);
}

}  // namespace

PackedLowerTriangular ata(MatrixView a, const AtaConfig& cfg, MultCounter* counter) {
    if (a.empty()) throw contract_error("ata: empty matrix " + shape_string(a.rows(), a.cols()));
    if (cfg.base_threshold == 0) throw contract_error("ata: base_threshold must be >= 1");
    return ata_rec(a, cfg, cfg.count_mults ? counter : nullptr);
}

PackedLowerTriangular ata_base(MatrixView a, MultCounter* counter) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    PackedLowerTriangular c(n);
    auto out = c.data();
    // Row-at-a-time rank-1 updates keep every access contiguous; each entry
    // still accumulates its products in ascending row order.
    for (std::size_t k = 0; k < m; ++k) {
        const double* row = a.row(k);
        for (std::size_t i = 0; i < n; ++i) {
            const double aki = row[i];
            double* ci = out.data() + PackedLowerTriangular::offset(i, 0);
            for (std::size_t j = 0; j <= i; ++j) ci[j] += aki * row[j];
        }
    }
    if (counter != nullptr) counter->scalar_mults += static_cast<std::uint64_t>(m) * n * (n + 1) / 2;
    return c;
}

PackedLowerTriangular classical_ata_oracle(MatrixView a) {
    PackedLowerTriangular c(a.cols());
    for (std::size_t i = 0; i < a.cols(); ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.rows(); ++k) s += a(k, i) * a(k, j);
            c.lower(i, j) = s;
        }
    }
    return c;
}

std::uint64_t expected_mult_count(std::size_t m, std::size_t n, std::size_t base_threshold) {
    if (ata_step::is_base_case(m, n, base_threshold)) {
        return static_cast<std::uint64_t>(m) * n * (n + 1) / 2;
    }
    const auto d = SplitDims::of(m, n);
    return expected_mult_count(d.m1, d.n1, base_threshold) +
           expected_mult_count(d.m2, d.n1, base_threshold) +
           expected_mult_count(d.m1, d.n2, base_threshold) +
           expected_mult_count(d.m2, d.n2, base_threshold) +
           strassen_mult_count(d.n2, d.m1, d.n1, base_threshold) +
           strassen_mult_count(d.n2, d.m2, d.n1, base_threshold);
}

double ata_tolerance(MatrixView a) {
    const double f = frobenius_norm(a);
    return 1e-9 * f * f;
}

namespace ata_step {

bool is_base_case(std::size_t m, std::size_t n, std::size_t base_threshold) noexcept {
    return std::min(m, n) <= base_threshold;
}

PackedLowerTriangular combine(PackedLowerTriangular s1, const PackedLowerTriangular& s2,
                              PackedLowerTriangular s3, const PackedLowerTriangular& s4,
                              DenseMatrix s5, const DenseMatrix& s6) {
    s1 += s2;
    s3 += s4;
    add_in_place(s5, s6);
    return pack_lower(s1, s5, s3);
}

}  // namespace ata_step

}  // namespace fastata
