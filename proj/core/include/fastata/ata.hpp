#ifndef FASTATA_ATA_HPP
#define FASTATA_ATA_HPP

#include <cstddef>
#include <cstdint>

#include "fastata/matrix.hpp"
#include "fastata/strassen.hpp"

namespace fastata {

struct AtaConfig {
    /// Recursion stops once min(rows, cols) <= base_threshold.
    std::size_t base_threshold = 32;
    bool count_mults = false;

    [[nodiscard]] HasaConfig hasa() const noexcept { return {base_threshold, count_mults}; }
};

/// Lower triangle of A^t A by the cache-oblivious recursion
///
///     C11 = ata(A11) + ata(A21)
///     C22 = ata(A12) + ata(A22)
///     C21 = hasa(A12^t, A11) + hasa(A22^t, A21)
///
/// with C12 = C21^t never formed. Throws contract_error on an empty matrix.
[[nodiscard]] PackedLowerTriangular ata(MatrixView a, const AtaConfig& cfg = {},
                                        MultCounter* counter = nullptr);

/// Classical lower-triangle Gram product, m * n(n+1)/2 multiplications.
[[nodiscard]] PackedLowerTriangular ata_base(MatrixView a, MultCounter* counter = nullptr);

/// Reference triple loop, one dot product per lower entry. Test and --check use only.
[[nodiscard]] PackedLowerTriangular classical_ata_oracle(MatrixView a);

/// Exact scalar multiplications `ata` performs for an m x n input.
[[nodiscard]] std::uint64_t expected_mult_count(std::size_t m, std::size_t n,
                                                std::size_t base_threshold);

/// Acceptance tolerance for Gram products: 1e-9 * ||A||_F^2.
[[nodiscard]] double ata_tolerance(MatrixView a);

namespace ata_step {

[[nodiscard]] bool is_base_case(std::size_t m, std::size_t n,
                                std::size_t base_threshold) noexcept;

/// S1..S4 are Gram products of A11, A21, A12, A22; S5, S6 the two
/// off-diagonal products. Result assembled exactly as the serial recursion does.
[[nodiscard]] PackedLowerTriangular combine(PackedLowerTriangular s1,
                                            const PackedLowerTriangular& s2,
                                            PackedLowerTriangular s3,
                                            const PackedLowerTriangular& s4, DenseMatrix s5,
                                            const DenseMatrix& s6);

}  // namespace ata_step

}  // namespace fastata

#endif  // FASTATA_ATA_HPP
