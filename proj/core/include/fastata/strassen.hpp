#ifndef FASTATA_STRASSEN_HPP
#define FASTATA_STRASSEN_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "fastata/matrix.hpp"

namespace fastata {

/// Scalar multiplication tally for one call tree. Owned by the caller.
struct MultCounter {
    std::uint64_t scalar_mults = 0;
};

struct HasaConfig {
    std::size_t base_threshold = 32;
    bool count_mults = false;
};

/// Plain triple-loop product (i-k-j order), p*q*r multiplications.
[[nodiscard]] DenseMatrix classical_mult(MatrixView a, MatrixView b,
                                         MultCounter* counter = nullptr);

/// Strassen multiplication for arbitrary p x q times q x r operands.
///
/// Falls back to classical_mult once min(p, q, r) <= base_threshold.
/// Odd dimensions are handled by dynamic peeling: the even core runs
/// through the seven-product recursion and the stripped last column of A /
/// row of B (odd q), last column of C (odd r) and last row of C (odd p) are
/// patched in with classical products.
///
/// `counter` receives scalar multiplications when non-null; it is ignored
/// unless cfg.count_mults is set.
[[nodiscard]] DenseMatrix hasa(MatrixView a, MatrixView b, const HasaConfig& cfg = {},
                               MultCounter* counter = nullptr);

/// Exact number of scalar multiplications `hasa` performs on p x q times q x r.
[[nodiscard]] std::uint64_t strassen_mult_count(std::size_t p, std::size_t q, std::size_t r,
                                                std::size_t base_threshold);

/// One level of the seven-product decomposition, exposed so the parallel
/// runtime can hand individual products to different workers.
namespace strassen_step {

/// True when hasa would take the classical base case for these dimensions.
[[nodiscard]] bool is_base_case(std::size_t p, std::size_t q, std::size_t r,
                                std::size_t base_threshold) noexcept;

struct Operands {
    DenseMatrix left;
    DenseMatrix right;
};

/// Operands of M1..M7 (index 0..6) built from the even core of (a, b).
[[nodiscard]] Operands product_operands(MatrixView a, MatrixView b, int index);

/// Dimensions of each M_i for an operand pair of the given shape.
[[nodiscard]] std::array<std::size_t, 3> product_dims(std::size_t p, std::size_t q,
                                                      std::size_t r) noexcept;

/// Output block (0: D11, 1: D12, 2: D21, 3: D22) each product feeds, with sign.
struct Term {
    int product;  // 0-based M index
    double sign;
};
/// Terms of each D block, in the order they are accumulated.
[[nodiscard]] const std::array<std::vector<Term>, 4>& block_terms();

/// D = [D11 D12; D21 D22] from the seven products, then the peeling fixups
/// against the original operands.
[[nodiscard]] DenseMatrix combine(MatrixView a, MatrixView b,
                                  const std::array<DenseMatrix, 4>& blocks,
                                  MultCounter* counter);

/// Sums the products into the four D blocks following block_terms().
[[nodiscard]] std::array<DenseMatrix, 4> accumulate_blocks(const std::array<DenseMatrix, 7>& m);

}  // namespace strassen_step

}  // namespace fastata

#endif  // FASTATA_STRASSEN_HPP
