#ifndef FASTATA_SCHEDULER_HPP
#define FASTATA_SCHEDULER_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fastata/matrix.hpp"

namespace fastata {

using Rank = int;

enum class NodeKind { ata, hasa };

[[nodiscard]] const char* to_string(NodeKind kind) noexcept;

/// Ranks needed for `level` complete parallel levels:
/// npl(0) = 1, npl(1) = 6, npl(l) = 6*4^(l-1) + 2*sum_{k=0}^{l-2} 4^k 7^(l-1-k).
/// Throws contract_error if the value does not fit in 64 bits.
[[nodiscard]] std::uint64_t npl(int level);

/// Largest l with npl(l) <= processes. Requires processes >= 1.
[[nodiscard]] int lmax(std::uint64_t processes);

/// Number of spare ranks each last-level rank receives when
/// npl(max_level) < processes: floor((processes - npl) / npl).
[[nodiscard]] std::uint64_t leftover_k(std::uint64_t processes, int max_level);

/// Rank layout of the recursive calls of one parallel node at `level`.
/// ATA:  ids_i = father + i*npl(x) for i < 5, ids_5 = father + 4*npl(x) + 7^x
/// HASA: ids_i = father + i*7^x for i < 7
/// with x = max_level - level. Requires 1 <= level <= max_level.
[[nodiscard]] std::vector<Rank> build_ids(NodeKind kind, Rank father, int level, int max_level);

/// One recursive call in the process tree.
///
/// Parallel nodes (level >= 1) own `ids` and have one child per recursive
/// call; leaves (level 0) are executed sequentially by `father`, possibly
/// with `helpers` from the incomplete level.
struct TaskNode {
    std::size_t id = 0;  // preorder index into TaskTree::nodes
    std::size_t parent = npos;
    int depth = 0;  // distance from the root
    NodeKind kind = NodeKind::ata;
    int level = 0;
    Rank father = 0;
    Rank rank_begin = 0;  // [rank_begin, rank_end) is the node's interval
    Rank rank_end = 1;
    std::vector<Rank> ids;
    /// ATA: {m, n, 0}; HASA: {p, q, r} for a p x q times q x r product.
    std::array<std::size_t, 3> dims{};
    std::vector<Rank> helpers;
    std::vector<std::size_t> children;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    [[nodiscard]] bool is_leaf() const noexcept { return children.empty(); }
    /// Input footprint used to rank leaves for spare helpers:
    /// m*n for ATA, p*q + q*r for HASA.
    [[nodiscard]] std::uint64_t problem_size() const noexcept;
};

struct TaskTree {
    std::vector<TaskNode> nodes;  // nodes[0] is the root
    std::uint64_t total_ranks = 1;
    int lmax = 0;
    std::uint64_t lefties = 0;

    [[nodiscard]] const TaskNode& root() const { return nodes.front(); }
    [[nodiscard]] const TaskNode& node(std::size_t id) const { return nodes.at(id); }
    /// Ranks that execute a sequential leaf or help one, in tree order.
    [[nodiscard]] std::vector<Rank> working_ranks() const;
};

/// Process tree for `processes` ranks on an m x n input.
///
/// Complete levels 1..lmax are laid out with build_ids; child dimensions
/// follow the quadrant split (ATA) and the even-core halving (HASA).
/// Leftover ranks become helpers of the last-level leaves: k to each, then
/// one each in priority order (HASA leaves first, then larger problem_size,
/// then lower rank). processes < 6 gives a single level-0 root whose spare
/// ranks all help it.
[[nodiscard]] TaskTree build_tree(std::uint64_t processes, std::size_t m, std::size_t n);

/// Indented JSON rendering of the tree (kind, level, ranks, dims, helpers, children).
[[nodiscard]] std::string tree_to_json(const TaskTree& tree);

}  // namespace fastata

#endif  // FASTATA_SCHEDULER_HPP
