#include "fastata/scheduler.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

#include "fastata/matrix.hpp"
#include "fastata/strassen.hpp"

namespace fastata {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out)) throw contract_error("npl: 64-bit overflow");
    return out;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t out = 0;
    if (__builtin_add_overflow(a, b, &out)) throw contract_error("npl: 64-bit overflow");
    return out;
}

std::uint64_t ipow(std::uint64_t base, int exp) {
    std::uint64_t out = 1;
    for (int i = 0; i < exp; ++i) out = checked_mul(out, base);
    return out;
}

class TreeBuilder {
  public:
    TreeBuilder(TaskTree& tree, int max_level) : tree_(tree), lm_(max_level) {}

    std::size_t add_node(std::size_t parent, NodeKind kind, int level, Rank begin, Rank end,
                         std::array<std::size_t, 3> dims) {
        TaskNode node;
        node.id = tree_.nodes.size();
        node.parent = parent;
        node.depth = parent == TaskNode::npos ? 0 : tree_.nodes[parent].depth + 1;
        node.kind = kind;
        node.level = level;
        node.father = begin;
        node.rank_begin = begin;
        node.rank_end = end;
        node.dims = dims;
        tree_.nodes.push_back(node);
        if (parent != TaskNode::npos) tree_.nodes[parent].children.push_back(node.id);
        if (level > 0) expand(node.id);
        return node.id;
    }

  private:
    void expand(std::size_t id) {
        // Copy out: add_node may reallocate tree_.nodes.
        const TaskNode node = tree_.nodes[id];
        auto ids = build_ids(node.kind, node.father, node.level, lm_);
        tree_.nodes[id].ids = ids;
        const int child_level = node.level < lm_ ? node.level + 1 : 0;
        const auto end_of = [&](std::size_t i) {
            return i + 1 < ids.size() ? ids[i + 1] : node.rank_end;
        };
        if (node.kind == NodeKind::ata) {
            const auto d = SplitDims::of(node.dims[0], node.dims[1]);
            const std::array<std::array<std::size_t, 3>, 6> child_dims{{
                {d.m1, d.n1, 0},
                {d.m2, d.n1, 0},
                {d.m1, d.n2, 0},
                {d.m2, d.n2, 0},
                {d.n2, d.m1, d.n1},
                {d.n2, d.m2, d.n1},
            }};
            for (std::size_t i = 0; i < 6; ++i) {
                add_node(id, i < 4 ? NodeKind::ata : NodeKind::hasa, child_level, ids[i], end_of(i),
                         child_dims[i]);
            }
        } else {
            const auto pd = strassen_step::product_dims(node.dims[0], node.dims[1], node.dims[2]);
            for (std::size_t i = 0; i < 7; ++i) {
                add_node(id, NodeKind::hasa, child_level, ids[i], end_of(i), pd);
            }
        }
    }

    TaskTree& tree_;
    int lm_;
};

void assign_helpers(TaskTree& tree, std::uint64_t processes) {
    std::vector<std::size_t> leaves;
    for (const auto& node : tree.nodes)
        if (node.is_leaf()) leaves.push_back(node.id);
    std::ranges::sort(leaves, {}, [&](std::size_t id) { return tree.nodes[id].father; });

    const std::uint64_t base = npl(tree.lmax);
    const std::uint64_t k = leftover_k(processes, tree.lmax);
    auto next = static_cast<Rank>(base);
    for (std::uint64_t round = 0; round < k; ++round)
        for (auto id : leaves) tree.nodes[id].helpers.push_back(next++);

    const std::uint64_t extra = processes - (k + 1) * base;
    auto order = leaves;
    std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
        const auto& x = tree.nodes[a];
        const auto& y = tree.nodes[b];
        if (x.kind != y.kind) return x.kind == NodeKind::hasa;
        if (x.problem_size() != y.problem_size()) return x.problem_size() > y.problem_size();
        return x.father < y.father;
    });
    for (std::uint64_t i = 0; i < extra; ++i) tree.nodes[order[i]].helpers.push_back(next++);
}

nlohmann::json node_json(const TaskTree& tree, const TaskNode& node) {
    nlohmann::json j;
    j["id"] = node.id;
    j["kind"] = to_string(node.kind);
    j["level"] = node.level;
    j["father"] = node.father;
    j["ranks"] = {node.rank_begin, node.rank_end};
    if (node.kind == NodeKind::ata) {
        j["dims"] = {node.dims[0], node.dims[1]};
    } else {
        j["dims"] = {node.dims[0], node.dims[1], node.dims[2]};
    }
    if (!node.ids.empty()) j["ids"] = node.ids;
    if (!node.helpers.empty()) j["helpers"] = node.helpers;
    if (!node.children.empty()) {
        auto& kids = j["children"] = nlohmann::json::array();
        for (auto c : node.children) kids.push_back(node_json(tree, tree.nodes[c]));
    }
    return j;
}

}  // namespace

const char* to_string(NodeKind kind) noexcept {
    return kind == NodeKind::ata ? "ATA" : "HASA";
}

std::uint64_t npl(int level) {
    if (level < 0) throw contract_error("npl: negative level");
    if (level == 0) return 1;
    if (level == 1) return 6;
    std::uint64_t total = checked_mul(6, ipow(4, level - 1));
    for (int k = 0; k <= level - 2; ++k) {
        total = checked_add(total, checked_mul(2, checked_mul(ipow(4, k), ipow(7, level - 1 - k))));
    }
    return total;
}

int lmax(std::uint64_t processes) {
    if (processes < 1) throw contract_error("lmax: need at least one process");
    int level = 0;
    // npl grows roughly 7x per level; 64-bit values run out near level 22.
    while (level < 21 && npl(level + 1) <= processes) ++level;
    return level;
}

std::uint64_t leftover_k(std::uint64_t processes, int max_level) {
    const std::uint64_t base = npl(max_level);
    if (processes < base) throw contract_error("leftover_k: processes below npl(max_level)");
    return (processes - base) / base;
}

std::vector<Rank> build_ids(NodeKind kind, Rank father, int level, int max_level) {
    if (level < 1 || level > max_level) {
        throw contract_error("build_ids: level " + std::to_string(level) + " outside 1.." +
                             std::to_string(max_level));
    }
    const int x = max_level - level;
    const auto seven = static_cast<Rank>(ipow(7, x));
    std::vector<Rank> ids;
    if (kind == NodeKind::ata) {
        const auto step = static_cast<Rank>(npl(x));
        for (Rank i = 0; i < 5; ++i) ids.push_back(father + i * step);
        ids.push_back(father + 4 * step + seven);
    } else {
        for (Rank i = 0; i < 7; ++i) ids.push_back(father + i * seven);
    }
    return ids;
}

std::uint64_t TaskNode::problem_size() const noexcept {
    if (kind == NodeKind::ata) return static_cast<std::uint64_t>(dims[0]) * dims[1];
    return static_cast<std::uint64_t>(dims[0]) * dims[1] +
           static_cast<std::uint64_t>(dims[1]) * dims[2];
}

std::vector<Rank> TaskTree::working_ranks() const {
    std::vector<Rank> out;
    for (const auto& node : nodes) {
        if (!node.is_leaf()) continue;
        out.push_back(node.father);
        out.insert(out.end(), node.helpers.begin(), node.helpers.end());
    }
    return out;
}

TaskTree build_tree(std::uint64_t processes, std::size_t m, std::size_t n) {
    if (processes < 1) throw contract_error("build_tree: need at least one process");
    TaskTree tree;
    tree.total_ranks = processes;
    tree.lmax = lmax(processes);
    const std::uint64_t base = npl(tree.lmax);
    tree.lefties = processes - base;
    TreeBuilder builder(tree, tree.lmax);
    builder.add_node(TaskNode::npos, NodeKind::ata, tree.lmax > 0 ? 1 : 0, 0,
                     static_cast<Rank>(base), {m, n, 0});
    if (tree.lefties > 0) assign_helpers(tree, processes);
    return tree;
}

std::string tree_to_json(const TaskTree& tree) {
    nlohmann::json j;
    j["total_ranks"] = tree.total_ranks;
    j["lmax"] = tree.lmax;
    j["lefties"] = tree.lefties;
    j["root"] = node_json(tree, tree.root());
    return j.dump(2);
}

}  // namespace fastata
