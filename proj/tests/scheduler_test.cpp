#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>

#include "fastata/scheduler.hpp"

using fastata::NodeKind;
using fastata::Rank;
using fastata::TaskTree;

namespace {

std::uint64_t pow_u64(std::uint64_t b, int e) {
    std::uint64_t r = 1;
    while (e-- > 0) r *= b;
    return r;
}

const fastata::TaskNode& leaf_of(const TaskTree& tree, Rank father) {
    for (const auto& node : tree.nodes)
        if (node.is_leaf() && node.father == father && node.level == 0) return node;
    throw std::runtime_error("no leaf for rank " + std::to_string(father));
}

}  // namespace

TEST(Npl, CompleteLevelSizes) {
    EXPECT_EQ(fastata::npl(0), 1u);
    EXPECT_EQ(fastata::npl(1), 6u);
    EXPECT_EQ(fastata::npl(2), 38u);
    EXPECT_EQ(fastata::npl(3), 250u);
    EXPECT_EQ(fastata::npl(4), 1686u);
    EXPECT_EQ(fastata::npl(5), 11546u);
}

TEST(Npl, StrictlyIncreasingAndMatchesTreeCount) {
    for (int l = 1; l <= 8; ++l) EXPECT_LT(fastata::npl(l - 1), fastata::npl(l));
    for (int l = 2; l <= 8; ++l)
        EXPECT_EQ(fastata::npl(l), 4 * fastata::npl(l - 1) + 2 * pow_u64(7, l - 1)) << l;
}

TEST(Npl, OverflowThrows) {
    EXPECT_THROW((void)fastata::npl(40), fastata::contract_error);
    EXPECT_THROW((void)fastata::npl(-1), fastata::contract_error);
}

TEST(Lmax, Examples) {
    EXPECT_EQ(fastata::lmax(1), 0);
    EXPECT_EQ(fastata::lmax(5), 0);
    EXPECT_EQ(fastata::lmax(6), 1);
    EXPECT_EQ(fastata::lmax(15), 1);
    EXPECT_EQ(fastata::lmax(37), 1);
    EXPECT_EQ(fastata::lmax(38), 2);
    EXPECT_EQ(fastata::lmax(250), 3);
}

TEST(Lmax, LogarithmicBound) {
    for (std::uint64_t p = 1; p <= 1000000; ++p) {
        const double bound = std::log(static_cast<double>(p)) / std::log(7.0) + 1.0;
        ASSERT_LT(fastata::lmax(p), bound) << p;
    }
}

TEST(LeftoverK, Examples) {
    EXPECT_EQ(fastata::leftover_k(15, 1), 1u);
    EXPECT_EQ(fastata::leftover_k(38, 2), 0u);
    EXPECT_EQ(fastata::leftover_k(18, 1), 2u);
    EXPECT_EQ(fastata::leftover_k(6, 1), 0u);
}

TEST(BuildIds, Examples) {
    EXPECT_EQ(fastata::build_ids(NodeKind::ata, 0, 1, 2), (std::vector<Rank>{0, 6, 12, 18, 24, 31}));
    EXPECT_EQ(fastata::build_ids(NodeKind::ata, 0, 1, 1), (std::vector<Rank>{0, 1, 2, 3, 4, 5}));
    EXPECT_EQ(fastata::build_ids(NodeKind::hasa, 24, 2, 2), (std::vector<Rank>{24, 25, 26, 27, 28, 29, 30}));
    EXPECT_EQ(fastata::build_ids(NodeKind::hasa, 24, 1, 2), (std::vector<Rank>{24, 31, 38, 45, 52, 59, 66}));
}

TEST(BuildTree, EveryRankUsedExactlyOnce) {
    for (std::uint64_t p = 1; p <= 400; ++p) {
        const auto tree = fastata::build_tree(p, 1000, 1000);
        auto ranks = tree.working_ranks();
        std::ranges::sort(ranks);
        std::vector<Rank> expect(p);
        std::iota(expect.begin(), expect.end(), 0);
        ASSERT_EQ(ranks, expect) << "P=" << p;
    }
}

TEST(BuildTree, CompleteLevelsHaveNoHelpers) {
    for (int l = 0; l <= 3; ++l) {
        const auto p = fastata::npl(l);
        const auto tree = fastata::build_tree(p, 1000, 1000);
        EXPECT_EQ(tree.lmax, l);
        EXPECT_EQ(tree.lefties, 0u);
        std::uint64_t leaves = 0;
        for (const auto& node : tree.nodes) {
            EXPECT_TRUE(node.helpers.empty());
            if (node.is_leaf()) {
                ++leaves;
                EXPECT_EQ(node.level, 0);
            } else {
                EXPECT_EQ(node.children.size(), node.kind == NodeKind::ata ? 6u : 7u);
            }
        }
        EXPECT_EQ(leaves, p);
    }
}

TEST(BuildTree, ThirtyEightRanksTwoLevels) {
    const auto tree = fastata::build_tree(38, 512, 512);
    const auto& root = tree.root();
    ASSERT_EQ(root.children.size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) {
        const auto& child = tree.node(root.children[i]);
        EXPECT_EQ(child.kind, i < 4 ? NodeKind::ata : NodeKind::hasa);
        EXPECT_EQ(child.ids.size(), i < 4 ? 6u : 7u);
        EXPECT_EQ(child.father, root.ids[i]);
    }
    EXPECT_EQ(tree.node(root.children[0]).dims, (std::array<std::size_t, 3>{256, 256, 0}));
    EXPECT_EQ(tree.node(root.children[4]).dims, (std::array<std::size_t, 3>{256, 256, 256}));
}

TEST(BuildTree, SixRanksOneLevel) {
    const auto tree = fastata::build_tree(6, 100, 37);
    EXPECT_EQ(tree.lmax, 1);
    EXPECT_EQ(tree.root().ids, (std::vector<Rank>{0, 1, 2, 3, 4, 5}));
    const auto& c21 = tree.node(tree.root().children[4]);
    EXPECT_EQ(c21.kind, NodeKind::hasa);
    EXPECT_EQ(c21.dims, (std::array<std::size_t, 3>{18, 50, 19}));
}

TEST(BuildTree, FifteenRanksHelperDistribution) {
    const auto tree = fastata::build_tree(15, 1000, 1000);
    EXPECT_EQ(tree.lmax, 1);
    EXPECT_EQ(tree.lefties, 9u);
    EXPECT_EQ(leaf_of(tree, 0).helpers, (std::vector<Rank>{6, 14}));
    EXPECT_EQ(leaf_of(tree, 1).helpers, (std::vector<Rank>{7}));
    EXPECT_EQ(leaf_of(tree, 2).helpers, (std::vector<Rank>{8}));
    EXPECT_EQ(leaf_of(tree, 3).helpers, (std::vector<Rank>{9}));
    EXPECT_EQ(leaf_of(tree, 4).helpers, (std::vector<Rank>{10, 12}));
    EXPECT_EQ(leaf_of(tree, 5).helpers, (std::vector<Rank>{11, 13}));
}

TEST(BuildTree, EighteenRanksTwoHelpersEach) {
    const auto tree = fastata::build_tree(18, 64, 64);
    for (Rank r = 0; r < 6; ++r) EXPECT_EQ(leaf_of(tree, r).helpers.size(), 2u);
}

TEST(BuildTree, FewerThanSixRanksIsSequentialRoot) {
    const auto tree = fastata::build_tree(4, 10, 10);
    ASSERT_EQ(tree.nodes.size(), 1u);
    EXPECT_EQ(tree.root().level, 0);
    EXPECT_EQ(tree.root().helpers, (std::vector<Rank>{1, 2, 3}));
}

TEST(BuildTree, Deterministic) {
    for (std::uint64_t p : {15u, 77u, 300u}) {
        EXPECT_EQ(fastata::tree_to_json(fastata::build_tree(p, 999, 731)),
                  fastata::tree_to_json(fastata::build_tree(p, 999, 731)));
    }
}

TEST(BuildTree, JsonDumpListsNodes) {
    const auto j = nlohmann::json::parse(fastata::tree_to_json(fastata::build_tree(6, 8, 8)));
    EXPECT_EQ(j["lmax"], 1);
    EXPECT_EQ(j["root"]["kind"], "ATA");
    ASSERT_EQ(j["root"]["children"].size(), 6u);
    EXPECT_EQ(j["root"]["children"][5]["kind"], "HASA");
    EXPECT_EQ(j["root"]["children"][5]["father"], 5);
}
