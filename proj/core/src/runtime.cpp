#include <algorithm>
#include <numeric>
#include <thread>
#include <variant>

#include "fastata/runtime.hpp"

namespace fastata {

namespace {

using Clock = std::chrono::steady_clock;
using Inputs = std::vector<DenseMatrix>;  // ATA: {A}; HASA: {left, right}
using NodeOutput = std::variant<PackedLowerTriangular, DenseMatrix>;

DenseMatrix as_payload(NodeOutput out) {
    if (auto* p = std::get_if<PackedLowerTriangular>(&out)) {
        const std::size_t len = p->data().size();
        return {1, len, std::move(*p).take_data()};
    }
    return std::get<DenseMatrix>(std::move(out));
}

PackedLowerTriangular as_packed(DenseMatrix m, std::size_t n) {
    return {n, std::move(m).take_data()};
}

DenseMatrix negated(DenseMatrix m) {
    for (double& v : m.data()) v = -v;
    return m;
}

/// Reduction groups of a parallel node, as indices into its ids array.
struct BlockGroup {
    std::vector<int> members;
    std::vector<double> signs;
};

const std::vector<BlockGroup>& block_groups(NodeKind kind) {
    // ATA: C11 <- {ids0, ids1}, C22 <- {ids2, ids3}, C21 <- {ids4, ids5}
    static const std::vector<BlockGroup> ata_groups{
        {{0, 1}, {1.0, 1.0}}, {{2, 3}, {1.0, 1.0}}, {{4, 5}, {1.0, 1.0}}};
    static const std::vector<BlockGroup> hasa_groups = [] {
        std::vector<BlockGroup> g;
        for (const auto& terms : strassen_step::block_terms()) {
            BlockGroup bg;
            for (const auto& t : terms) {
                bg.members.push_back(t.product);
                bg.signs.push_back(t.sign);
            }
            g.push_back(std::move(bg));
        }
        return g;
    }();
    return kind == NodeKind::ata ? ata_groups : hasa_groups;
}

bool node_is_base(const TaskNode& node, std::size_t threshold) {
    if (node.kind == NodeKind::ata) return ata_step::is_base_case(node.dims[0], node.dims[1], threshold);
    return strassen_step::is_base_case(node.dims[0], node.dims[1], node.dims[2], threshold);
}

/// Input of recursive call `index` of a node, derived from the node's input.
Inputs derive(const TaskNode& node, const Inputs& in, std::size_t index) {
    if (node.kind == NodeKind::hasa) {
        auto ops = strassen_step::product_operands(in[0], in[1], static_cast<int>(index));
        Inputs out;
        out.push_back(std::move(ops.left));
        out.push_back(std::move(ops.right));
        return out;
    }
    const auto q = split_quadrants(in[0]);
    Inputs out;
    switch (index) {
        case 0: out.push_back(DenseMatrix::from_view(q.a11)); break;
        case 1: out.push_back(DenseMatrix::from_view(q.a21)); break;
        case 2: out.push_back(DenseMatrix::from_view(q.a12)); break;
        case 3: out.push_back(DenseMatrix::from_view(q.a22)); break;
        case 4:
            out.push_back(transpose(q.a12));
            out.push_back(DenseMatrix::from_view(q.a11));
            break;
        default:
            out.push_back(transpose(q.a22));
            out.push_back(DenseMatrix::from_view(q.a21));
            break;
    }
    return out;
}

/// Recursive-call indices of a leaf in helper priority order: the HASA calls
/// first, then larger sub-problems, ties by call index.
std::vector<std::size_t> call_priority(const TaskNode& node) {
    if (node.kind == NodeKind::hasa) return {0, 1, 2, 3, 4, 5, 6};
    const auto d = SplitDims::of(node.dims[0], node.dims[1]);
    const std::array<std::uint64_t, 4> size{d.m1 * d.n1, d.m2 * d.n1, d.m1 * d.n2, d.m2 * d.n2};
    std::vector<std::size_t> ata_calls{0, 1, 2, 3};
    std::ranges::stable_sort(ata_calls, std::greater<>{}, [&](std::size_t i) { return size[i]; });
    std::vector<std::size_t> out{4, 5};
    out.insert(out.end(), ata_calls.begin(), ata_calls.end());
    return out;
}

struct LeafSplit {
    std::vector<Rank> team;                        // host first, then helpers
    std::vector<std::vector<std::size_t>> calls;  // per team member, in priority order
};

struct Plan {
    const TaskTree& tree;
    std::size_t threshold;
    std::vector<char> active;
    std::vector<char> expanded;
    std::vector<std::optional<std::size_t>> entry;     // rank -> node it is first father of
    std::vector<std::optional<std::size_t>> helps;     // helper rank -> leaf node
    std::vector<std::optional<LeafSplit>> leaf_split;  // node -> helper layout

    Plan(const TaskTree& t, std::size_t thr)
        : tree(t),
          threshold(thr),
          active(t.nodes.size(), 0),
          expanded(t.nodes.size(), 0),
          entry(t.total_ranks),
          helps(t.total_ranks),
          leaf_split(t.nodes.size()) {
        // Preorder: parents precede children.
        for (const auto& node : t.nodes) {
            const bool is_active =
                node.parent == TaskNode::npos || expanded[node.parent] != 0;
            if (!is_active) continue;
            active[node.id] = 1;
            const bool base = node_is_base(node, threshold);
            expanded[node.id] = (!node.is_leaf() && !base) ? 1 : 0;
            const auto f = static_cast<std::size_t>(node.father);
            if (!entry[f]) entry[f] = node.id;
            if (node.is_leaf() && !base && !node.helpers.empty()) {
                LeafSplit split;
                split.team.push_back(node.father);
                split.team.insert(split.team.end(), node.helpers.begin(), node.helpers.end());
                split.calls.resize(split.team.size());
                const auto order = call_priority(node);
                for (std::size_t j = 0; j < order.size(); ++j)
                    split.calls[j % split.team.size()].push_back(order[j]);
                for (std::size_t h = 1; h < split.team.size(); ++h)
                    if (!split.calls[h].empty()) helps[static_cast<std::size_t>(split.team[h])] = node.id;
                leaf_split[node.id] = std::move(split);
            }
        }
    }

    [[nodiscard]] int index_in_parent(const TaskNode& node) const {
        const auto& parent = tree.nodes[node.parent];
        const auto it = std::ranges::find(parent.children, node.id);
        return static_cast<int>(it - parent.children.begin());
    }
};

NodeOutput compute_call(const TaskNode& node, std::size_t call, const Inputs& in,
                        const AtaConfig& cfg, MultCounter* counter) {
    if (node.kind == NodeKind::ata && call < 4) return ata(in[0], cfg, counter);
    return hasa(in[0], in[1], cfg.hasa(), counter);
}

NodeOutput combine_calls(const TaskNode& node, const Inputs& in, std::vector<NodeOutput> s,
                         MultCounter* counter) {
    if (node.kind == NodeKind::ata) {
        return ata_step::combine(std::get<PackedLowerTriangular>(std::move(s[0])),
                                 std::get<PackedLowerTriangular>(s[1]),
                                 std::get<PackedLowerTriangular>(std::move(s[2])),
                                 std::get<PackedLowerTriangular>(s[3]),
                                 std::get<DenseMatrix>(std::move(s[4])), std::get<DenseMatrix>(s[5]));
    }
    std::array<DenseMatrix, 7> m;
    for (std::size_t i = 0; i < 7; ++i) m[i] = std::get<DenseMatrix>(std::move(s[i]));
    return strassen_step::combine(in[0], in[1], strassen_step::accumulate_blocks(m), counter);
}

/// Sizes needed to turn a flat payload back into a packed block.
std::size_t packed_order(const TaskNode& node, std::size_t call) {
    const auto d = SplitDims::of(node.dims[0], node.dims[1]);
    return call < 2 ? d.n1 : d.n2;
}

class Worker {
  public:
    Worker(Rank self, const Plan& plan, Communicator& comm, const AtaConfig& cfg)
        : self_(self), plan_(plan), comm_(comm), cfg_(cfg) {}

    NodeOutput run_node(std::size_t id, const Inputs& in) {
        const TaskNode& node = plan_.tree.nodes[id];
        current_node_ = id;
        if (plan_.expanded[id] == 0) return compute_leaf(node, in);
        const auto first = derive(node, in, 0);
        auto s0 = run_node(node.children[0], first);
        current_node_ = id;
        auto blocks = participate(node, 0, std::move(s0));
        if (node.kind == NodeKind::ata) {
            const auto d = SplitDims::of(node.dims[0], node.dims[1]);
            return pack_lower(as_packed(std::move(blocks[0]), d.n1), blocks[2],
                              as_packed(std::move(blocks[1]), d.n2));
        }
        std::array<DenseMatrix, 4> d;
        std::ranges::move(blocks, d.begin());
        return strassen_step::combine(in[0], in[1], d, counter());
    }

    /// Joins the reductions of `node` as member `index`. Only ids_0 gets the
    /// assembled blocks back.
    std::vector<DenseMatrix> participate(const TaskNode& node, int index, NodeOutput mine) {
        current_node_ = node.id;
        const auto& groups = block_groups(node.kind);
        const WorkerGroup world{node.ids};
        comm_.barrier(world, self_, tag(node, MessageKind::send, -1));

        DenseMatrix payload = as_payload(std::move(mine));
        std::vector<DenseMatrix> blocks(groups.size());
        for (std::size_t b = 0; b < groups.size(); ++b) {
            const auto& g = groups[b];
            const auto pos = std::ranges::find(g.members, index);
            if (pos == g.members.end()) continue;
            const double sign = g.signs[static_cast<std::size_t>(pos - g.members.begin())];
            WorkerGroup wg;
            for (int m : g.members) wg.members.push_back(node.ids[static_cast<std::size_t>(m)]);
            auto reduced = comm_.reduce_sum(wg, self_, tag(node, MessageKind::reduce, static_cast<int>(b)),
                                            sign > 0 ? payload : negated(payload));
            if (!reduced) continue;
            if (index == 0) {
                blocks[b] = std::move(*reduced);
            } else {
                Communicator::Payload p;
                p.push_back(std::move(*reduced));
                comm_.send(self_, node.ids[0], tag(node, MessageKind::send, static_cast<int>(b)),
                           std::move(p));
            }
        }
        if (index != 0) return {};

        // Blocks rooted elsewhere arrive from their roots, lowest sender first.
        std::vector<std::pair<Rank, std::size_t>> pending;
        for (std::size_t b = 0; b < groups.size(); ++b) {
            const Rank root = node.ids[static_cast<std::size_t>(groups[b].members.front())];
            if (root != self_) pending.emplace_back(root, b);
        }
        std::ranges::sort(pending);
        for (const auto& [root, b] : pending) {
            auto p = comm_.recv(self_, root, tag(node, MessageKind::send, static_cast<int>(b)));
            blocks[b] = std::move(p.at(0));
        }
        return blocks;
    }

    void help(std::size_t id) {
        const TaskNode& node = plan_.tree.nodes[id];
        current_node_ = id;
        const auto& split = *plan_.leaf_split[id];
        const auto me = static_cast<std::size_t>(std::ranges::find(split.team, self_) - split.team.begin());
        auto operands = comm_.recv(self_, 0, tag(node, MessageKind::distribute, 0));
        start_clock();
        Communicator::Payload results;
        std::size_t cursor = 0;
        for (auto call : split.calls[me]) {
            Inputs in;
            const std::size_t count = (node.kind == NodeKind::ata && call < 4) ? 1 : 2;
            for (std::size_t k = 0; k < count; ++k) in.push_back(std::move(operands.at(cursor++)));
            results.push_back(as_payload(compute_call(node, call, in, cfg_, counter())));
        }
        comm_.send(self_, node.father, tag(node, MessageKind::helper, 0), std::move(results));
    }

    void start_clock() { started_ = Clock::now(); }
    [[nodiscard]] double busy_seconds() const {
        return std::chrono::duration<double>(Clock::now() - started_).count();
    }
    [[nodiscard]] std::size_t current_node() const noexcept { return current_node_; }
    [[nodiscard]] std::uint64_t mults() const noexcept { return mults_.scalar_mults; }

  private:
    MultCounter* counter() { return cfg_.count_mults ? &mults_ : nullptr; }

    [[nodiscard]] static MessageTag tag(const TaskNode& node, MessageKind kind, int block) {
        return {node.id, node.depth, kind, block};
    }

    NodeOutput compute_leaf(const TaskNode& node, const Inputs& in) {
        const auto& split = plan_.leaf_split[node.id];
        if (!split) {
            if (node.kind == NodeKind::ata) return ata(in[0], cfg_, counter());
            return hasa(in[0], in[1], cfg_.hasa(), counter());
        }
        const std::size_t ncalls = node.kind == NodeKind::ata ? 6 : 7;
        std::vector<NodeOutput> s(ncalls);
        for (auto call : split->calls[0]) {
            s[call] = compute_call(node, call, derive(node, in, call), cfg_, counter());
        }
        for (std::size_t h = 1; h < split->team.size(); ++h) {
            if (split->calls[h].empty()) continue;
            auto p = comm_.recv(self_, split->team[h], tag(node, MessageKind::helper, 0));
            for (std::size_t k = 0; k < split->calls[h].size(); ++k) {
                const auto call = split->calls[h][k];
                if (node.kind == NodeKind::ata && call < 4) {
                    s[call] = as_packed(std::move(p.at(k)), packed_order(node, call));
                } else {
                    s[call] = std::move(p.at(k));
                }
            }
        }
        return combine_calls(node, in, std::move(s), counter());
    }

    Rank self_;
    const Plan& plan_;
    Communicator& comm_;
    const AtaConfig& cfg_;
    MultCounter mults_;
    Clock::time_point started_ = Clock::now();
    std::size_t current_node_ = 0;
};

/// Walks the active tree top-down and posts every rank's starting operands.
class Distributor {
  public:
    Distributor(const Plan& plan, Communicator& comm) : plan_(plan), comm_(comm) {}

    void distribute(std::size_t id, const Inputs& in) {
        const TaskNode& node = plan_.tree.nodes[id];
        if (plan_.expanded[id] == 0) {
            if (const auto& split = plan_.leaf_split[id]) post_helper_operands(node, *split, in);
            return;
        }
        for (std::size_t i = 0; i < node.children.size(); ++i) {
            const auto child_id = node.children[i];
            auto child_in = derive(node, in, i);
            const TaskNode& child = plan_.tree.nodes[child_id];
            if (i != 0) {
                comm_.send(0, child.father, {child_id, child.depth, MessageKind::distribute, 0},
                           child_in);
            }
            distribute(child_id, child_in);
        }
    }

  private:
    void post_helper_operands(const TaskNode& node, const LeafSplit& split, const Inputs& in) {
        for (std::size_t h = 1; h < split.team.size(); ++h) {
            if (split.calls[h].empty()) continue;
            Communicator::Payload p;
            for (auto call : split.calls[h]) {
                for (auto& m : derive(node, in, call)) p.push_back(std::move(m));
            }
            comm_.send(0, split.team[h], {node.id, node.depth, MessageKind::distribute, 0},
                       std::move(p));
        }
    }

    const Plan& plan_;
    Communicator& comm_;
};

}  // namespace

ParallelResult run_parallel(const DenseMatrix& a, const TaskTree& tree, const AtaConfig& cfg,
                            const RuntimeOptions& opts) {
    if (a.rows() == 0 || a.cols() == 0) throw contract_error("run_parallel: empty matrix");
    if (cfg.base_threshold == 0) throw contract_error("run_parallel: base_threshold must be >= 1");
    const auto& root = tree.root();
    if (root.dims[0] != a.rows() || root.dims[1] != a.cols()) {
        throw contract_error("run_parallel: tree built for " + shape_string(root.dims[0], root.dims[1]) +
                             ", input is " + shape_string(a.rows(), a.cols()));
    }
    const auto ranks = static_cast<int>(tree.total_ranks);
    const Plan plan(tree, cfg.base_threshold);
    Communicator comm(ranks, opts.timeout);

    std::vector<std::unique_ptr<Worker>> workers;
    for (Rank r = 0; r < ranks; ++r) workers.push_back(std::make_unique<Worker>(r, plan, comm, cfg));
    std::vector<double> busy(static_cast<std::size_t>(ranks), 0.0);
    PackedLowerTriangular result;
    const Inputs root_input{a};

    const auto body = [&](Rank r) {
        auto& w = *workers[static_cast<std::size_t>(r)];
        const auto slot = static_cast<std::size_t>(r);
        try {
            if (opts.fail_rank && *opts.fail_rank == r) throw std::runtime_error("injected failure");
            if (opts.stall_rank && *opts.stall_rank == r) std::this_thread::sleep_for(2 * opts.timeout);
            if (const auto entry = plan.entry[slot]) {
                const TaskNode& node = tree.nodes[*entry];
                if (node.parent == TaskNode::npos) {
                    w.start_clock();
                    result = std::get<PackedLowerTriangular>(w.run_node(*entry, root_input));
                } else {
                    auto in = comm.recv(r, 0, {node.id, node.depth, MessageKind::distribute, 0});
                    w.start_clock();
                    auto out = w.run_node(*entry, in);
                    in.clear();
                    w.participate(tree.nodes[node.parent], plan.index_in_parent(node), std::move(out));
                }
                busy[slot] = w.busy_seconds();
            } else if (const auto host = plan.helps[slot]) {
                w.help(*host);
                busy[slot] = w.busy_seconds();
            }
        } catch (const runtime_abort&) {
            // Secondary failure; the first reason is already recorded.
        } catch (const std::exception& e) {
            comm.abort("rank " + std::to_string(r) + " failed at node " +
                       std::to_string(w.current_node()) + ": " + e.what());
        }
    };

    const auto t0 = Clock::now();
    {
        std::vector<std::jthread> threads;
        threads.reserve(static_cast<std::size_t>(ranks));
        for (Rank r = 0; r < ranks; ++r) threads.emplace_back(body, r);
        try {
            Distributor(plan, comm).distribute(0, root_input);
        } catch (const runtime_abort&) {
        } catch (const std::exception& e) {
            comm.abort(std::string("input distribution failed: ") + e.what());
        }
    }
    const double wall = std::chrono::duration<double>(Clock::now() - t0).count();
    if (comm.aborted()) throw runtime_abort("parallel run aborted: " + comm.abort_reason());

    ParallelResult out;
    out.c = std::move(result);
    out.messages = comm.records();
    out.comm = account_messages(out.messages);
    const auto cs = comm.comm_seconds();
    out.comm.comm_wall_time = cs.empty() ? 0.0 : *std::ranges::max_element(cs);
    out.rank_seconds = std::move(busy);
    out.wall_seconds = wall;
    for (const auto& w : workers) out.scalar_mults += w->mults();
    return out;
}

}  // namespace fastata
