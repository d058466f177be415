#include <algorithm>
#include <condition_variable>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "fastata/runtime.hpp"

namespace fastata {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
    return std::chrono::duration<double>(Clock::now() - t).count();
}

std::uint64_t payload_words(const Communicator::Payload& p) {
    std::uint64_t w = 0;
    for (const auto& m : p) w += m.size();
    return w;
}

std::string describe(Rank self, Rank from, const MessageTag& tag) {
    std::ostringstream os;
    os << "rank " << self << " waiting for " << to_string(tag.kind) << " message (block "
       << tag.block << ") from rank " << from << " at node " << tag.node_id;
    return os.str();
}

}  // namespace

const char* to_string(MessageKind kind) noexcept {
    switch (kind) {
        case MessageKind::distribute: return "distribute";
        case MessageKind::helper: return "helper";
        case MessageKind::reduce: return "reduce";
        case MessageKind::send: return "send";
    }
    return "?";
}

MessageKind message_kind_from_string(const std::string& s) {
    if (s == "distribute") return MessageKind::distribute;
    if (s == "helper") return MessageKind::helper;
    if (s == "reduce") return MessageKind::reduce;
    if (s == "send") return MessageKind::send;
    throw std::runtime_error("unknown message kind '" + s + "'");
}

bool WorkerGroup::contains(Rank r) const {
    return std::ranges::binary_search(members, r);
}

struct Communicator::Mailbox {
    using Key = std::tuple<Rank, std::size_t, int, int>;  // sender, node, kind, block
    struct Message {
        Payload payload;
        Clock::time_point posted;
    };

    std::mutex mutex;
    std::condition_variable cv;
    std::map<Key, Message> pending;
};

struct Communicator::BarrierState {
    using Key = std::tuple<std::size_t, int, int>;
    std::mutex mutex;
    std::condition_variable cv;
    std::map<Key, std::size_t> arrived;
};

Communicator::Communicator(int ranks, std::chrono::milliseconds timeout)
    : timeout_(timeout), barriers_(std::make_unique<BarrierState>()) {
    if (ranks < 1) throw contract_error("Communicator: need at least one rank");
    boxes_.reserve(static_cast<std::size_t>(ranks));
    for (int i = 0; i < ranks; ++i) boxes_.push_back(std::make_unique<Mailbox>());
    comm_seconds_.assign(static_cast<std::size_t>(ranks), 0.0);
}

Communicator::~Communicator() = default;

void Communicator::check_rank(Rank r, const char* what) const {
    if (r < 0 || r >= size()) {
        throw contract_error(std::string(what) + ": rank " + std::to_string(r) +
                             " outside communicator of size " + std::to_string(size()));
    }
}

void Communicator::send(Rank from, Rank to, const MessageTag& tag, Payload payload) {
    check_rank(from, "send");
    check_rank(to, "send");
    if (aborted()) throw runtime_abort(abort_reason());
    const auto start = Clock::now();
    const MessageRecord rec{from, to, payload_words(payload), tag.node_id, tag.depth, tag.kind,
                            tag.block};
    {
        std::lock_guard lock(meta_mutex_);
        records_.push_back(rec);
    }
    auto& box = *boxes_[static_cast<std::size_t>(to)];
    {
        std::lock_guard lock(box.mutex);
        box.pending[{from, tag.node_id, static_cast<int>(tag.kind), tag.block}] =
            Mailbox::Message{std::move(payload), Clock::now()};
    }
    box.cv.notify_all();
    if (tag.kind != MessageKind::distribute) {
        comm_seconds_[static_cast<std::size_t>(from)] += seconds_since(start);
    }
}

Communicator::Payload Communicator::recv(Rank self, Rank from, const MessageTag& tag) {
    check_rank(self, "recv");
    check_rank(from, "recv");
    auto& box = *boxes_[static_cast<std::size_t>(self)];
    const Mailbox::Key key{from, tag.node_id, static_cast<int>(tag.kind), tag.block};
    const auto wait_start = Clock::now();
    std::unique_lock lock(box.mutex);
    const bool ready = box.cv.wait_until(lock, wait_start + timeout_, [&] {
        return aborted() || box.pending.contains(key);
    });
    if (aborted()) throw runtime_abort(abort_reason());
    if (!ready) {
        const std::string reason = describe(self, from, tag) + ": timed out after " +
                                   std::to_string(timeout_.count()) + " ms";
        lock.unlock();
        abort(reason);
        throw runtime_abort(reason);
    }
    auto node = box.pending.extract(key);
    lock.unlock();
    if (tag.kind != MessageKind::distribute) {
        comm_seconds_[static_cast<std::size_t>(self)] +=
            seconds_since(std::max(wait_start, node.mapped().posted));
    }
    return std::move(node.mapped().payload);
}

std::optional<DenseMatrix> Communicator::reduce_sum(const WorkerGroup& group, Rank self,
                                                    const MessageTag& tag,
                                                    DenseMatrix contribution) {
    if (!group.contains(self)) {
        throw contract_error("reduce_sum: rank " + std::to_string(self) + " not in group");
    }
    const Rank root = group.root();
    if (self != root) {
        Payload p;
        p.push_back(std::move(contribution));
        send(self, root, tag, std::move(p));
        return std::nullopt;
    }
    DenseMatrix acc = std::move(contribution);
    for (std::size_t i = 1; i < group.members.size(); ++i) {
        const Rank member = group.members[i];
        auto p = recv(self, member, tag);
        if (p.size() != 1 || p[0].rows() != acc.rows() || p[0].cols() != acc.cols()) {
            const std::string reason =
                "reduce_sum at node " + std::to_string(tag.node_id) + ": rank " +
                std::to_string(member) + " contributed a mismatched block to root " +
                std::to_string(root);
            abort(reason);
            throw runtime_abort(reason);
        }
        const auto start = Clock::now();
        add_in_place(acc, p[0]);
        comm_seconds_[static_cast<std::size_t>(self)] += seconds_since(start);
    }
    return acc;
}

void Communicator::barrier(const WorkerGroup& group, Rank self, const MessageTag& tag) {
    if (!group.contains(self)) {
        throw contract_error("barrier: rank " + std::to_string(self) + " not in group");
    }
    auto& b = *barriers_;
    const BarrierState::Key key{tag.node_id, static_cast<int>(tag.kind), tag.block};
    std::unique_lock lock(b.mutex);
    if (++b.arrived[key] == group.members.size()) {
        b.cv.notify_all();
        return;
    }
    const bool done = b.cv.wait_for(lock, timeout_, [&] {
        return aborted() || b.arrived[key] == group.members.size();
    });
    if (aborted()) throw runtime_abort(abort_reason());
    if (!done) {
        const std::string reason = "rank " + std::to_string(self) + " timed out in barrier at node " +
                                   std::to_string(tag.node_id);
        lock.unlock();
        abort(reason);
        throw runtime_abort(reason);
    }
}

void Communicator::abort(const std::string& reason) {
    {
        std::lock_guard lock(meta_mutex_);
        if (abort_reason_.empty()) abort_reason_ = reason;
        aborted_.store(true);
    }
    for (auto& box : boxes_) {
        std::lock_guard lock(box->mutex);
        box->cv.notify_all();
    }
    std::lock_guard lock(barriers_->mutex);
    barriers_->cv.notify_all();
}

std::string Communicator::abort_reason() const {
    std::lock_guard lock(meta_mutex_);
    return abort_reason_;
}

std::vector<MessageRecord> Communicator::records() const {
    std::lock_guard lock(meta_mutex_);
    return records_;
}

std::vector<double> Communicator::comm_seconds() const {
    std::lock_guard lock(meta_mutex_);
    return comm_seconds_;
}

CommStats account_messages(std::span<const MessageRecord> records) {
    CommStats stats;
    std::map<std::size_t, std::vector<const MessageRecord*>> by_node;
    Rank max_rank = 0;
    for (const auto& r : records) {
        ++stats.messages_total;
        stats.words_total += r.words;
        max_rank = std::max({max_rank, r.sender, r.receiver});
        if (r.kind == MessageKind::distribute) {
            ++stats.distribution_messages;
            stats.distribution_words += r.words;
            continue;
        }
        stats.max_message_words = std::max(stats.max_message_words, r.words);
        by_node[r.node_id].push_back(&r);
    }

    std::vector<std::pair<int, std::size_t>> order;  // (depth, node)
    for (const auto& [node, msgs] : by_node) order.emplace_back(msgs.front()->depth, node);
    std::ranges::sort(order, [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });

    const auto n = static_cast<std::size_t>(max_rank) + 1;
    std::vector<std::uint64_t> msgs(n, 0);
    std::vector<std::uint64_t> words(n, 0);
    const auto idx = [](Rank r) { return static_cast<std::size_t>(r); };

    // A message received after everything the sender and the receiver saw.
    const auto point_to_point = [&](const MessageRecord& m) {
        msgs[idx(m.receiver)] = std::max(msgs[idx(m.sender)], msgs[idx(m.receiver)]) + 1;
        words[idx(m.receiver)] = std::max(words[idx(m.sender)], words[idx(m.receiver)]) + m.words;
    };

    for (const auto& [depth, node] : order) {
        auto list = by_node[node];
        std::ranges::stable_sort(list, {}, [](const MessageRecord* m) { return m->sender; });
        for (const auto* m : list)
            if (m->kind == MessageKind::helper) point_to_point(*m);

        std::uint64_t start = 0;
        std::uint64_t wstart = 0;
        bool any_reduce = false;
        for (const auto* m : list) {
            if (m->kind != MessageKind::reduce) continue;
            any_reduce = true;
            for (Rank r : {m->sender, m->receiver}) {
                start = std::max(start, msgs[idx(r)]);
                wstart = std::max(wstart, words[idx(r)]);
            }
        }
        if (any_reduce) {
            for (const auto* m : list) {
                if (m->kind != MessageKind::reduce) continue;
                msgs[idx(m->receiver)] = start + 1;
                words[idx(m->receiver)] = std::max(words[idx(m->receiver)], wstart + m->words);
            }
        }

        for (const auto* m : list)
            if (m->kind == MessageKind::send) point_to_point(*m);
    }
    if (!records.empty()) {
        stats.messages_critical_path = *std::ranges::max_element(msgs);
        stats.words_critical_path = *std::ranges::max_element(words);
    }
    return stats;
}

CommPrediction predict_comm_cost(std::size_t n, std::uint64_t processes, const CostModel& model) {
    if (processes < 1) throw contract_error("predict_comm_cost: need at least one process");
    const auto levels = static_cast<std::int64_t>(lmax(processes));
    CommPrediction out;
    out.latency = static_cast<std::uint64_t>(std::max<std::int64_t>({4 * (levels - 1), 3 * levels, 0}));
    const std::uint64_t half = (n + 1) / 2;
    out.bandwidth = half * half;
    out.seconds = model.alpha * static_cast<double>(out.latency) +
                  model.beta * static_cast<double>(out.bandwidth);
    return out;
}

void write_trace_csv(std::ostream& out, std::span<const MessageRecord> records) {
    out << "sender,receiver,words,node_id,depth,kind,block\n";
    for (const auto& r : records) {
        out << r.sender << ',' << r.receiver << ',' << r.words << ',' << r.node_id << ','
            << r.depth << ',' << to_string(r.kind) << ',' << r.block << '\n';
    }
}

std::vector<MessageRecord> read_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("sender,receiver,words,node_id", 0) != 0) {
        throw std::runtime_error("trace: missing or unexpected header");
    }
    std::vector<MessageRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::vector<std::string> f;
        std::string cell;
        while (std::getline(row, cell, ',')) f.push_back(cell);
        if (f.size() != 7) {
            throw std::runtime_error("trace line " + std::to_string(line_no) + ": expected 7 fields");
        }
        try {
            out.push_back({std::stoi(f[0]), std::stoi(f[1]), std::stoull(f[2]), std::stoull(f[3]),
                           std::stoi(f[4]), message_kind_from_string(f[5]), std::stoi(f[6])});
        } catch (const std::logic_error&) {
            throw std::runtime_error("trace line " + std::to_string(line_no) + ": bad number");
        }
    }
    return out;
}

void save_trace(const std::filesystem::path& path, std::span<const MessageRecord> records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace " + path.string());
    write_trace_csv(out, records);
}

std::vector<MessageRecord> load_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace " + path.string());
    return read_trace_csv(in);
}

}  // namespace fastata
