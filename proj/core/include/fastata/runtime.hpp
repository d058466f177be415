#ifndef FASTATA_RUNTIME_HPP
#define FASTATA_RUNTIME_HPP

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fastata/ata.hpp"
#include "fastata/matrix.hpp"
#include "fastata/scheduler.hpp"

namespace fastata {

/// A parallel run was torn down: a worker threw, or a receive timed out.
/// The message names the rank and tree node where it happened.
class runtime_abort : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class MessageKind {
    distribute,  // input hand-off before the run proper; not on the critical path
    helper,      // helper -> host results in an incomplete level
    reduce,      // group member -> group root contribution
    send,        // group root -> node father (ids_0)
};

[[nodiscard]] const char* to_string(MessageKind kind) noexcept;
[[nodiscard]] MessageKind message_kind_from_string(const std::string& s);

struct MessageTag {
    std::size_t node_id = 0;
    int depth = 0;
    MessageKind kind = MessageKind::send;
    int block = 0;
};

struct MessageRecord {
    Rank sender = 0;
    Rank receiver = 0;
    std::uint64_t words = 0;
    std::size_t node_id = 0;
    int depth = 0;
    MessageKind kind = MessageKind::send;
    int block = 0;

    friend bool operator==(const MessageRecord&, const MessageRecord&) = default;
};

/// Ranks cooperating on one reduction; the root is the lowest rank.
struct WorkerGroup {
    std::vector<Rank> members;  // strictly ascending

    [[nodiscard]] Rank root() const { return members.front(); }
    [[nodiscard]] bool contains(Rank r) const;
};

struct CommStats {
    std::uint64_t messages_critical_path = 0;
    std::uint64_t words_critical_path = 0;
    std::uint64_t messages_total = 0;  // includes distribution
    std::uint64_t words_total = 0;     // includes distribution
    std::uint64_t max_message_words = 0;  // largest result block moved between ranks
    std::uint64_t distribution_messages = 0;
    std::uint64_t distribution_words = 0;
    double comm_wall_time = 0.0;  // seconds, max over ranks

    friend bool operator==(const CommStats&, const CommStats&) = default;
};

/// Communication-cost accountant.
///
/// Clocks count messages along the longest dependency chain. Nodes are
/// replayed deepest first. Inside a node, helper results arrive one at a
/// time at the host; the node's group reductions all run concurrently and
/// cost one step together; the point-to-point sends to ids_0 are then
/// received one after another. Words follow the same chains.
/// comm_wall_time is left at zero; only the runtime measures it.
[[nodiscard]] CommStats account_messages(std::span<const MessageRecord> records);

struct CostModel {
    double alpha = 0.0;  // seconds per message
    double beta = 0.0;   // seconds per word
};

struct CommPrediction {
    std::uint64_t latency = 0;    // L(n, P) = max{4(lmax - 1), 3 lmax}
    std::uint64_t bandwidth = 0;  // BW(n, P) = ceil(n/2)^2
    double seconds = 0.0;         // alpha L + beta BW
};

[[nodiscard]] CommPrediction predict_comm_cost(std::size_t n, std::uint64_t processes,
                                               const CostModel& model = {});

/// In-process message passing between a fixed set of ranks.
///
/// Sends are buffered and never block; receives block until the matching
/// (sender, tag) message arrives, the communicator is aborted, or the
/// timeout expires. All traffic is recorded for later accounting.
class Communicator {
  public:
    using Payload = std::vector<DenseMatrix>;

    explicit Communicator(int ranks,
                          std::chrono::milliseconds timeout = std::chrono::minutes(10));
    ~Communicator();
    Communicator(const Communicator&) = delete;
    Communicator& operator=(const Communicator&) = delete;

    [[nodiscard]] int size() const noexcept { return static_cast<int>(boxes_.size()); }

    void send(Rank from, Rank to, const MessageTag& tag, Payload payload);
    [[nodiscard]] Payload recv(Rank self, Rank from, const MessageTag& tag);

    /// Sum of every member's contribution, accumulated at the root in
    /// ascending rank order. Returns the sum at the root, nullopt elsewhere.
    std::optional<DenseMatrix> reduce_sum(const WorkerGroup& group, Rank self,
                                          const MessageTag& tag, DenseMatrix contribution);

    /// Blocks until every member of `group` has arrived for `tag`.
    void barrier(const WorkerGroup& group, Rank self, const MessageTag& tag);

    /// Wakes every waiter; later communication throws runtime_abort. The
    /// first reason is kept.
    void abort(const std::string& reason);
    [[nodiscard]] bool aborted() const noexcept { return aborted_.load(); }
    [[nodiscard]] std::string abort_reason() const;

    [[nodiscard]] std::vector<MessageRecord> records() const;
    /// Seconds each rank spent moving data (waiting for a peer excluded).
    [[nodiscard]] std::vector<double> comm_seconds() const;

  private:
    struct Mailbox;

    void check_rank(Rank r, const char* what) const;

    std::vector<std::unique_ptr<Mailbox>> boxes_;
    std::chrono::milliseconds timeout_;
    std::atomic<bool> aborted_{false};
    mutable std::mutex meta_mutex_;
    std::string abort_reason_;
    std::vector<MessageRecord> records_;
    std::vector<double> comm_seconds_;
    struct BarrierState;
    std::unique_ptr<BarrierState> barriers_;
};

struct RuntimeOptions {
    std::chrono::milliseconds timeout = std::chrono::minutes(10);
    /// Fault injection for tests: this rank throws before doing any work.
    std::optional<Rank> fail_rank;
    /// Fault injection for tests: this rank sleeps for 2x timeout first.
    std::optional<Rank> stall_rank;
};

struct ParallelResult {
    PackedLowerTriangular c;
    CommStats comm;
    std::vector<double> rank_seconds;  // per-rank busy wall time
    double wall_seconds = 0.0;
    std::uint64_t scalar_mults = 0;  // summed over ranks when cfg.count_mults
    std::vector<MessageRecord> messages;
};

/// Executes `tree` on one worker thread per rank. Nodes whose dimensions hit
/// the base case run sequentially on their father rank; ranks below them
/// stay idle. Throws contract_error if the tree was built for other
/// dimensions and runtime_abort if a worker fails or a receive times out.
[[nodiscard]] ParallelResult run_parallel(const DenseMatrix& a, const TaskTree& tree,
                                          const AtaConfig& cfg = {},
                                          const RuntimeOptions& opts = {});

/// CSV trace: header "sender,receiver,words,node_id,depth,kind,block".
void write_trace_csv(std::ostream& out, std::span<const MessageRecord> records);
[[nodiscard]] std::vector<MessageRecord> read_trace_csv(std::istream& in);
void save_trace(const std::filesystem::path& path, std::span<const MessageRecord> records);
[[nodiscard]] std::vector<MessageRecord> load_trace(const std::filesystem::path& path);

}  // namespace fastata

#endif  // FASTATA_RUNTIME_HPP
