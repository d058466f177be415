// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fastata/ata.hpp"
#include "fastata/bench.hpp"
#include "fastata/runtime.hpp"
#include "fastata/scheduler.hpp"
#include "fastata/strassen.hpp"

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Checker {
  public:
    void expect(bool ok, const std::string& what) {
        if (ok) return;
        out_.pass = false;
        if (failures_++ < 5) out_.detail += (out_.detail.empty() ? "" : "; ") + what;
    }
    [[nodiscard]] bool ok() const { return out_.pass; }
    void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
    Outcome finish() {
        if (failures_ > 5) out_.detail += "; +" + std::to_string(failures_ - 5) + " more";
        if (!notes_.empty()) out_.detail = out_.detail.empty() ? notes_ : out_.detail + " | " + notes_;
        return out_;
    }

  private:
    Outcome out_;
    int failures_ = 0;
    std::string notes_;
};

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Outcome serial_oracle() {
    Checker c;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::size_t> dim(1, 300);
    bool parity[2][2] = {};
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        std::size_t m = dim(rng), n = dim(rng);
        // First four cases pin every (m, n) parity combination.
        if (t < 4) {
            m = 200 + static_cast<std::size_t>(t & 1);
            n = 150 + static_cast<std::size_t>(t >> 1);
        }
        parity[m % 2][n % 2] = true;
        const auto a = fastata::gen_matrix(m, n, 1000 + static_cast<std::uint64_t>(t));
        const double err = fastata::frobenius_distance(fastata::ata(a), fastata::classical_ata_oracle(a));
        const double tol = fastata::ata_tolerance(a);
        worst = std::max(worst, err / tol);
        c.expect(err <= tol, std::to_string(m) + "x" + std::to_string(n) + " error " + fmt(err));
    }
    for (auto& row : parity)
        for (bool seen : row) c.expect(seen, "parity combination missing");
    const double secs = seconds_since(t0);
    c.expect(secs < 60.0, "took " + fmt(secs) + " s");
    c.note("200 shapes, worst error/tolerance " + fmt(worst) + ", " + fmt(secs, 3) + " s");
    return c.finish();
}

Outcome parallel_equivalence() {
    Checker c;
    const auto t0 = Clock::now();
    int runs = 0;
    for (std::size_t n : {64u, 257u, 512u}) {
        const auto a = fastata::gen_matrix(n, n, n);
        const auto serial = fastata::ata(a);
        const double tol = fastata::ata_tolerance(a);
        for (std::uint64_t p : {1u, 6u, 12u, 15u, 18u, 38u}) {
            const auto res = fastata::run_parallel(a, fastata::build_tree(p, n, n));
            const double err = fastata::frobenius_distance(res.c, serial);
            c.expect(err <= tol, "n=" + std::to_string(n) + " P=" + std::to_string(p) + " error " + fmt(err));
            ++runs;
        }
    }
    const double secs = seconds_since(t0);
    c.expect(secs < 120.0, "took " + fmt(secs) + " s");
    c.note(std::to_string(runs) + " runs, " + fmt(secs, 3) + " s");
    return c.finish();
}

Outcome strassen_count() {
    Checker c;
    fastata::MultCounter two;
    (void)fastata::hasa(fastata::DenseMatrix{{1, 2}, {3, 4}}, fastata::DenseMatrix{{5, 6}, {7, 8}}, {1, true},
                        &two);
    c.expect(two.scalar_mults == 7, "2x2 used " + std::to_string(two.scalar_mults) + " multiplications");
    const std::array<std::size_t, 3> dims[] = {{2, 2, 2}, {8, 8, 8}, {64, 64, 64}, {50, 31, 77}};
    for (const auto& [p, q, r] : dims) {
        for (std::size_t t : {1u, 32u}) {
            fastata::MultCounter counter;
            (void)fastata::hasa(fastata::gen_matrix(p, q, 1), fastata::gen_matrix(q, r, 2), {t, true}, &counter);
            const auto expect = fastata::strassen_mult_count(p, q, r, t);
            c.expect(counter.scalar_mults == expect, std::to_string(p) + "x" + std::to_string(q) + "x" +
                                                         std::to_string(r) + " t=" + std::to_string(t) + ": " +
                                                         std::to_string(counter.scalar_mults) + " != " +
                                                         std::to_string(expect));
        }
    }
    c.note("2x2 -> " + std::to_string(two.scalar_mults) + " multiplications, 8 instrumented counts checked");
    return c.finish();
}

Outcome ata_count() {
    Checker c;
    const std::pair<std::size_t, std::size_t> dims[] = {{8, 8}, {64, 64}, {100, 37}, {128, 128}};
    for (const auto& [m, n] : dims) {
        for (std::size_t t : {1u, 32u}) {
            fastata::MultCounter counter;
            (void)fastata::ata(fastata::gen_matrix(m, n, 3), {t, true}, &counter);
            const auto expect = fastata::expected_mult_count(m, n, t);
            c.expect(counter.scalar_mults == expect, std::to_string(m) + "x" + std::to_string(n) + " t=" +
                                                         std::to_string(t) + ": " +
                                                         std::to_string(counter.scalar_mults) + " != " +
                                                         std::to_string(expect));
        }
    }
    std::string ratios;
    double prev = INFINITY;
    for (int k = 6; k <= 10; ++k) {
        const std::size_t n = std::size_t{1} << k;
        const double ratio = static_cast<double>(fastata::expected_mult_count(n, n, 1)) /
                             std::pow(static_cast<double>(n), std::log2(7.0));
        ratios += (ratios.empty() ? "" : ", ") + std::string("k=") + std::to_string(k) + ":" + fmt(ratio);
        c.expect(ratio <= 0.67, "k=" + std::to_string(k) + " ratio " + fmt(ratio) + " > 0.67");
        c.expect(ratio < prev, "k=" + std::to_string(k) + " ratio not decreasing");
        prev = ratio;
    }
    c.note("count/n^log2(7) " + ratios + " (limit 2/3 from above)");
    return c.finish();
}

Outcome scheduler_exactness() {
    Checker c;
    c.expect(fastata::npl(1) == 6, "npl(1)=" + std::to_string(fastata::npl(1)));
    c.expect(fastata::npl(2) == 38, "npl(2)=" + std::to_string(fastata::npl(2)));
    c.expect(fastata::npl(3) == 250, "npl(3)=" + std::to_string(fastata::npl(3)));
    c.expect(fastata::lmax(15) == 1, "lmax(15)=" + std::to_string(fastata::lmax(15)));

    const auto tree = fastata::build_tree(15, 1000, 1000);
    std::vector<std::vector<fastata::Rank>> helpers(6);
    for (const auto& node : tree.nodes)
        if (node.is_leaf() && node.father < 6) helpers[static_cast<std::size_t>(node.father)] = node.helpers;
    const std::vector<std::vector<fastata::Rank>> expect = {{6, 14}, {7}, {8}, {9}, {10, 12}, {11, 13}};
    c.expect(helpers == expect, "P=15 helper distribution differs");

    for (std::uint64_t p = 1; p <= 400; ++p) {
        auto ranks = fastata::build_tree(p, 1000, 1000).working_ranks();
        std::ranges::sort(ranks);
        bool ok = ranks.size() == p;
        for (std::size_t i = 0; ok && i < ranks.size(); ++i) ok = ranks[i] == static_cast<fastata::Rank>(i);
        c.expect(ok, "P=" + std::to_string(p) + " does not use every rank once");
    }
    c.note("npl 6/38/250, lmax(15)=1, extra helpers of P=15 on ranks 4, 5, 0, P=1..400 cover all ranks");
    return c.finish();
}

Outcome communication_model() {
    Checker c;
    const std::size_t n = 512;
    const auto a = fastata::gen_matrix(n, n, 7);
    const std::size_t h = (n + 1) / 2;
    std::string seen;
    for (std::uint64_t p : {6u, 38u}) {
        const auto res = fastata::run_parallel(a, fastata::build_tree(p, n, n));
        const auto L = fastata::predict_comm_cost(n, p).latency;
        c.expect(res.comm.messages_critical_path == L, "P=" + std::to_string(p) + " critical path " +
                                                           std::to_string(res.comm.messages_critical_path) +
                                                           " != L=" + std::to_string(L));
        c.expect(res.comm.max_message_words <= h * (h + 1),
                 "P=" + std::to_string(p) + " max message " + std::to_string(res.comm.max_message_words));
        std::stringstream csv;
        fastata::write_trace_csv(csv, res.messages);
        const auto replay = fastata::account_messages(fastata::read_trace_csv(csv));
        c.expect(replay.messages_critical_path == res.comm.messages_critical_path &&
                     replay.words_critical_path == res.comm.words_critical_path &&
                     replay.messages_total == res.comm.messages_total &&
                     replay.max_message_words == res.comm.max_message_words,
                 "P=" + std::to_string(p) + " trace replay differs");
        seen += (seen.empty() ? "" : ", ") + std::string("P=") + std::to_string(p) + ": L=" +
                std::to_string(res.comm.messages_critical_path) + " max block " +
                std::to_string(res.comm.max_message_words) + " words";
    }
    c.note(seen + " (quadrant " + std::to_string(h * h) + ")");
    return c.finish();
}

Outcome determinism() {
    Checker c;
    const auto a = fastata::gen_matrix(300, 211, 99);
    c.expect(fastata::gen_matrix(300, 211, 99) == a, "generator not reproducible");
    c.expect(fastata::ata(a) == fastata::ata(a), "serial output differs between runs");
    for (std::uint64_t p : {6u, 15u, 38u}) {
        const auto tree = fastata::build_tree(p, a.rows(), a.cols());
        c.expect(fastata::run_parallel(a, tree).c == fastata::run_parallel(a, tree).c,
                 "P=" + std::to_string(p) + " output differs between runs");
    }
    c.note("serial and P=6/15/38 bitwise identical across two runs");
    return c.finish();
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string run_command(const std::string& cmd, int& status) {
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
    std::string out;
    if (!pipe) {
        status = -1;
        return out;
    }
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe.get()) != nullptr) out += buf.data();
    status = pclose(pipe.release());
    return out;
}

Outcome scalability(const std::string& cli) {
    Checker c;
    const double e = fastata::karp_flatt(64.28, 250);
    c.expect(std::abs(e - 0.0116) <= 1e-4, "karp_flatt(64.28, 250) = " + fmt(e, 6));

    const unsigned hw = std::thread::hardware_concurrency();
    if (hw >= 6) {
        fastata::BenchConfig cfg;
        cfg.rows = cfg.cols = 1024;
        cfg.workers = {6};
        cfg.reps = 3;
        const auto rep = fastata::run_bench(cfg).front();
        c.expect(rep.parallel_time < rep.serial_time, "P=6 n=1024 parallel " + fmt(rep.parallel_time) +
                                                          " s not below serial " + fmt(rep.serial_time) + " s");
        c.note("n=1024 serial " + fmt(rep.serial_time) + " s, P=6 " + fmt(rep.parallel_time) + " s");
    } else {
        c.note("timing direction SKIP (" + std::to_string(hw) + " hardware threads < 6)");
    }

    if (cli.empty()) {
        c.expect(false, "bench CLI not built");
        return c.finish();
    }
    int status = 0;
    const auto csv = run_command(cli + " --rows 128 --cols 128 --workers 1,6,15 --reps 2 --check", status);
    c.expect(status == 0, "CLI exit status " + std::to_string(status));
    std::stringstream in(csv);
    std::string line;
    std::getline(in, line);
    const auto header = split_csv(line);
    const auto col = [&](const std::string& name) {
        return static_cast<std::size_t>(std::ranges::find(header, name) - header.begin());
    };
    for (const char* name : {"speedup", "efficiency", "karp_flatt", "serial_time", "parallel_time", "P"})
        c.expect(col(name) < header.size(), std::string("CSV lacks column ") + name);
    int rows = 0;
    while (c.ok() && std::getline(in, line)) {
        const auto cells = split_csv(line);
        if (cells.size() != header.size()) {
            c.expect(false, "malformed CSV row: " + line);
            break;
        }
        const double ts = std::stod(cells[col("serial_time")]);
        const double tp = std::stod(cells[col("parallel_time")]);
        const double s = std::stod(cells[col("speedup")]);
        const double eff = std::stod(cells[col("efficiency")]);
        const auto p = std::stoull(cells[col("P")]);
        c.expect(s == ts / tp, "row P=" + std::to_string(p) + " speedup identity");
        c.expect(eff == s / static_cast<double>(p), "row P=" + std::to_string(p) + " efficiency identity");
        if (p >= 2) {
            c.expect(std::stod(cells[col("karp_flatt")]) == fastata::karp_flatt(s, p),
                     "row P=" + std::to_string(p) + " Karp-Flatt identity");
        }
        ++rows;
    }
    c.expect(rows == 3, "expected 3 CSV rows, got " + std::to_string(rows));
    c.note("karp_flatt(64.28, 250) = " + fmt(e, 6) + ", CLI CSV identities hold on " + std::to_string(rows) + " rows");
    return c.finish();
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"serial oracle equivalence", serial_oracle},
        {"parallel equals serial", parallel_equivalence},
        {"Strassen multiplication count", strassen_count},
        {"Gram multiplication count", ata_count},
        {"scheduler exactness", scheduler_exactness},
        {"communication model", communication_model},
        {"determinism", determinism},
        {"scalability smoke test and report identities", [&] { return scalability(cli); }},
    };
    int failed = 0;
    int index = 0;
    for (const auto& [name, run] : criteria) {
        ++index;
        Outcome out;
        try {
            out = run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        if (!out.pass) ++failed;
        std::cout << (out.pass ? "PASS" : "FAIL") << "  " << index << ". " << name << ": " << out.detail
                  << std::endl;
    }
    std::cout << (8 - failed) << "/8 criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
