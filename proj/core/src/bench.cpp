#include "fastata/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <ostream>
#include <random>

#include "fastata/ata.hpp"
#include "fastata/matrix_io.hpp"

namespace fastata {

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
    std::ranges::sort(v);
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 != 0 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

std::filesystem::path trace_path_for(const std::filesystem::path& base, std::uint64_t p,
                                     bool several) {
    if (!several) return base;
    auto out = base;
    out.replace_filename(base.stem().string() + "_P" + std::to_string(p) + base.extension().string());
    return out;
}

}  // namespace

double karp_flatt(double speedup, std::uint64_t processes) {
    if (processes < 2) throw contract_error("karp_flatt: needs at least two processes");
    if (!(speedup > 0.0)) throw contract_error("karp_flatt: speed-up must be positive");
    const double p = static_cast<double>(processes);
    return (1.0 / speedup - 1.0 / p) / (1.0 - 1.0 / p);
}

Distribution distribution_from_string(const std::string& s) {
    if (s == "uniform") return Distribution::uniform;
    if (s == "ones") return Distribution::ones;
    throw contract_error("unknown distribution '" + s + "' (expected uniform or ones)");
}

DenseMatrix gen_matrix(std::size_t m, std::size_t n, std::uint64_t seed, Distribution dist) {
    if (m == 0 || n == 0) throw contract_error("gen_matrix: dimensions must be positive");
    if (dist == Distribution::ones) return DenseMatrix(m, n, 1.0);
    std::mt19937_64 rng(seed);
    DenseMatrix a(m, n);
    for (double& v : a.data()) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        v = 2.0 * u - 1.0;
    }
    return a;
}

std::vector<std::uint64_t> default_sweep(unsigned hardware_threads) {
    const std::uint64_t cap = 2ULL * std::max(1U, hardware_threads);
    std::vector<std::uint64_t> out;
    for (std::uint64_t p : {1, 6, 12, 15, 18, 38})
        if (p <= cap) out.push_back(p);
    return out;
}

CheckResult check_against_oracle(MatrixView a, const PackedLowerTriangular& c) {
    const auto ref = classical_ata_oracle(a);
    CheckResult out;
    out.tolerance = ata_tolerance(a);
    out.frobenius_error = frobenius_distance(c, ref);
    for (std::size_t i = 0; i < ref.n(); ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double e = std::abs(c.at(i, j) - ref.at(i, j));
            if (e > out.max_abs_error || std::isnan(e)) {
                out.max_abs_error = e;
                out.row = i;
                out.col = j;
            }
        }
    }
    out.passed = out.frobenius_error <= out.tolerance;
    return out;
}

std::vector<BenchReport> run_bench(const BenchConfig& cfg) {
    if (cfg.reps == 0) throw contract_error("run_bench: reps must be >= 1");
    if (cfg.workers.empty()) throw contract_error("run_bench: no worker counts given");
    const DenseMatrix a = cfg.input ? load_matrix(*cfg.input)
                                    : gen_matrix(cfg.rows, cfg.cols, cfg.seed, cfg.distribution);
    if (a.rows() == 0 || a.cols() == 0) throw contract_error("run_bench: empty input matrix");
    const AtaConfig acfg{cfg.base_threshold, false};

    std::vector<double> serial_times;
    PackedLowerTriangular serial;
    for (std::size_t r = 0; r < cfg.reps; ++r) {
        const auto t0 = Clock::now();
        serial = ata(a, acfg);
        serial_times.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
    }
    const double serial_time = median(serial_times);

    std::uint64_t mults = 0;
    if (cfg.count_mults) {
        MultCounter counter;
        (void)ata(a, {cfg.base_threshold, true}, &counter);
        mults = counter.scalar_mults;
    }
    std::optional<CheckResult> serial_check;
    if (cfg.check) serial_check = check_against_oracle(a, serial);

    std::vector<BenchReport> reports;
    for (const auto p : cfg.workers) {
        if (p < 1) throw contract_error("run_bench: worker count must be >= 1");
        BenchReport rep;
        rep.n = a.cols();
        rep.m = a.rows();
        rep.processes = p;
        rep.reps = cfg.reps;
        rep.serial_time = serial_time;
        rep.mult_count = mults;

        const auto tree = build_tree(p, a.rows(), a.cols());
        std::vector<double> times;
        ParallelResult last;
        for (std::size_t r = 0; r < cfg.reps; ++r) {
            last = run_parallel(a, tree, acfg, cfg.runtime);
            times.push_back(last.wall_seconds);
        }
        rep.comm = last.comm;
        rep.parallel_time = p == 1 ? serial_time : median(times);
        rep.speedup = rep.serial_time / rep.parallel_time;
        rep.efficiency = rep.speedup / static_cast<double>(p);
        if (p >= 2) rep.karp_flatt = karp_flatt(rep.speedup, p);
        rep.comm_fraction = rep.parallel_time > 0.0 ? rep.comm.comm_wall_time / rep.parallel_time : 0.0;

        if (cfg.check) {
            auto chk = check_against_oracle(a, last.c);
            chk.passed = chk.passed && serial_check->passed;
            rep.check_passed = chk.passed;
            rep.check = chk;
        }
        if (cfg.trace) save_trace(trace_path_for(*cfg.trace, p, cfg.workers.size() > 1), last.messages);
        reports.push_back(rep);
    }
    return reports;
}

std::vector<std::string> csv_header() {
    return {"n",
            "m",
            "P",
            "reps",
            "serial_time",
            "parallel_time",
            "speedup",
            "efficiency",
            "karp_flatt",
            "comm_fraction",
            "messages_critical_path",
            "words_critical_path",
            "messages_total",
            "words_total",
            "max_message_words",
            "comm_wall_time",
            "mult_count",
            "check_passed"};
}

void write_csv(std::ostream& out, std::span<const BenchReport> reports) {
    const auto header = csv_header();
    for (std::size_t i = 0; i < header.size(); ++i) out << (i != 0 ? "," : "") << header[i];
    out << '\n';
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    for (const auto& r : reports) {
        out << r.n << ',' << r.m << ',' << r.processes << ',' << r.reps << ',' << r.serial_time << ','
            << r.parallel_time << ',' << r.speedup << ',' << r.efficiency << ',';
        if (r.karp_flatt) out << *r.karp_flatt;
        out << ',' << r.comm_fraction << ',' << r.comm.messages_critical_path << ','
            << r.comm.words_critical_path << ',' << r.comm.messages_total << ','
            << r.comm.words_total << ',' << r.comm.max_message_words << ','
            << r.comm.comm_wall_time << ',' << r.mult_count << ',' << (r.check_passed ? 1 : 0)
            << '\n';
    }
    out.precision(old_precision);
}

void write_json(std::ostream& out, std::span<const BenchReport> reports) {
    auto arr = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json j;
        j["n"] = r.n;
        j["m"] = r.m;
        j["P"] = r.processes;
        j["reps"] = r.reps;
        j["serial_time"] = r.serial_time;
        j["parallel_time"] = r.parallel_time;
        j["speedup"] = r.speedup;
        j["efficiency"] = r.efficiency;
        j["karp_flatt"] = r.karp_flatt ? nlohmann::json(*r.karp_flatt) : nlohmann::json(nullptr);
        j["comm_fraction"] = r.comm_fraction;
        j["comm"] = {{"messages_critical_path", r.comm.messages_critical_path},
                     {"words_critical_path", r.comm.words_critical_path},
                     {"messages_total", r.comm.messages_total},
                     {"words_total", r.comm.words_total},
                     {"max_message_words", r.comm.max_message_words},
                     {"distribution_messages", r.comm.distribution_messages},
                     {"distribution_words", r.comm.distribution_words},
                     {"comm_wall_time", r.comm.comm_wall_time}};
        j["mult_count"] = r.mult_count;
        j["check_passed"] = r.check_passed;
        if (r.check) {
            j["check"] = {{"frobenius_error", r.check->frobenius_error},
                          {"tolerance", r.check->tolerance},
                          {"max_abs_error", r.check->max_abs_error},
                          {"row", r.check->row},
                          {"col", r.check->col}};
        }
        arr.push_back(std::move(j));
    }
    out << arr.dump(2) << '\n';
}

}  // namespace fastata
