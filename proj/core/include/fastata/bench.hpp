#ifndef FASTATA_BENCH_HPP
#define FASTATA_BENCH_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fastata/matrix.hpp"
#include "fastata/runtime.hpp"

namespace fastata {

/// Experimentally determined serial fraction for speed-up S on P processes:
/// e = (1/S - 1/P) / (1 - 1/P). Requires P >= 2 and S > 0.
[[nodiscard]] double karp_flatt(double speedup, std::uint64_t processes);

enum class Distribution { uniform, ones };

[[nodiscard]] Distribution distribution_from_string(const std::string& s);

/// Deterministic test matrix. `uniform` draws from [-1, 1) using the top 53
/// bits of a std::mt19937_64 stream, so values are identical on every platform.
[[nodiscard]] DenseMatrix gen_matrix(std::size_t m, std::size_t n, std::uint64_t seed,
                                     Distribution dist = Distribution::uniform);

/// Worker counts for --sweep: {1, 6, 12, 15, 18, 38} capped at 2x hardware threads.
[[nodiscard]] std::vector<std::uint64_t> default_sweep(unsigned hardware_threads);

struct BenchConfig {
    std::size_t rows = 256;
    std::size_t cols = 256;
    std::vector<std::uint64_t> workers{1};
    std::size_t reps = 3;
    std::uint64_t seed = 42;
    Distribution distribution = Distribution::uniform;
    std::size_t base_threshold = 32;
    bool check = false;
    bool count_mults = false;
    std::optional<std::filesystem::path> input;
    std::optional<std::filesystem::path> trace;
    RuntimeOptions runtime;
};

struct CheckResult {
    bool passed = true;
    double frobenius_error = 0.0;
    double tolerance = 0.0;
    double max_abs_error = 0.0;
    std::size_t row = 0;  // location of max_abs_error
    std::size_t col = 0;
};

struct BenchReport {
    std::size_t n = 0;  // columns
    std::size_t m = 0;  // rows
    std::uint64_t processes = 1;
    std::size_t reps = 0;
    double serial_time = 0.0;    // median seconds
    double parallel_time = 0.0;  // median seconds
    double speedup = 0.0;
    double efficiency = 0.0;
    std::optional<double> karp_flatt;  // undefined for P = 1
    double comm_fraction = 0.0;        // comm_wall_time / parallel_time
    CommStats comm;
    std::uint64_t mult_count = 0;
    bool check_passed = true;
    std::optional<CheckResult> check;
};

/// Compares a result with the classical oracle at tolerance 1e-9 ||A||_F^2.
[[nodiscard]] CheckResult check_against_oracle(MatrixView a, const PackedLowerTriangular& c);

/// Loads or generates the input, times serial and parallel runs (medians of
/// `reps`), optionally verifies and counts, and returns one report per
/// worker count. P = 1 reuses the serial time, so its speed-up is exactly 1.
[[nodiscard]] std::vector<BenchReport> run_bench(const BenchConfig& cfg);

/// Header plus one row per report; column order follows BenchReport.
void write_csv(std::ostream& out, std::span<const BenchReport> reports);
void write_json(std::ostream& out, std::span<const BenchReport> reports);

[[nodiscard]] std::vector<std::string> csv_header();

}  // namespace fastata

#endif  // FASTATA_BENCH_HPP
