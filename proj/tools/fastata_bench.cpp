// fastata_bench: time the serial and process-tree Gram product and report
// speed-up, efficiency, Karp-Flatt and communication counters.
//
// Exit codes: 0 success, 1 verification failure, 2 usage error, 3 runtime failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <thread>

#include "fastata/bench.hpp"
#include "fastata/matrix_io.hpp"
#include "fastata/scheduler.hpp"

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Strassen-based A^t A benchmark over an in-process process tree"};

    fastata::BenchConfig cfg;
    bool sweep = false;
    bool dump_tree = false;
    std::string format = "csv";
    std::string distribution = "uniform";
    std::string trace;
    std::string input;
    std::string output;
    long long timeout_ms = 600000;

    app.add_option("--rows", cfg.rows, "Rows m of the generated matrix")->check(CLI::PositiveNumber);
    app.add_option("--cols", cfg.cols, "Columns n of the generated matrix")->check(CLI::PositiveNumber);
    app.add_option("--workers", cfg.workers, "Worker counts P (comma separated)")
        ->delimiter(',')
        ->envname("FASTATA_WORKERS")
        ->check(CLI::PositiveNumber);
    app.add_flag("--sweep", sweep, "Run P in {1,6,12,15,18,38}, capped at 2x hardware threads");
    app.add_option("--reps", cfg.reps, "Repetitions per configuration (median reported)")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.seed, "Generator seed");
    app.add_option("--distribution", distribution, "Generated entries: uniform or ones")
        ->check(CLI::IsMember({"uniform", "ones"}));
    app.add_option("--base-threshold", cfg.base_threshold, "Recursion cut-off on min(m, n)")
        ->check(CLI::PositiveNumber);
    app.add_flag("--check", cfg.check, "Verify against the classical triple-loop product");
    app.add_flag("--count-mults", cfg.count_mults, "Count scalar multiplications of the serial run");
    app.add_option("--trace", trace, "Write per-message CSV trace (suffix _P<n> when sweeping)");
    app.add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--input", input, "Matrix file (.bin = binary, otherwise text)")
        ->check(CLI::ExistingFile);
    app.add_option("--output", output, "Write the report here instead of stdout");
    app.add_option("--timeout-ms", timeout_ms, "Abort a parallel run when a receive waits longer")
        ->check(CLI::PositiveNumber);
    app.add_flag("--dump-tree", dump_tree, "Print the process tree as JSON and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    cfg.distribution = fastata::distribution_from_string(distribution);
    cfg.runtime.timeout = std::chrono::milliseconds(timeout_ms);
    if (!trace.empty()) cfg.trace = trace;
    if (!input.empty()) cfg.input = input;
    if (sweep) cfg.workers = fastata::default_sweep(std::thread::hardware_concurrency());

    try {
        if (dump_tree) {
            auto rows = cfg.rows;
            auto cols = cfg.cols;
            if (cfg.input) {
                const auto a = fastata::load_matrix(*cfg.input);
                rows = a.rows();
                cols = a.cols();
            }
            std::cout << fastata::tree_to_json(fastata::build_tree(cfg.workers.front(), rows, cols))
                      << '\n';
            return 0;
        }

        const auto reports = fastata::run_bench(cfg);

        std::ofstream file;
        if (!output.empty()) {
            file.open(output);
            if (!file) {
                std::cerr << "cannot write " << output << '\n';
                return kExitUsage;
            }
        }
        std::ostream& out = output.empty() ? std::cout : file;
        if (format == "json") {
            fastata::write_json(out, reports);
        } else {
            fastata::write_csv(out, reports);
        }

        int status = 0;
        for (const auto& r : reports) {
            if (r.check_passed) continue;
            status = kExitCheckFailed;
            std::cerr << "check failed (m=" << r.m << " n=" << r.n << " P=" << r.processes
                      << "): ||diff||_F = " << r.check->frobenius_error << " > "
                      << r.check->tolerance << "; max abs error " << r.check->max_abs_error
                      << " at (" << r.check->row << ", " << r.check->col << ")\n";
        }
        return status;
    } catch (const fastata::contract_error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const fastata::runtime_abort& e) {
        std::cerr << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
