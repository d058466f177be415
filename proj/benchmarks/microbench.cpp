#include <benchmark/benchmark.h>

#include "fastata/ata.hpp"
#include "fastata/bench.hpp"
#include "fastata/runtime.hpp"
#include "fastata/scheduler.hpp"
#include "fastata/strassen.hpp"

namespace {

void BM_Ata(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = fastata::gen_matrix(n, n, 1);
    for (auto _ : state) benchmark::DoNotOptimize(fastata::ata(a));
}
BENCHMARK(BM_Ata)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_AtaOracle(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = fastata::gen_matrix(n, n, 1);
    for (auto _ : state) benchmark::DoNotOptimize(fastata::classical_ata_oracle(a));
}
BENCHMARK(BM_AtaOracle)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Hasa(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = fastata::gen_matrix(n, n, 1);
    const auto b = fastata::gen_matrix(n, n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(fastata::hasa(a, b));
}
BENCHMARK(BM_Hasa)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_ClassicalMult(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = fastata::gen_matrix(n, n, 1);
    const auto b = fastata::gen_matrix(n, n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(fastata::classical_mult(a, b));
}
BENCHMARK(BM_ClassicalMult)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Transpose(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = fastata::gen_matrix(n, n + 1, 1);
    for (auto _ : state) benchmark::DoNotOptimize(fastata::transpose(a));
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(n * (n + 1) * sizeof(double)));
}
BENCHMARK(BM_Transpose)->Arg(256)->Arg(1024)->Arg(2048);

void BM_RunParallel(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto p = static_cast<std::uint64_t>(state.range(1));
    const auto a = fastata::gen_matrix(n, n, 1);
    const auto tree = fastata::build_tree(p, n, n);
    for (auto _ : state) benchmark::DoNotOptimize(fastata::run_parallel(a, tree));
}
BENCHMARK(BM_RunParallel)
    ->Args({512, 1})
    ->Args({512, 6})
    ->Args({512, 15})
    ->Args({512, 38})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
