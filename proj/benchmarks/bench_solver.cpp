#include <benchmark/benchmark.h>

#include "envindex/frontier.hpp"
#include "envindex/hjb.hpp"
#include "envindex/measures.hpp"

using namespace envindex;

namespace {

const GammaSpec kP{0.295, 34.4};
const GammaSpec kMu{1.25, 0.01};

void BM_QuantizeGamma(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(quantize_gamma(kP, n));
}
BENCHMARK(BM_QuantizeGamma)->Arg(256)->Arg(1024)->Arg(4096);

void BM_QuantizeTilted(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(quantize_gamma_tilted(kMu, n));
}
BENCHMARK(BM_QuantizeTilted)->Arg(256)->Arg(1024)->Arg(4096);

void BM_SolveAtom(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const auto mu = quantize_gamma_tilted(kMu, m);
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_A(34.4, 0.5 * 34.4, 0.02, mu, 1e-12));
}
BENCHMARK(BM_SolveAtom)->Arg(256)->Arg(1024)->Arg(4096);

void BM_Coefficients(benchmark::State& state) {
    const auto nm = static_cast<std::size_t>(state.range(0));
    const auto p = quantize_gamma(kP, nm);
    const auto mu = quantize_gamma_tilted(kMu, nm);
    const auto u = UncertaintySpec::proportional(0.5);
    for (auto _ : state) benchmark::DoNotOptimize(compute_coefficients(p, mu, 0.02, u));
}
BENCHMARK(BM_Coefficients)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_FrontierPoint(benchmark::State& state) {
    const auto nm = static_cast<std::size_t>(state.range(0));
    const auto p = quantize_gamma(kP, nm);
    const auto mu = quantize_gamma_tilted(kMu, nm);
    const auto coeffs = compute_coefficients(p, mu, 0.02, UncertaintySpec::proportional(0.5));
    const auto x0 = constant_state(nm, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(env_index(coeffs, x0, p, mu, 0.02));
        benchmark::DoNotOptimize(ren_index(coeffs, x0, p, mu, 0.02));
    }
}
BENCHMARK(BM_FrontierPoint)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
