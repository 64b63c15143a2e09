#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "entrate/corpus.hpp"
#include "entrate/entropy_est.hpp"
#include "entrate/markov.hpp"
#include "entrate/rate.hpp"
#include "entrate/rng.hpp"
#include "entrate/simulate.hpp"

namespace {

using namespace entrate;

SamplePath make_path(std::uint32_t S, std::uint64_t n, std::uint64_t seed) {
    TransitionMatrix T = generate(ChainFamily::zipf(), S, seed);
    StationaryDist pi = stationary(T);
    return sample_path(T, pi, n, seed);
}

Counts make_counts(std::uint32_t S, std::uint64_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::uint32_t> samples(n);
    for (auto& s : samples) s = rng.below(S);
    return counts_from_samples(samples, S);
}

void BM_EntropyPoly(benchmark::State& state) {
    Counts counts = make_counts(std::uint32_t(state.range(0)), 100000, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate_entropy_poly(counts, {}));
    }
}
BENCHMARK(BM_EntropyPoly)->Arg(200)->Arg(2000);

void BM_SamplePath(benchmark::State& state) {
    TransitionMatrix T = generate(ChainFamily::zipf(), 200, 1);
    StationaryDist pi = stationary(T);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_path(T, pi, std::uint64_t(state.range(0)), 11));
    }
}
BENCHMARK(BM_SamplePath)->Arg(300000);

void BM_EmpiricalRate(benchmark::State& state) {
    SamplePath path = make_path(200, std::uint64_t(state.range(0)), 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(empirical_rate(path));
    }
}
BENCHMARK(BM_EmpiricalRate)->Arg(100000);

void BM_ConditionalPolyRate(benchmark::State& state) {
    SamplePath path = make_path(200, std::uint64_t(state.range(0)), 5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(conditional_rate(path, SliceEstimator::Poly));
    }
}
BENCHMARK(BM_ConditionalPolyRate)->Arg(100000);

void BM_MatchLengths(benchmark::State& state) {
    SamplePath path = make_path(2, std::uint64_t(state.range(0)), 9);
    for (auto _ : state) {
        benchmark::DoNotOptimize(match_lengths(path, MatchWindow::centered(path.n())));
    }
}
BENCHMARK(BM_MatchLengths)->Arg(100000);

void BM_KGramBuild(benchmark::State& state) {
    Rng rng(13);
    std::string text;
    for (std::uint64_t t = 0; t < std::uint64_t(state.range(0)); ++t) {
        text += "w" + std::to_string(rng.below(50));
        text += ' ';
    }
    TokenStream stream = tokenize(text);
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_kgram(stream, 2));
    }
}
BENCHMARK(BM_KGramBuild)->Arg(100000);

} // namespace

BENCHMARK_MAIN();
