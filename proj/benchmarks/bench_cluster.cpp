#include <benchmark/benchmark.h>

#include <numeric>

#include "trajmine/cluster.hpp"
#include "trajmine/rng.hpp"

using namespace trajmine;

namespace {

// Noisy three-block affinity of order n.
SimilarityMatrix blocks_with_noise(int n, std::uint64_t seed) {
    Rng rng(seed);
    SimilarityMatrix m;
    m.n = n;
    m.values.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        m.at(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            const bool same_block = (3 * i / n) == (3 * j / n);
            const double v = same_block ? 0.7 + 0.3 * rng.next_double()
                                        : 0.1 * rng.next_double();
            m.at(i, j) = m.at(j, i) = v;
        }
    }
    return m;
}

}  // namespace

static void BM_SpectralEmbed(benchmark::State& state) {
    const auto affinity = blocks_with_noise(static_cast<int>(state.range(0)), 4);
    for (auto _ : state) benchmark::DoNotOptimize(spectral_embed(affinity, 5));
}
BENCHMARK(BM_SpectralEmbed)->Arg(37)->Arg(229)->Arg(439);

static void BM_Kmeans(benchmark::State& state) {
    const auto affinity = blocks_with_noise(static_cast<int>(state.range(0)), 5);
    const auto emb = spectral_embed(affinity, 3);
    for (auto _ : state) benchmark::DoNotOptimize(kmeans(emb, 3, 7));
}
BENCHMARK(BM_Kmeans)->Arg(229)->Arg(439);

static void BM_SelectKSweep(benchmark::State& state) {
    const auto affinity = blocks_with_noise(static_cast<int>(state.range(0)), 6);
    for (auto _ : state)
        benchmark::DoNotOptimize(select_k_and_cluster(affinity, 2, 10, 13));
}
BENCHMARK(BM_SelectKSweep)->Arg(37)->Arg(229);

BENCHMARK_MAIN();
