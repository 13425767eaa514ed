#include <benchmark/benchmark.h>

#include "trajmine/network.hpp"
#include "trajmine/rng.hpp"

using namespace trajmine;

namespace {

std::vector<Trajectory> random_trajectories(int n_trajectories, int n_conditions,
                                            std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Trajectory> out;
    while (static_cast<int>(out.size()) < n_trajectories) {
        ConditionId a = static_cast<ConditionId>(rng.uniform_int(1, n_conditions));
        ConditionId b = static_cast<ConditionId>(rng.uniform_int(1, n_conditions));
        ConditionId c = static_cast<ConditionId>(rng.uniform_int(1, n_conditions));
        if (a == b || b == c || a == c) continue;
        Trajectory t;
        t.conditions = {a, b, c};
        t.patients = {0};
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace

static void BM_BuildNetwork(benchmark::State& state) {
    const auto trajectories =
        random_trajectories(static_cast<int>(state.range(0)), 40, 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(TrajectoryNetwork::build(trajectories));
}
BENCHMARK(BM_BuildNetwork)->Arg(37)->Arg(229)->Arg(1000);

static void BM_SingleSourceDijkstra(benchmark::State& state) {
    const auto trajectories =
        random_trajectories(static_cast<int>(state.range(0)), 40, 2);
    const auto net = TrajectoryNetwork::build(trajectories);
    for (auto _ : state)
        benchmark::DoNotOptimize(net.shortest_paths_from(net.nodes().front()));
}
BENCHMARK(BM_SingleSourceDijkstra)->Arg(229)->Arg(1000);

static void BM_SimilarityMatrix(benchmark::State& state) {
    const auto trajectories =
        random_trajectories(static_cast<int>(state.range(0)), 40, 3);
    const auto net = TrajectoryNetwork::build(trajectories);
    for (auto _ : state)
        benchmark::DoNotOptimize(similarity_matrix(net, trajectories));
}
BENCHMARK(BM_SimilarityMatrix)->Arg(37)->Arg(229)->Arg(439);

BENCHMARK_MAIN();
