#include "trajmine/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <set>
#include <stdexcept>

namespace trajmine {

double edge_weight(std::int64_t frequency) {
    if (frequency < 1)
        throw std::invalid_argument("edge_weight: frequency must be >= 1, got " +
                                    std::to_string(frequency));
    return 1.0 / std::sqrt(static_cast<double>(frequency));
}

TrajectoryNetwork TrajectoryNetwork::build(const std::vector<Trajectory>& trajectories,
                                           EdgeWeighting weighting) {
    if (trajectories.empty())
        throw std::invalid_argument("TrajectoryNetwork::build: empty trajectory list");
    TrajectoryNetwork net;
    std::set<ConditionId> nodes;
    for (const auto& t : trajectories) {
        const std::int64_t increment =
            weighting == EdgeWeighting::trajectory ? 1 : t.support();
        // Consecutive pairs only; an edge is counted once per trajectory even
        // if the same unordered pair were adjacent twice (conditions are
        // distinct within a trajectory, so that cannot happen at length 3).
        std::set<std::pair<ConditionId, ConditionId>> seen;
        for (ConditionId c : t.conditions) nodes.insert(c);
        for (std::size_t i = 0; i + 1 < t.conditions.size(); ++i) {
            ConditionId a = t.conditions[i], b = t.conditions[i + 1];
            if (a > b) std::swap(a, b);
            if (seen.insert({a, b}).second) net.freq_[{a, b}] += increment;
        }
    }
    net.nodes_.assign(nodes.begin(), nodes.end());
    net.adjacency_.resize(net.nodes_.size());
    for (const auto& [edge, f] : net.freq_) {
        const int ia = net.node_index(edge.first);
        const int ib = net.node_index(edge.second);
        const double w = edge_weight(f);
        net.adjacency_[ia].emplace_back(ib, w);
        net.adjacency_[ib].emplace_back(ia, w);
    }
    return net;
}

bool TrajectoryNetwork::has_node(ConditionId c) const {
    return std::binary_search(nodes_.begin(), nodes_.end(), c);
}

int TrajectoryNetwork::node_index(ConditionId c) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), c);
    if (it == nodes_.end() || *it != c)
        throw std::invalid_argument("network: unknown condition " + std::to_string(c));
    return static_cast<int>(it - nodes_.begin());
}

std::vector<double> TrajectoryNetwork::shortest_paths_from(ConditionId src) const {
    const int s = node_index(src);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(nodes_.size(), inf);
    dist[s] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    heap.emplace(0.0, s);
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (const auto& [v, w] : adjacency_[u]) {
            const double nd = d + w;
            if (nd < dist[v]) {
                dist[v] = nd;
                heap.emplace(nd, v);
            }
        }
    }
    return dist;
}

double shortest_path_length(const TrajectoryNetwork& net, ConditionId a, ConditionId b) {
    const auto dist = net.shortest_paths_from(a);
    return dist[net.node_index(b)];
}

namespace {

double similarity_from_distance(double d, double self_or_same, bool clamp) {
    if (d == 0.0) return self_or_same;
    if (is_unreachable(d)) return 0.0;
    const double s = 1.0 / d;
    return clamp ? std::min(1.0, s) : s;
}

}  // namespace

double condition_similarity(const TrajectoryNetwork& net, ConditionId a, ConditionId b,
                            bool clamp) {
    if (a == b) {
        net.node_index(a);  // still reject unknown nodes
        return 1.0;
    }
    return similarity_from_distance(shortest_path_length(net, a, b), 1.0, clamp);
}

double trajectory_similarity(const TrajectoryNetwork& net,
                             const std::vector<ConditionId>& t1,
                             const std::vector<ConditionId>& t2, bool clamp) {
    double sum = 0.0;
    for (ConditionId a : t1)
        for (ConditionId b : t2) sum += condition_similarity(net, a, b, clamp);
    return sum / (static_cast<double>(t1.size()) * static_cast<double>(t2.size()));
}

SimilarityMatrix similarity_matrix(const TrajectoryNetwork& net,
                                   const std::vector<Trajectory>& trajectories,
                                   bool clamp) {
    const int n = static_cast<int>(trajectories.size());
    const int m = static_cast<int>(net.nodes().size());

    // All-pairs condition similarities once; trajectory pairs then read them.
    std::vector<double> cond_sim(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) {
        const auto dist = net.shortest_paths_from(net.nodes()[i]);
        for (int j = 0; j < m; ++j)
            cond_sim[static_cast<std::size_t>(i) * m + j] =
                i == j ? 1.0 : similarity_from_distance(dist[j], 1.0, clamp);
    }

    SimilarityMatrix sim;
    sim.n = n;
    sim.values.assign(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<std::vector<int>> idx(n);
    for (int i = 0; i < n; ++i) {
        idx[i].reserve(trajectories[i].conditions.size());
        for (ConditionId c : trajectories[i].conditions) idx[i].push_back(net.node_index(c));
    }
    for (int i = 0; i < n; ++i) {
        sim.at(i, i) = 1.0;  // forced; Eq. 4 self-similarity can fall below 1
        for (int j = i + 1; j < n; ++j) {
            double sum = 0.0;
            for (int a : idx[i])
                for (int b : idx[j]) sum += cond_sim[static_cast<std::size_t>(a) * m + b];
            const double v = sum / (static_cast<double>(idx[i].size()) *
                                    static_cast<double>(idx[j].size()));
            sim.at(i, j) = v;
            sim.at(j, i) = v;
        }
    }
    return sim;
}

void write_dot(const TrajectoryNetwork& net, const Catalog& catalog, std::ostream& out) {
    out << "graph condition_network {\n";
    for (ConditionId c : net.nodes()) {
        const auto& def = catalog.at(c);
        out << "  n" << c << " [label=\"" << def.name << "\" system_category=\""
            << to_string(def.system) << "\"];\n";
    }
    char buf[40];
    for (const auto& [edge, f] : net.edges()) {
        std::snprintf(buf, sizeof(buf), "%.6g", edge_weight(f));
        out << "  n" << edge.first << " -- n" << edge.second << " [f=" << f << " w=" << buf
            << "];\n";
    }
    out << "}\n";
}

}  // namespace trajmine
