#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <vector>

#include "trajmine/cohort.hpp"
#include "trajmine/trajectory.hpp"

namespace trajmine {

/// Undirected condition graph built from retained trajectories. Edge
/// frequency counts, per trajectory, each consecutive condition pair once
/// (orientation ignored); the `patient` weighting variant adds the
/// trajectory's support instead of 1.
class TrajectoryNetwork {
  public:
    static TrajectoryNetwork build(const std::vector<Trajectory>& trajectories,
                                   EdgeWeighting weighting = EdgeWeighting::trajectory);

    const std::vector<ConditionId>& nodes() const { return nodes_; }
    const std::map<std::pair<ConditionId, ConditionId>, std::int64_t>& edges() const {
        return freq_;
    }

    /// Index of a condition among nodes(); throws on unknown conditions.
    int node_index(ConditionId c) const;
    bool has_node(ConditionId c) const;

    /// Minimum-weight distances from `src` to every node (Dijkstra).
    /// Unreachable nodes get +infinity.
    std::vector<double> shortest_paths_from(ConditionId src) const;

  private:
    std::vector<ConditionId> nodes_;  // sorted
    std::map<std::pair<ConditionId, ConditionId>, std::int64_t> freq_;  // key: a < b
    std::vector<std::vector<std::pair<int, double>>> adjacency_;  // node idx -> (nbr, w)
};

/// w = 1/sqrt(f); f must be >= 1.
double edge_weight(std::int64_t frequency);

double shortest_path_length(const TrajectoryNetwork& net, ConditionId a, ConditionId b);
inline bool is_unreachable(double distance) {
    return distance == std::numeric_limits<double>::infinity();
}

/// Inverse shortest path, clamped into [0,1] by default: 1 for a == b,
/// 0 for unreachable pairs, otherwise min(1, 1/distance).
double condition_similarity(const TrajectoryNetwork& net, ConditionId a, ConditionId b,
                            bool clamp = true);

/// Mean condition similarity over all ordered condition pairs of the two
/// trajectories.
double trajectory_similarity(const TrajectoryNetwork& net,
                             const std::vector<ConditionId>& t1,
                             const std::vector<ConditionId>& t2, bool clamp = true);

/// Dense symmetric trajectory-similarity matrix, diagonal exactly 1.
struct SimilarityMatrix {
    int n = 0;
    std::vector<double> values;  // row-major n*n

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n + j]; }
    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * n + j]; }
};

SimilarityMatrix similarity_matrix(const TrajectoryNetwork& net,
                                   const std::vector<Trajectory>& trajectories,
                                   bool clamp = true);

/// Graphviz DOT export: node label = condition name, system_category
/// attribute; edges carry f and w.
void write_dot(const TrajectoryNetwork& net, const Catalog& catalog, std::ostream& out);

}  // namespace trajmine
