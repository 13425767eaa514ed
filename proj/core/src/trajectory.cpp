#include "trajmine/trajectory.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace trajmine {

namespace {

// Directed significant-pair adjacency. An undirected significant pair yields
// both arcs; a directed one only its preferred arc.
std::map<ConditionId, std::vector<ConditionId>> significant_arcs(
    const std::vector<PairStats>& pairs) {
    std::map<ConditionId, std::vector<ConditionId>> arcs;
    for (const auto& p : pairs) {
        if (!p.significant) continue;
        if (p.direction != PairDirection::backward) arcs[p.c1].push_back(p.c2);
        if (p.direction != PairDirection::forward) arcs[p.c2].push_back(p.c1);
    }
    for (auto& [_, targets] : arcs) std::sort(targets.begin(), targets.end());
    return arcs;
}

bool arc_allowed(const std::map<ConditionId, std::vector<ConditionId>>& arcs,
                 ConditionId from, ConditionId to) {
    auto it = arcs.find(from);
    return it != arcs.end() &&
           std::binary_search(it->second.begin(), it->second.end(), to);
}

void extend(const std::map<ConditionId, std::vector<ConditionId>>& arcs,
            std::vector<ConditionId>& path, int length, bool require_all_pairs,
            std::vector<std::vector<ConditionId>>& out) {
    if (static_cast<int>(path.size()) == length) {
        out.push_back(path);
        return;
    }
    auto it = arcs.find(path.back());
    if (it == arcs.end()) return;
    for (ConditionId next : it->second) {
        if (std::find(path.begin(), path.end(), next) != path.end()) continue;
        if (require_all_pairs) {
            // Every earlier condition must also reach `next` as a significant
            // pair in a compatible orientation.
            bool ok = true;
            for (std::size_t i = 0; i + 1 < path.size(); ++i)
                if (!arc_allowed(arcs, path[i], next)) {
                    ok = false;
                    break;
                }
            if (!ok) continue;
        }
        path.push_back(next);
        extend(arcs, path, length, require_all_pairs, out);
        path.pop_back();
    }
}

}  // namespace

std::vector<std::vector<ConditionId>> build_candidate_trajectories(
    const std::vector<PairStats>& pairs, int length, bool require_all_pairs) {
    const auto arcs = significant_arcs(pairs);
    std::vector<std::vector<ConditionId>> out;
    std::vector<ConditionId> path;
    for (const auto& [start, _] : arcs) {
        path.assign(1, start);
        extend(arcs, path, length, require_all_pairs, out);
    }
    std::sort(out.begin(), out.end());
    return out;
}

Trajectory count_trajectory_support(const std::vector<ConditionId>& candidate,
                                    const std::vector<FirstDiagnosisSequence>& sequences,
                                    const Stratum& stratum, int min_gap_days) {
    Trajectory t;
    t.conditions = candidate;
    const int min_gap = std::max(1, min_gap_days);  // strict date order at minimum
    for (PatientIndex p : stratum.patients) {
        const auto& seq = sequences[p];
        Date prev{};
        bool ok = true;
        for (std::size_t i = 0; i < candidate.size(); ++i) {
            auto d = seq.first(candidate[i]);
            if (!d || (i > 0 && days_between(prev, *d) < min_gap)) {
                ok = false;
                break;
            }
            prev = *d;
        }
        if (ok) t.patients.push_back(p);
    }
    return t;
}

std::vector<Trajectory> dedup_trajectories(std::vector<Trajectory> trajectories,
                                           int min_traj_patients, int* tie_count) {
    if (tie_count) *tie_count = 0;
    std::map<std::vector<ConditionId>, std::size_t> best;  // condition set -> index
    std::vector<char> tied_groups;
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        std::vector<ConditionId> key = trajectories[i].conditions;
        std::sort(key.begin(), key.end());
        auto [it, inserted] = best.emplace(std::move(key), i);
        if (inserted) continue;
        const auto& incumbent = trajectories[it->second];
        const auto& challenger = trajectories[i];
        if (challenger.support() > incumbent.support()) {
            it->second = i;
        } else if (challenger.support() == incumbent.support()) {
            if (tie_count) ++*tie_count;
            if (challenger.conditions < incumbent.conditions) it->second = i;
        }
    }
    std::vector<Trajectory> out;
    out.reserve(best.size());
    for (const auto& [_, idx] : best)
        if (trajectories[idx].support() >= min_traj_patients)
            out.push_back(std::move(trajectories[idx]));
    std::sort(out.begin(), out.end(), [](const Trajectory& a, const Trajectory& b) {
        if (a.support() != b.support()) return a.support() > b.support();
        return a.conditions < b.conditions;
    });
    return out;
}

std::vector<Trajectory> mine_trajectories(const Stratum& stratum,
                                          const std::vector<FirstDiagnosisSequence>& sequences,
                                          const std::vector<PairStats>& pairs,
                                          const PipelineConfig& config) {
    const auto candidates =
        build_candidate_trajectories(pairs, config.traj_length, config.require_all_pairs);
    std::vector<Trajectory> counted;
    counted.reserve(candidates.size());
    for (const auto& cand : candidates) {
        Trajectory t =
            count_trajectory_support(cand, sequences, stratum, config.traj_min_gap_days);
        if (t.support() > 0) counted.push_back(std::move(t));
    }
    return dedup_trajectories(std::move(counted), config.min_traj_patients);
}

}  // namespace trajmine
