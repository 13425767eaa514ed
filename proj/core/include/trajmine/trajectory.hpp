#pragma once

#include <vector>

#include "trajmine/cohort.hpp"
#include "trajmine/pair_stats.hpp"

namespace trajmine {

/// An ordered condition sequence with its supporting patients.
struct Trajectory {
    std::vector<ConditionId> conditions;  // distinct, default length 3
    std::vector<PatientIndex> patients;   // ascending
    int support() const { return static_cast<int>(patients.size()); }
};

/// All sequences of `length` distinct conditions whose consecutive pairs are
/// significant pairs traversed in their preferred direction (undirected pairs
/// traverse either way). With require_all_pairs, every pair within the
/// sequence must additionally be significant and orientation-compatible.
std::vector<std::vector<ConditionId>> build_candidate_trajectories(
    const std::vector<PairStats>& pairs, int length = 3, bool require_all_pairs = false);

/// A patient supports the candidate iff the first-diagnosis dates of its
/// conditions are strictly increasing (other conditions may interleave; a
/// same-day tie breaks the order). min_gap_days > 0 additionally requires
/// that many days between consecutive conditions.
Trajectory count_trajectory_support(const std::vector<ConditionId>& candidate,
                                    const std::vector<FirstDiagnosisSequence>& sequences,
                                    const Stratum& stratum, int min_gap_days = 0);

/// Groups trajectories sharing a condition set, keeps the most supported
/// permutation (ties: lexicographically smaller sequence), then drops
/// trajectories below min_traj_patients. `tie_count`, when given, receives
/// the number of equal-support ties resolved by the lexicographic rule.
std::vector<Trajectory> dedup_trajectories(std::vector<Trajectory> trajectories,
                                           int min_traj_patients = 10,
                                           int* tie_count = nullptr);

/// build -> count -> dedup; result ordered by support descending, then
/// lexicographically by condition sequence.
std::vector<Trajectory> mine_trajectories(const Stratum& stratum,
                                          const std::vector<FirstDiagnosisSequence>& sequences,
                                          const std::vector<PairStats>& pairs,
                                          const PipelineConfig& config);

}  // namespace trajmine
